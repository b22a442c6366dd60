#include <algorithm>
#include <cmath>
#include <limits>

#include "blockmix/engine.hpp"
#include "detail.hpp"

namespace blockmix {

namespace {

void require_positive(const Membership& alpha) {
  if ((alpha.array() <= 0.0).any())
    throw DomainError("anchor memberships must be strictly positive");
}

std::vector<double> log_weights(const Eigen::VectorXd& gamma) {
  std::vector<double> out(gamma.size());
  for (Eigen::Index k = 0; k < gamma.size(); ++k)
    out[k] = gamma[k] > 0.0 ? std::log(gamma[k]) : -std::numeric_limits<double>::infinity();
  return out;
}

}  // namespace

namespace detail {

Membership e_step_mm(const SparseNetwork& network, const VariationalState& state,
                     const BlockDyadStats& stats, double floor) {
  const auto& alpha = state.alpha;
  require_positive(alpha);
  const auto log_pi = log_prob_table(state.model);
  const Membership h = neighbor_log_evidence(network, alpha, stats, log_pi);
  const int K = static_cast<int>(alpha.cols());
  Membership next(alpha.rows(), K);
  const std::vector<double> log_gamma = log_weights(state.gamma);
  std::vector<double> quad(K), lin(K);
  for (Eigen::Index i = 0; i < alpha.rows(); ++i) {
    for (int k = 0; k < K; ++k) {
      const double a = alpha(i, k);
      quad[k] = h(i, k) / (2.0 * a) - 1.0 / a;
      lin[k] = log_gamma[k] - std::log(a) + 1.0;
    }
    auto x = solve_simplex_qp(quad, lin, floor);
    for (int k = 0; k < K; ++k) next(i, k) = x[k];
  }
  return next;
}

Membership e_step_fp(const SparseNetwork& network, const VariationalState& state,
                     const BlockDyadStats& stats, double floor) {
  const auto& alpha = state.alpha;
  require_positive(alpha);
  const auto log_pi = log_prob_table(state.model);
  const Membership h = neighbor_log_evidence(network, alpha, stats, log_pi);
  const int K = static_cast<int>(alpha.cols());
  Membership next(alpha.rows(), K);
  const std::vector<double> log_gamma = log_weights(state.gamma);
  std::vector<double> logits(K), row(K);
  for (Eigen::Index i = 0; i < alpha.rows(); ++i) {
    double hi = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < K; ++k) {
      logits[k] = log_gamma[k] + h(i, k);
      hi = std::max(hi, logits[k]);
    }
    if (hi == -std::numeric_limits<double>::infinity()) {
      for (int k = 0; k < K; ++k) row[k] = alpha(i, k);
    } else {
      double z = 0.0;
      for (int k = 0; k < K; ++k) z += (row[k] = std::exp(logits[k] - hi));
      for (int k = 0; k < K; ++k) row[k] /= z;
    }
    detail::floor_row(row, floor);
    for (int k = 0; k < K; ++k) next(i, k) = row[k];
  }
  return next;
}

}  // namespace detail

Membership e_step_mm(const SparseNetwork& network, const VariationalState& state, double floor) {
  return detail::e_step_mm(network, state, accumulate_block_stats(network, state.alpha), floor);
}

Membership e_step_fp(const SparseNetwork& network, const VariationalState& state, double floor) {
  return detail::e_step_fp(network, state, accumulate_block_stats(network, state.alpha), floor);
}

}  // namespace blockmix
