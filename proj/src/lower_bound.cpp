#include <algorithm>
#include <cmath>
#include <limits>

#include "blockmix/engine.hpp"

namespace blockmix {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// w * log p with 0 * log 0 = 0; weights at rounding level count as zero
// against an impossible outcome.
double weighted_log(double w, double log_p) {
  if (log_p == kNegInf) return w > 1e-9 ? kNegInf : 0.0;
  return w == 0.0 ? 0.0 : w * log_p;
}

double entropy_term(const Membership& alpha) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < alpha.size(); ++i) {
    const double a = alpha.data()[i];
    if (a > 0.0) h -= a * std::log(a);
  }
  return h;
}

}  // namespace

double lower_bound(const BlockDyadStats& stats, const Membership& alpha,
                   const Eigen::VectorXd& gamma, const LogProbTable& log_pi) {
  const int K = stats.K;
  if (log_pi.K != K || log_pi.D != stats.D || gamma.size() != K)
    throw DomainError("lower_bound: dimension mismatch");
  double value = 0.0;
  for (int k = 0; k < K; ++k)
    for (int l = k; l < K; ++l)
      for (int d = 0; d < stats.D; ++d) value += weighted_log(stats.counts(k, l, d), log_pi(k, l, d));
  for (int k = 0; k < K; ++k) {
    const double lg = gamma[k] > 0.0 ? std::log(gamma[k]) : kNegInf;
    value += weighted_log(stats.col_sum[k], lg);
  }
  return value + entropy_term(alpha);
}

double lower_bound(const SparseNetwork& network, const VariationalState& state) {
  const auto stats = accumulate_block_stats(network, state.alpha);
  return lower_bound(stats, state.alpha, state.gamma, log_prob_table(state.model));
}

Membership neighbor_log_evidence(const SparseNetwork& network, const Membership& alpha,
                                 const BlockDyadStats& stats, const LogProbTable& log_pi) {
  const int K = stats.K;
  const int D = stats.D;
  const int b = stats.baseline;
  const std::size_t n = network.n();
  Membership h = Membership::Zero(static_cast<Eigen::Index>(n), K);
  // partial[d * K + l]: summed memberships of i's neighbors whose dyad, seen
  // from i, is d. The baseline slot holds the non-neighbor residual.
  std::vector<double> partial(static_cast<std::size_t>(D) * K, 0.0);
  std::vector<char> seen(D, 0);
  std::vector<int> touched;
  for (std::size_t i = 0; i < n; ++i) {
    const double* ai = alpha.data() + static_cast<Eigen::Index>(i) * K;
    double* hi = h.data() + static_cast<Eigen::Index>(i) * K;
    double* residual = partial.data() + b * K;
    for (int l = 0; l < K; ++l) residual[l] = stats.col_sum[l] - ai[l];
    touched.assign(1, b);
    for (const auto& nb : network.neighbors(static_cast<NodeId>(i))) {
      const double* aj = alpha.data() + static_cast<Eigen::Index>(nb.node) * K;
      double* acc = partial.data() + nb.value * K;
      if (!seen[nb.value]) {
        seen[nb.value] = 1;
        touched.push_back(nb.value);
      }
      for (int l = 0; l < K; ++l) {
        acc[l] += aj[l];
        residual[l] -= aj[l];
      }
    }
    for (int d : touched) {
      double* acc = partial.data() + d * K;
      for (int k = 0; k < K; ++k) {
        const double* row = log_pi.block(k, 0);
        double s = 0.0;
        for (int l = 0; l < K; ++l) s += weighted_log(std::max(acc[l], 0.0), row[l * D + d]);
        hi[k] += s;
      }
      std::fill(acc, acc + K, 0.0);
      seen[d] = 0;
    }
  }
  return h;
}

double minorizer_value(const SparseNetwork& network, const VariationalState& anchor,
                       const Membership& candidate) {
  const auto& a = anchor.alpha;
  if (candidate.rows() != a.rows() || candidate.cols() != a.cols())
    throw DomainError("candidate shape differs from anchor");
  if ((a.array() <= 0.0).any()) throw DomainError("anchor memberships must be strictly positive");
  const auto stats = accumulate_block_stats(network, a);
  const auto log_pi = log_prob_table(anchor.model);
  const Membership h = neighbor_log_evidence(network, a, stats, log_pi);
  const int K = static_cast<int>(a.cols());
  double q = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (int k = 0; k < K; ++k) {
      const double c = candidate(i, k);
      const double lg = anchor.gamma[k] > 0.0 ? std::log(anchor.gamma[k]) : kNegInf;
      q += weighted_log(c * c / (2.0 * a(i, k)), h(i, k));
      q += weighted_log(c, lg);
      q += c * (1.0 - std::log(a(i, k)) - c / a(i, k));
    }
  return q;
}

}  // namespace blockmix
