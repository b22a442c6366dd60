#include <algorithm>
#include <cmath>

#include "blockmix/engine.hpp"

namespace blockmix {

TabularBlockModel m_step_pi_tabular(const BlockDyadStats& stats, const DyadAlphabet& alphabet,
                                    std::vector<int>* empty_blocks) {
  const int K = stats.K;
  const int D = stats.D;
  if (alphabet.size() != D) throw DomainError("alphabet does not match block stats");
  std::vector<double> canonical;
  canonical.reserve(static_cast<std::size_t>(K) * (K + 1) / 2 * D);
  std::vector<double> row(D);
  for (int k = 0; k < K; ++k)
    for (int l = k; l < K; ++l) {
      double total = 0.0;
      for (int d = 0; d < D; ++d) total += (row[d] = std::max(0.0, stats.counts(k, l, d)));
      if (!(total > 0.0)) {
        std::fill(row.begin(), row.end(), 1.0 / D);
        if (empty_blocks) empty_blocks->push_back(k * K + l);
      } else {
        for (double& v : row) v /= total;
      }
      canonical.insert(canonical.end(), row.begin(), row.end());
    }
  return TabularBlockModel::from_canonical(K, alphabet, canonical);
}

WeightedLogLik lb_theta_derivatives(const BlockDyadStats& stats, const ExpFamBlockModel& model) {
  if (model.K() != stats.K || model.alphabet().size() != stats.D)
    throw DomainError("model does not match block stats");
  return weighted_loglik_derivatives(model, stats.counts);
}

NewtonResult m_step_theta_newton(const BlockDyadStats& stats, const ExpFamBlockModel& model,
                                 const Eigen::VectorXd& theta_init, const NewtonOptions& options) {
  if (model.K() != stats.K || model.alphabet().size() != stats.D)
    throw DomainError("model does not match block stats");
  for (double w : stats.counts.w)
    if (!std::isfinite(w)) throw DomainError("block stats must be finite");
  return maximize_weighted_loglik(model, stats.counts, theta_init, options);
}

}  // namespace blockmix
