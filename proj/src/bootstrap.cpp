#include "blockmix/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "blockmix/parallel.hpp"
#include "blockmix/simulator.hpp"

namespace blockmix {

Membership anchor_alpha(const std::vector<int>& assignment, int K, double epsilon) {
  if (K < 1) throw DomainError("K must be at least 1");
  if (!(epsilon >= 0.0) || (K - 1) * epsilon >= 1.0) throw DomainError("anchor epsilon too large");
  Membership alpha(static_cast<Eigen::Index>(assignment.size()), K);
  alpha.setConstant(epsilon);
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    const int z = assignment[i];
    if (z < 0 || z >= K) throw DomainError("assignment outside 0..K-1");
    alpha(static_cast<Eigen::Index>(i), z) = 1.0 - (K - 1) * epsilon;
  }
  return alpha;
}

double sample_quantile(std::vector<double> values, double q) {
  if (values.empty()) throw DomainError("quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw DomainError("quantile level outside [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] + (h - static_cast<double>(lo)) * (values[lo + 1] - values[lo]);
}

BootstrapResult run_bootstrap(const VariationalState& fitted, std::size_t n,
                              const BootstrapConfig& config) {
  if (config.B < 0) throw DomainError("B must be nonnegative");
  if (!(config.ci_levels.first <= config.ci_levels.second)) throw DomainError("ci levels out of order");
  const int K = model_components(fitted.model);

  BootstrapResult out;
  out.ci_levels = config.ci_levels;
  out.names = parameter_names(fitted.model);
  out.estimate = parameter_vector(fitted.model);
  for (int k = 0; k < K; ++k) {
    out.names.push_back("gamma[" + std::to_string(k) + "]");
    out.estimate.push_back(fitted.gamma[k]);
  }
  const std::size_t width = out.names.size();
  out.samples.assign(config.B, std::vector<double>(width, std::nan("")));
  out.replicate_lb.assign(config.B, std::nan(""));
  out.replicate_seeds.resize(config.B);
  std::vector<char> ok(config.B, 0);

  FitConfig refit;
  refit.max_sweeps = config.refit_max_sweeps;
  refit.rel_tol = config.rel_tol;
  refit.e_step = config.e_step;

  for (int b = 0; b < config.B; ++b)
    out.replicate_seeds[b] = derive_seed(config.seed, 0x626f6f74, static_cast<std::uint64_t>(b));

  parallel_for(static_cast<std::size_t>(config.B), config.jobs, [&](std::size_t b) {
    const std::uint64_t seed = out.replicate_seeds[b];
    SimSpec spec{n, fitted.gamma, fitted.model, seed, false};
    auto sim = sample_network(spec);
    Membership alpha = anchor_alpha(sim.assignment, K, config.anchor_epsilon);
    SparseNetwork network = std::move(sim.network);
    if (config.relabel) {
      Rng rng(derive_seed(seed, 0x7065726d));
      std::vector<NodeId> perm(n);
      std::iota(perm.begin(), perm.end(), NodeId{0});
      for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[uniform_index(rng, i)]);
      Membership moved(alpha.rows(), alpha.cols());
      for (std::size_t i = 0; i < n; ++i) moved.row(perm[i]) = alpha.row(static_cast<Eigen::Index>(i));
      alpha = std::move(moved);
      network = network.relabeled(perm);
    }
    FitResult res = fit_from_alpha(network, fitted.model, std::move(alpha), refit);
    auto row = parameter_vector(res.state.model);
    for (int k = 0; k < K; ++k) row.push_back(res.state.gamma[k]);
    out.samples[b] = std::move(row);
    out.replicate_lb[b] = res.lb;
    ok[b] = res.converged && std::isfinite(res.lb);
  });

  for (int b = 0; b < config.B; ++b)
    if (!ok[b]) out.failures.push_back(b);
  out.warning = config.B > 0 && out.failures.size() * 5 > static_cast<std::size_t>(config.B);

  const std::size_t good = static_cast<std::size_t>(config.B) - out.failures.size();
  if (good > 0) {
    out.ci.resize(width);
    std::vector<double> column;
    column.reserve(good);
    for (std::size_t c = 0; c < width; ++c) {
      column.clear();
      for (int b = 0; b < config.B; ++b)
        if (ok[b]) column.push_back(out.samples[b][c]);
      out.ci[c] = {sample_quantile(column, config.ci_levels.first),
                   sample_quantile(column, config.ci_levels.second)};
    }
  }
  return out;
}

}  // namespace blockmix
