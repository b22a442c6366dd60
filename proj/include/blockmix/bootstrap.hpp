#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "blockmix/engine.hpp"

namespace blockmix {

struct BootstrapConfig {
  int B = 500;
  int refit_max_sweeps = 1000;
  double anchor_epsilon = 1e-10;
  std::pair<double, double> ci_levels{0.025, 0.975};
  std::uint64_t seed = 1;
  int jobs = 1;
  double rel_tol = 1e-10;
  FitConfig::EStep e_step = FitConfig::EStep::MM;
  // Shuffle node ids of each simulated network (anchors follow the shuffle).
  bool relabel = true;
};

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

struct BootstrapResult {
  std::vector<std::string> names;     // model parameters, then gamma[k]
  std::vector<double> estimate;       // the fitted values being bootstrapped
  std::vector<std::vector<double>> samples;  // one row per replicate
  std::vector<std::uint64_t> replicate_seeds;
  std::vector<double> replicate_lb;
  std::vector<int> failures;          // replicate indices excluded from intervals
  std::vector<Interval> ci;           // empty when no replicate succeeded
  std::pair<double, double> ci_levels{0.025, 0.975};
  bool warning = false;               // more than 20% of replicates failed
};

// alpha_ik = epsilon off the true component, 1 - (K - 1) epsilon on it.
Membership anchor_alpha(const std::vector<int>& assignment, int K, double epsilon);

// Linear-interpolation sample quantile (type 7) of unsorted values.
double sample_quantile(std::vector<double> values, double q);

BootstrapResult run_bootstrap(const VariationalState& fitted, std::size_t n,
                              const BootstrapConfig& config);
inline BootstrapResult run_bootstrap(const FitResult& fit, const BootstrapConfig& config) {
  return run_bootstrap(fit.state, static_cast<std::size_t>(fit.state.alpha.rows()), config);
}

}  // namespace blockmix
