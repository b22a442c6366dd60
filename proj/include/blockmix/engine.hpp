#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "blockmix/models.hpp"
#include "blockmix/network.hpp"

namespace blockmix {

// n x K auxiliary membership probabilities, one row per node.
using Membership = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr double kDefaultAlphaFloor = 1e-12;

struct VariationalState {
  Membership alpha;
  Eigen::VectorXd gamma;
  DyadModel model;
};

// Soft dyad counts over canonical block pairs k <= l. For k < l the pair
// weight is sum_{i<j} (a_ik a_jl + a_il a_jk) and dyads from the (l, k)
// orientation are counted transposed; for k = l the pair weight is
// sum_{i<j} a_ik a_jk and counts are symmetrized over d and transpose(d).
struct BlockDyadStats {
  int K = 0;
  int D = 0;
  int baseline = 0;
  Eigen::VectorXd col_sum;      // s_k
  Eigen::MatrixXd self_prod;    // q_kl = sum_i a_ik a_il
  Eigen::MatrixXd pair_weight;  // T, symmetric; sum over k <= l equals n(n-1)/2
  DyadWeights counts;           // C[k, l, d], baseline entry = T - sum of the rest

  double baseline_weight(int k, int l) const { return counts(k, l, baseline); }
};

struct FitConfig {
  enum class EStep { MM, FP };

  int max_sweeps = 6000;
  double rel_tol = 1e-10;
  int restarts = 1;
  EStep e_step = EStep::MM;
  int newton_max_iters = 100;
  double newton_grad_tol = 1e-10;
  std::uint64_t seed = 1;
  double alpha_floor = kDefaultAlphaFloor;
  int jobs = 1;
  // Record the bound after each E-step as well as after each M-step.
  bool record_steps = false;
};

struct FitResult {
  VariationalState state;
  double lb = 0.0;
  double lb_initial = 0.0;          // after the opening M-step
  std::vector<double> lb_trace;     // after each sweep (E-step then M-step)
  std::vector<double> lb_after_e;   // filled when record_steps is set
  std::vector<int> hard_assignment;
  int sweeps_used = 0;
  int restart_index = 0;
  bool converged = false;
  std::vector<double> restart_lbs;  // final bound of every restart
  std::vector<std::string> diagnostics;
};

Membership init_random(std::size_t n, int K, std::uint64_t seed);

BlockDyadStats accumulate_block_stats(const SparseNetwork& network, const Membership& alpha);

double lower_bound(const SparseNetwork& network, const VariationalState& state);
// Same bound from precomputed stats; `alpha` only feeds the entropy term.
double lower_bound(const BlockDyadStats& stats, const Membership& alpha,
                   const Eigen::VectorXd& gamma, const LogProbTable& log_pi);

// h_ik = sum_{j != i} sum_l a_jl log pi_{e_ij;kl}, with e_ij the dyad seen
// from i. Both E-steps are built from this matrix.
Membership neighbor_log_evidence(const SparseNetwork& network, const Membership& alpha,
                                 const BlockDyadStats& stats, const LogProbTable& log_pi);

double minorizer_value(const SparseNetwork& network, const VariationalState& anchor,
                       const Membership& candidate);

// Maximizes sum_k (a_k x_k^2 + b_k x_k) over the simplex for a_k < 0.
// Components with a_k or b_k equal to -inf are pinned to zero.
std::vector<double> solve_simplex_qp(std::span<const double> quad, std::span<const double> lin,
                                     double floor = kDefaultAlphaFloor);

Membership e_step_mm(const SparseNetwork& network, const VariationalState& state,
                     double floor = kDefaultAlphaFloor);
Membership e_step_fp(const SparseNetwork& network, const VariationalState& state,
                     double floor = kDefaultAlphaFloor);

Eigen::VectorXd m_step_gamma(const Membership& alpha);

// Blocks with zero pair weight become uniform and are reported in
// `empty_blocks` as k * K + l.
TabularBlockModel m_step_pi_tabular(const BlockDyadStats& stats, const DyadAlphabet& alphabet,
                                    std::vector<int>* empty_blocks = nullptr);

// Gradient and Hessian of the bound in theta (the membership terms are
// constant in theta).
WeightedLogLik lb_theta_derivatives(const BlockDyadStats& stats, const ExpFamBlockModel& model);

NewtonResult m_step_theta_newton(const BlockDyadStats& stats, const ExpFamBlockModel& model,
                                 const Eigen::VectorXd& theta_init,
                                 const NewtonOptions& options = {});

std::vector<int> hard_assignment(const Membership& alpha);

// Random restarts, each opened with an M-step on init_random memberships.
FitResult fit(const SparseNetwork& network, const DyadModel& model, const FitConfig& config);

// Single run from given memberships, opened with an M-step.
FitResult fit_from_alpha(const SparseNetwork& network, const DyadModel& model, Membership alpha,
                         const FitConfig& config);

}  // namespace blockmix
