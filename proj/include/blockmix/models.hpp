#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "blockmix/alphabet.hpp"
#include "blockmix/errors.hpp"

namespace blockmix {

// log pi_{d;kl} for every ordered block pair (k, l) and dyad value d.
struct LogProbTable {
  int K = 0;
  int D = 0;
  std::vector<double> values;  // ((k * K) + l) * D + d

  double operator()(int k, int l, int d) const { return values[(k * K + l) * D + d]; }
  const double* block(int k, int l) const { return values.data() + (k * K + l) * D; }
};

// Nonnegative weights w[k, l, d] over canonical block pairs k <= l.
// Entries with k > l are unused.
struct DyadWeights {
  DyadWeights() = default;
  DyadWeights(int K, int D) : K(K), D(D), w(static_cast<std::size_t>(K) * K * D, 0.0) {}

  int K = 0;
  int D = 0;
  std::vector<double> w;

  double operator()(int k, int l, int d) const { return w[(k * K + l) * D + d]; }
  double& at(int k, int l, int d) { return w[(k * K + l) * D + d]; }
  double total(int k, int l) const;
};

// Unconstrained block model: pi_{d;kl} stored for all ordered (k, l).
class TabularBlockModel {
 public:
  // `pi` is indexed ((k * K) + l) * D + d over all ordered pairs. Rows must
  // sum to one, lie in [0, 1], and satisfy pi[(a,b),k,l] = pi[(b,a),l,k].
  TabularBlockModel(int K, DyadAlphabet alphabet, std::vector<double> pi);

  // Fills the k > l half from the transpose of the canonical k <= l half.
  static TabularBlockModel from_canonical(int K, DyadAlphabet alphabet,
                                          const std::vector<double>& canonical);
  static TabularBlockModel uniform(int K, DyadAlphabet alphabet);

  int K() const { return K_; }
  const DyadAlphabet& alphabet() const { return alphabet_; }
  double pi(int k, int l, int d) const { return pi_[(k * K_ + l) * alphabet_.size() + d]; }
  const std::vector<double>& table() const { return pi_; }
  double log_prob(int k, int l, int d) const;
  LogProbTable log_probs() const;

  // Canonical parameters pi[k<=l, d], in (k, l, d) order.
  std::vector<double> parameter_vector() const;
  std::vector<std::string> parameter_names() const;

 private:
  int K_;
  DyadAlphabet alphabet_;
  std::vector<double> pi_;
};

struct BlockMoment {
  double log_norm = 0.0;  // psi_kl(theta)
  Eigen::VectorXd mean;   // E_theta[t_kl(D)]
  Eigen::MatrixXd cov;    // Cov_theta[t_kl(D)]
};

struct BlockMoments {
  int K = 0;
  std::vector<BlockMoment> blocks;  // k * K + l

  const BlockMoment& operator()(int k, int l) const { return blocks[k * K + l]; }
};

// pi_{d;kl}(theta) = exp[theta^T t_kl(d) - psi_kl(theta)] with dense
// statistic tables t_kl(d) over every ordered (k, l).
class ExpFamBlockModel {
 public:
  // `stats` is indexed (((k * K) + l) * D + d) * p + c. Masked coordinates
  // keep their value in `theta` and are never optimized.
  ExpFamBlockModel(std::string kind, int K, DyadAlphabet alphabet, int p, std::vector<double> stats,
                   Eigen::VectorXd theta, std::vector<bool> fixed_mask,
                   std::vector<std::string> names = {});

  const std::string& kind() const { return kind_; }
  int K() const { return K_; }
  const DyadAlphabet& alphabet() const { return alphabet_; }
  int dim() const { return p_; }
  int free_dim() const;
  std::vector<int> free_indices() const;

  const Eigen::VectorXd& theta() const { return theta_; }
  const std::vector<bool>& fixed_mask() const { return fixed_; }
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<double>& stat_table() const { return stats_; }
  std::span<const double> stat(int k, int l, int d) const {
    return {stats_.data() + ((k * K_ + l) * alphabet_.size() + d) * p_,
            static_cast<std::size_t>(p_)};
  }

  // Copy with new parameters; masked coordinates must be unchanged.
  ExpFamBlockModel with_theta(const Eigen::VectorXd& theta) const;

  double log_prob(int k, int l, int d) const;
  double log_norm(int k, int l) const;
  LogProbTable log_probs() const;
  BlockMoments moments() const;

 private:
  std::string kind_;
  int K_;
  DyadAlphabet alphabet_;
  int p_;
  std::vector<double> stats_;
  Eigen::VectorXd theta_;
  std::vector<bool> fixed_;
  std::vector<std::string> names_;
};

using DyadModel = std::variant<TabularBlockModel, ExpFamBlockModel>;

int model_components(const DyadModel& model);
const DyadAlphabet& model_alphabet(const DyadModel& model);
double dyad_log_prob(const DyadModel& model, int k, int l, int d);
LogProbTable log_prob_table(const DyadModel& model);
TabularBlockModel to_tabular(const DyadModel& model);
std::vector<double> parameter_vector(const DyadModel& model);
std::vector<std::string> parameter_names(const DyadModel& model);

// Mixture-p1: theta = (rho, send_0, recv_0, ..., send_{K-1}, recv_{K-1}).
// recv_0 is masked because the likelihood is invariant to
// send_k += c, recv_k -= c for all k.
ExpFamBlockModel build_p1_mixture(int K, const DyadAlphabet& alphabet);

// Excess-trust model over the signed directed alphabet:
// theta = (neg, pos, neg_neg, pos_pos, trust_0, ..., trust_{K-1}) with
// `pos` masked at zero.
ExpFamBlockModel build_excess_trust(int K);

// One indicator coordinate per canonical (k <= l, nonbaseline d) cell, with
// diagonal blocks sharing a coordinate between d and transpose(d).
ExpFamBlockModel build_saturated(int K, const DyadAlphabet& alphabet);

// Sum over k <= l, d of w * log pi_{d;kl}(theta), and its derivatives.
struct WeightedLogLik {
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};
double weighted_loglik(const ExpFamBlockModel& model, const DyadWeights& weights);
WeightedLogLik weighted_loglik_derivatives(const ExpFamBlockModel& model,
                                           const DyadWeights& weights);

struct NewtonOptions {
  int max_iters = 100;
  double grad_tol = 1e-10;
  int max_halvings = 60;
};

struct NewtonResult {
  Eigen::VectorXd theta;
  int iterations = 0;
  double grad_max = 0.0;  // over free coordinates
  bool converged = false;
  bool gradient_fallback = false;
  double value = 0.0;
};

// Damped Newton ascent of weighted_loglik over the free coordinates.
NewtonResult maximize_weighted_loglik(const ExpFamBlockModel& model, const DyadWeights& weights,
                                      const Eigen::VectorXd& theta_init,
                                      const NewtonOptions& options = {});

struct NonIdentifiableError : Error {
  NonIdentifiableError(const std::string& what, Eigen::VectorXd direction)
      : Error(what), direction(std::move(direction)) {}
  Eigen::VectorXd direction;
};

struct InversionResult {
  Eigen::VectorXd theta;
  int iterations = 0;
  // max-norm gap between aggregated target and fitted block means
  double mean_residual = 0.0;
};

// Natural parameters whose block means best match a tabular target:
// maximizes theta^T mu_hat - sum_{k<=l} w_kl psi_kl(theta). `block_weights`
// is indexed k * K + l (k <= l); empty means all ones.
InversionResult invert_mean_parameters(const TabularBlockModel& target,
                                       const ExpFamBlockModel& family,
                                       const std::vector<double>& block_weights = {});

}  // namespace blockmix
