#include "blockmix/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace blockmix {
namespace {

constexpr double kSumTol = 1e-12;

void check_components(int K) {
  if (K < 1) throw DomainError("K must be at least 1");
}

}  // namespace

double DyadWeights::total(int k, int l) const {
  double s = 0.0;
  for (int d = 0; d < D; ++d) s += (*this)(k, l, d);
  return s;
}

// ---------------------------------------------------------------------------
// Tabular

TabularBlockModel::TabularBlockModel(int K, DyadAlphabet alphabet, std::vector<double> pi)
    : K_(K), alphabet_(std::move(alphabet)), pi_(std::move(pi)) {
  check_components(K_);
  const int D = alphabet_.size();
  if (pi_.size() != static_cast<std::size_t>(K_) * K_ * D)
    throw DomainError("pi table has the wrong size");
  for (int k = 0; k < K_; ++k) {
    for (int l = 0; l < K_; ++l) {
      double sum = 0.0;
      for (int d = 0; d < D; ++d) {
        const double p = this->pi(k, l, d);
        if (!(p >= 0.0 && p <= 1.0)) throw DomainError("pi entries must lie in [0, 1]");
        if (std::abs(p - this->pi(l, k, alphabet_.transpose(d))) > kSumTol)
          throw DomainError("pi table violates transpose symmetry");
        sum += p;
      }
      if (std::abs(sum - 1.0) > kSumTol)
        throw DomainError("pi[.; " + std::to_string(k) + "," + std::to_string(l) +
                          "] does not sum to one");
    }
  }
}

TabularBlockModel TabularBlockModel::from_canonical(int K, DyadAlphabet alphabet,
                                                    const std::vector<double>& canonical) {
  check_components(K);
  const int D = alphabet.size();
  if (canonical.size() != static_cast<std::size_t>(K) * (K + 1) / 2 * D)
    throw DomainError("canonical pi table has the wrong size");
  std::vector<double> full(static_cast<std::size_t>(K) * K * D);
  std::size_t pos = 0;
  for (int k = 0; k < K; ++k) {
    for (int l = k; l < K; ++l) {
      for (int d = 0; d < D; ++d) {
        const double p = canonical[pos++];
        full[(k * K + l) * D + d] = p;
        full[(l * K + k) * D + alphabet.transpose(d)] = p;
      }
    }
  }
  return TabularBlockModel(K, std::move(alphabet), std::move(full));
}

TabularBlockModel TabularBlockModel::uniform(int K, DyadAlphabet alphabet) {
  check_components(K);
  const int D = alphabet.size();
  return TabularBlockModel(K, std::move(alphabet),
                           std::vector<double>(static_cast<std::size_t>(K) * K * D, 1.0 / D));
}

double TabularBlockModel::log_prob(int k, int l, int d) const {
  if (k < 0 || l < 0 || k >= K_ || l >= K_ || d < 0 || d >= alphabet_.size())
    throw DomainError("index out of range");
  return std::log(pi(k, l, d));
}

LogProbTable TabularBlockModel::log_probs() const {
  LogProbTable table{K_, alphabet_.size(), std::vector<double>(pi_.size())};
  std::transform(pi_.begin(), pi_.end(), table.values.begin(),
                 [](double p) { return std::log(p); });
  return table;
}

std::vector<double> TabularBlockModel::parameter_vector() const {
  std::vector<double> out;
  for (int k = 0; k < K_; ++k)
    for (int l = k; l < K_; ++l)
      for (int d = 0; d < alphabet_.size(); ++d) out.push_back(pi(k, l, d));
  return out;
}

std::vector<std::string> TabularBlockModel::parameter_names() const {
  std::vector<std::string> out;
  for (int k = 0; k < K_; ++k)
    for (int l = k; l < K_; ++l)
      for (int d = 0; d < alphabet_.size(); ++d) {
        auto [a, b] = alphabet_.labels(d);
        std::string dyad = alphabet_.directed()
                               ? "(" + std::to_string(a) + "," + std::to_string(b) + ")"
                               : std::to_string(a);
        out.push_back("pi[" + dyad + ";" + std::to_string(k) + "," + std::to_string(l) + "]");
      }
  return out;
}

// ---------------------------------------------------------------------------
// Exponential family

ExpFamBlockModel::ExpFamBlockModel(std::string kind, int K, DyadAlphabet alphabet, int p,
                                   std::vector<double> stats, Eigen::VectorXd theta,
                                   std::vector<bool> fixed_mask, std::vector<std::string> names)
    : kind_(std::move(kind)),
      K_(K),
      alphabet_(std::move(alphabet)),
      p_(p),
      stats_(std::move(stats)),
      theta_(std::move(theta)),
      fixed_(std::move(fixed_mask)),
      names_(std::move(names)) {
  check_components(K_);
  const int D = alphabet_.size();
  if (p_ < 1) throw DomainError("parameter dimension must be positive");
  if (stats_.size() != static_cast<std::size_t>(K_) * K_ * D * p_)
    throw DomainError("statistic table has the wrong size");
  if (theta_.size() != p_) throw DomainError("theta has the wrong length");
  if (fixed_.empty()) fixed_.assign(p_, false);
  if (fixed_.size() != static_cast<std::size_t>(p_)) throw DomainError("mask has the wrong length");
  if (names_.empty())
    for (int c = 0; c < p_; ++c) names_.push_back("theta[" + std::to_string(c) + "]");
  if (names_.size() != static_cast<std::size_t>(p_)) throw DomainError("wrong number of names");
  if (!theta_.allFinite()) throw DomainError("theta must be finite");
  for (double v : stats_)
    if (!std::isfinite(v)) throw DomainError("statistic tables must be finite");
  for (int k = 0; k < K_; ++k)
    for (int l = 0; l < K_; ++l)
      for (int d = 0; d < D; ++d) {
        auto a = stat(k, l, d);
        auto b = stat(l, k, alphabet_.transpose(d));
        for (int c = 0; c < p_; ++c)
          if (std::abs(a[c] - b[c]) > 1e-12)
            throw DomainError("statistic tables violate t_kl(d) = t_lk(transpose(d))");
      }
}

int ExpFamBlockModel::free_dim() const {
  return static_cast<int>(std::count(fixed_.begin(), fixed_.end(), false));
}

std::vector<int> ExpFamBlockModel::free_indices() const {
  std::vector<int> out;
  for (int c = 0; c < p_; ++c)
    if (!fixed_[c]) out.push_back(c);
  return out;
}

ExpFamBlockModel ExpFamBlockModel::with_theta(const Eigen::VectorXd& theta) const {
  if (theta.size() != p_) throw DomainError("theta has the wrong length");
  for (int c = 0; c < p_; ++c)
    if (fixed_[c] && theta[c] != theta_[c]) throw DomainError("masked coordinate changed");
  ExpFamBlockModel copy = *this;
  copy.theta_ = theta;
  if (!copy.theta_.allFinite()) throw DomainError("theta must be finite");
  return copy;
}

namespace {

// Natural-parameter evaluation over one block: logits, log-normalizer,
// probabilities. Shared by every ExpFam routine below.
struct BlockEval {
  std::vector<double> logit;
  std::vector<double> prob;
  double log_norm = 0.0;
};

BlockEval eval_block(const std::vector<double>& stats, const Eigen::VectorXd& theta, int K, int D,
                     int p, int k, int l) {
  BlockEval e;
  e.logit.resize(D);
  e.prob.resize(D);
  const double* t = stats.data() + static_cast<std::size_t>(k * K + l) * D * p;
  double hi = -std::numeric_limits<double>::infinity();
  for (int d = 0; d < D; ++d) {
    double s = 0.0;
    for (int c = 0; c < p; ++c) s += theta[c] * t[d * p + c];
    e.logit[d] = s;
    hi = std::max(hi, s);
  }
  double z = 0.0;
  for (int d = 0; d < D; ++d) z += std::exp(e.logit[d] - hi);
  e.log_norm = hi + std::log(z);
  for (int d = 0; d < D; ++d) e.prob[d] = std::exp(e.logit[d] - e.log_norm);
  return e;
}

}  // namespace

double ExpFamBlockModel::log_norm(int k, int l) const {
  if (k < 0 || l < 0 || k >= K_ || l >= K_) throw DomainError("index out of range");
  return eval_block(stats_, theta_, K_, alphabet_.size(), p_, k, l).log_norm;
}

double ExpFamBlockModel::log_prob(int k, int l, int d) const {
  if (k < 0 || l < 0 || k >= K_ || l >= K_ || d < 0 || d >= alphabet_.size())
    throw DomainError("index out of range");
  auto e = eval_block(stats_, theta_, K_, alphabet_.size(), p_, k, l);
  return e.logit[d] - e.log_norm;
}

LogProbTable ExpFamBlockModel::log_probs() const {
  const int D = alphabet_.size();
  LogProbTable table{K_, D, std::vector<double>(static_cast<std::size_t>(K_) * K_ * D)};
  for (int k = 0; k < K_; ++k)
    for (int l = 0; l < K_; ++l) {
      auto e = eval_block(stats_, theta_, K_, D, p_, k, l);
      for (int d = 0; d < D; ++d) table.values[(k * K_ + l) * D + d] = e.logit[d] - e.log_norm;
    }
  return table;
}

BlockMoments ExpFamBlockModel::moments() const {
  const int D = alphabet_.size();
  BlockMoments out{K_, {}};
  out.blocks.reserve(static_cast<std::size_t>(K_) * K_);
  for (int k = 0; k < K_; ++k)
    for (int l = 0; l < K_; ++l) {
      auto e = eval_block(stats_, theta_, K_, D, p_, k, l);
      BlockMoment m;
      m.log_norm = e.log_norm;
      m.mean = Eigen::VectorXd::Zero(p_);
      m.cov = Eigen::MatrixXd::Zero(p_, p_);
      for (int d = 0; d < D; ++d) m.mean += e.prob[d] * Eigen::Map<const Eigen::VectorXd>(stat(k, l, d).data(), p_);
      for (int d = 0; d < D; ++d) {
        Eigen::VectorXd c = Eigen::Map<const Eigen::VectorXd>(stat(k, l, d).data(), p_) - m.mean;
        m.cov.noalias() += e.prob[d] * c * c.transpose();
      }
      out.blocks.push_back(std::move(m));
    }
  return out;
}

// ---------------------------------------------------------------------------
// Variant helpers

int model_components(const DyadModel& model) {
  return std::visit([](const auto& m) { return m.K(); }, model);
}

const DyadAlphabet& model_alphabet(const DyadModel& model) {
  return std::visit([](const auto& m) -> const DyadAlphabet& { return m.alphabet(); }, model);
}

double dyad_log_prob(const DyadModel& model, int k, int l, int d) {
  return std::visit([&](const auto& m) { return m.log_prob(k, l, d); }, model);
}

LogProbTable log_prob_table(const DyadModel& model) {
  return std::visit([](const auto& m) { return m.log_probs(); }, model);
}

TabularBlockModel to_tabular(const DyadModel& model) {
  if (auto* tab = std::get_if<TabularBlockModel>(&model)) return *tab;
  const auto& ef = std::get<ExpFamBlockModel>(model);
  auto table = ef.log_probs();
  std::vector<double> pi(table.values.size());
  std::transform(table.values.begin(), table.values.end(), pi.begin(),
                 [](double v) { return std::exp(v); });
  // Renormalize each block so rounding in exp() cannot trip the sum check.
  const int D = ef.alphabet().size();
  for (std::size_t b = 0; b < pi.size() / D; ++b) {
    double s = 0.0;
    for (int d = 0; d < D; ++d) s += pi[b * D + d];
    for (int d = 0; d < D; ++d) pi[b * D + d] /= s;
  }
  return TabularBlockModel(ef.K(), ef.alphabet(), std::move(pi));
}

std::vector<double> parameter_vector(const DyadModel& model) {
  if (auto* tab = std::get_if<TabularBlockModel>(&model)) return tab->parameter_vector();
  const auto& theta = std::get<ExpFamBlockModel>(model).theta();
  return {theta.data(), theta.data() + theta.size()};
}

std::vector<std::string> parameter_names(const DyadModel& model) {
  if (auto* tab = std::get_if<TabularBlockModel>(&model)) return tab->parameter_names();
  return std::get<ExpFamBlockModel>(model).names();
}

// ---------------------------------------------------------------------------
// Builders

ExpFamBlockModel build_p1_mixture(int K, const DyadAlphabet& alphabet) {
  check_components(K);
  if (!alphabet.directed()) throw UnsupportedError("mixture-p1 needs a directed alphabet");
  const auto& edges = alphabet.edges();
  if (!(edges == EdgeAlphabet::binary() || edges.is_signed()))
    throw UnsupportedError("mixture-p1 needs a binary or signed edge alphabet");
  const int D = alphabet.size();
  const int p = 1 + 2 * K;
  std::vector<double> stats(static_cast<std::size_t>(K) * K * D * p, 0.0);
  for (int k = 0; k < K; ++k)
    for (int l = 0; l < K; ++l)
      for (int d = 0; d < D; ++d) {
        auto [a, b] = alphabet.labels(d);
        double* t = stats.data() + ((k * K + l) * D + d) * p;
        t[0] = a * b;
        t[1 + 2 * k] += a;
        t[2 + 2 * k] += b;
        t[1 + 2 * l] += b;
        t[2 + 2 * l] += a;
      }
  std::vector<std::string> names{"reciprocity"};
  for (int k = 0; k < K; ++k) {
    names.push_back("send[" + std::to_string(k) + "]");
    names.push_back("receive[" + std::to_string(k) + "]");
  }
  std::vector<bool> mask(p, false);
  mask[2] = true;
  return ExpFamBlockModel("p1", K, alphabet, p, std::move(stats), Eigen::VectorXd::Zero(p),
                          std::move(mask), std::move(names));
}

ExpFamBlockModel build_excess_trust(int K) {
  check_components(K);
  DyadAlphabet alphabet(EdgeAlphabet::signed_ratings(), true);
  const int D = alphabet.size();
  const int p = 4 + K;
  std::vector<double> stats(static_cast<std::size_t>(K) * K * D * p, 0.0);
  for (int k = 0; k < K; ++k)
    for (int l = 0; l < K; ++l)
      for (int d = 0; d < D; ++d) {
        auto [a, b] = alphabet.labels(d);
        double* t = stats.data() + ((k * K + l) * D + d) * p;
        t[0] = (a == -1) + (b == -1);
        t[1] = (a == 1) + (b == 1);
        t[2] = (a == -1) * (b == -1);
        t[3] = (a == 1) * (b == 1);
        t[4 + k] += b;
        t[4 + l] += a;
      }
  std::vector<std::string> names{"negative", "positive", "negative_reciprocity",
                                 "positive_reciprocity"};
  for (int k = 0; k < K; ++k) names.push_back("trust[" + std::to_string(k) + "]");
  std::vector<bool> mask(p, false);
  mask[1] = true;
  return ExpFamBlockModel("excess-trust", K, alphabet, p, std::move(stats),
                          Eigen::VectorXd::Zero(p), std::move(mask), std::move(names));
}

ExpFamBlockModel build_saturated(int K, const DyadAlphabet& alphabet) {
  check_components(K);
  const int D = alphabet.size();
  const int b = alphabet.baseline();
  // coordinate index for each canonical (k <= l, d)
  std::map<std::tuple<int, int, int>, int> coord;
  std::vector<std::string> names;
  for (int k = 0; k < K; ++k)
    for (int l = k; l < K; ++l)
      for (int d = 0; d < D; ++d) {
        if (d == b) continue;
        if (k == l && alphabet.transpose(d) < d) continue;
        coord[{k, l, d}] = static_cast<int>(names.size());
        names.push_back("sat[" + std::to_string(k) + "," + std::to_string(l) + "," +
                        std::to_string(d) + "]");
      }
  const int p = std::max<int>(1, static_cast<int>(names.size()));
  if (names.empty()) names.push_back("unused");
  std::vector<double> stats(static_cast<std::size_t>(K) * K * D * p, 0.0);
  auto set = [&](int k, int l, int d, int c) { stats[((k * K + l) * D + d) * p + c] = 1.0; };
  for (const auto& [key, c] : coord) {
    auto [k, l, d] = key;
    set(k, l, d, c);
    set(l, k, alphabet.transpose(d), c);
    if (k == l) {
      set(k, k, alphabet.transpose(d), c);
    }
  }
  std::vector<bool> mask(p, coord.empty());
  return ExpFamBlockModel("saturated", K, alphabet, p, std::move(stats), Eigen::VectorXd::Zero(p),
                          std::move(mask), std::move(names));
}

// ---------------------------------------------------------------------------
// Weighted log-likelihood and Newton ascent

double weighted_loglik(const ExpFamBlockModel& model, const DyadWeights& weights) {
  const int K = model.K();
  const int D = model.alphabet().size();
  double value = 0.0;
  for (int k = 0; k < K; ++k)
    for (int l = k; l < K; ++l) {
      auto e = eval_block(model.stat_table(), model.theta(), K, D, model.dim(), k, l);
      for (int d = 0; d < D; ++d) {
        const double w = weights(k, l, d);
        if (w != 0.0) value += w * (e.logit[d] - e.log_norm);
      }
    }
  return value;
}

WeightedLogLik weighted_loglik_derivatives(const ExpFamBlockModel& model,
                                           const DyadWeights& weights) {
  const int K = model.K();
  const int D = model.alphabet().size();
  const int p = model.dim();
  WeightedLogLik out;
  out.gradient = Eigen::VectorXd::Zero(p);
  out.hessian = Eigen::MatrixXd::Zero(p, p);
  for (int k = 0; k < K; ++k)
    for (int l = k; l < K; ++l) {
      auto e = eval_block(model.stat_table(), model.theta(), K, D, p, k, l);
      double total = 0.0;
      Eigen::VectorXd mean = Eigen::VectorXd::Zero(p);
      for (int d = 0; d < D; ++d) {
        Eigen::Map<const Eigen::VectorXd> t(model.stat(k, l, d).data(), p);
        const double w = weights(k, l, d);
        if (w != 0.0) {
          out.value += w * (e.logit[d] - e.log_norm);
          out.gradient += w * t;
          total += w;
        }
        mean += e.prob[d] * t;
      }
      if (total == 0.0) continue;
      out.gradient -= total * mean;
      for (int d = 0; d < D; ++d) {
        Eigen::VectorXd c = Eigen::Map<const Eigen::VectorXd>(model.stat(k, l, d).data(), p) - mean;
        out.hessian.noalias() -= (total * e.prob[d]) * c * c.transpose();
      }
    }
  return out;
}

NewtonResult maximize_weighted_loglik(const ExpFamBlockModel& model, const DyadWeights& weights,
                                      const Eigen::VectorXd& theta_init,
                                      const NewtonOptions& options) {
  const auto free = model.free_indices();
  const int q = static_cast<int>(free.size());
  NewtonResult result;
  ExpFamBlockModel current = model.with_theta(theta_init);
  result.theta = theta_init;

  auto free_grad_max = [&](const Eigen::VectorXd& g) {
    double m = 0.0;
    for (int c : free) m = std::max(m, std::abs(g[c]));
    return m;
  };

  for (int iter = 0;; ++iter) {
    auto der = weighted_loglik_derivatives(current, weights);
    result.value = der.value;
    result.grad_max = free_grad_max(der.gradient);
    result.iterations = iter;
    if (q == 0 || result.grad_max < options.grad_tol) {
      result.converged = true;
      break;
    }
    if (iter >= options.max_iters) break;

    Eigen::VectorXd g(q);
    Eigen::MatrixXd info(q, q);
    for (int a = 0; a < q; ++a) {
      g[a] = der.gradient[free[a]];
      for (int b = 0; b < q; ++b) info(a, b) = -der.hessian(free[a], free[b]);
    }
    Eigen::VectorXd step;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    bool newton_ok = ldlt.info() == Eigen::Success && ldlt.isPositive();
    if (newton_ok) {
      step = ldlt.solve(g);
      const double min_pivot = ldlt.vectorD().minCoeff();
      const double max_pivot = ldlt.vectorD().maxCoeff();
      newton_ok = step.allFinite() && step.dot(g) > 0.0 && min_pivot > 1e-14 * max_pivot;
    }
    if (!newton_ok) {
      result.gradient_fallback = true;
      const double scale = 1.0 + info.diagonal().cwiseAbs().maxCoeff();
      step = g / scale;
    }

    // Halve until the objective does not decrease (rounding slack only).
    const double slack = 4.0 * std::numeric_limits<double>::epsilon() * std::abs(der.value);
    double t = 1.0;
    bool accepted = false;
    for (int h = 0; h <= options.max_halvings; ++h, t *= 0.5) {
      Eigen::VectorXd cand = current.theta();
      for (int a = 0; a < q; ++a) cand[free[a]] += t * step[a];
      if (!cand.allFinite()) continue;
      ExpFamBlockModel trial = current.with_theta(cand);
      const double v = weighted_loglik(trial, weights);
      if (v >= der.value - slack) {
        current = std::move(trial);
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    result.theta = current.theta();
  }
  result.theta = current.theta();
  return result;
}

// ---------------------------------------------------------------------------
// Duality inversion

InversionResult invert_mean_parameters(const TabularBlockModel& target,
                                       const ExpFamBlockModel& family,
                                       const std::vector<double>& block_weights) {
  const int K = target.K();
  const int D = target.alphabet().size();
  if (family.K() != K || !(family.alphabet() == target.alphabet()))
    throw DomainError("target and family disagree on K or alphabet");
  for (double p : target.table())
    if (!(p > 0.0)) throw DomainError("target probabilities must be strictly positive");
  if (!block_weights.empty() && block_weights.size() != static_cast<std::size_t>(K) * K)
    throw DomainError("block weights must have K*K entries");

  DyadWeights w(K, D);
  for (int k = 0; k < K; ++k)
    for (int l = k; l < K; ++l) {
      const double wk = block_weights.empty() ? 1.0 : block_weights[k * K + l];
      if (!(wk >= 0.0)) throw DomainError("block weights must be nonnegative");
      for (int d = 0; d < D; ++d) w.at(k, l, d) = wk * target.pi(k, l, d);
    }

  Eigen::VectorXd start = family.theta();
  for (int c : family.free_indices()) start[c] = 0.0;
  ExpFamBlockModel at_start = family.with_theta(start);

  // Curvature of psi does not depend on the target, so singularity at the
  // start point means the free coordinates are not identifiable.
  const auto free = family.free_indices();
  const int q = static_cast<int>(free.size());
  if (q > 0) {
    auto der = weighted_loglik_derivatives(at_start, w);
    Eigen::MatrixXd info(q, q);
    for (int a = 0; a < q; ++a)
      for (int b = 0; b < q; ++b) info(a, b) = -der.hessian(free[a], free[b]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(info);
    const double top = std::max(eig.eigenvalues().maxCoeff(), 1e-300);
    if (eig.eigenvalues()[0] <= 1e-10 * top) {
      Eigen::VectorXd dir = Eigen::VectorXd::Zero(family.dim());
      for (int a = 0; a < q; ++a) dir[free[a]] = eig.eigenvectors()(a, 0);
      throw NonIdentifiableError("family is not identifiable: aggregated covariance is singular",
                                 std::move(dir));
    }
  }

  NewtonOptions options;
  options.max_iters = 200;
  options.grad_tol = 1e-12;
  auto fit = maximize_weighted_loglik(family, w, start, options);

  InversionResult out;
  out.theta = fit.theta;
  out.iterations = fit.iterations;
  out.mean_residual = fit.grad_max;
  return out;
}

}  // namespace blockmix
