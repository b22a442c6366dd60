#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "blockmix/engine.hpp"
#include "blockmix/parallel.hpp"
#include "blockmix/random.hpp"
#include "detail.hpp"

namespace blockmix {
namespace {

struct MStepOutcome {
  Eigen::VectorXd gamma;
  DyadModel model;
  std::vector<int> empty_blocks;
  bool newton_fallback = false;
  bool newton_converged = true;
};

MStepOutcome m_step(const BlockDyadStats& stats, const Membership& alpha, const DyadModel& model,
                    const FitConfig& config) {
  MStepOutcome out{m_step_gamma(alpha), model, {}, false, true};
  if (const auto* tab = std::get_if<TabularBlockModel>(&model)) {
    out.model = m_step_pi_tabular(stats, tab->alphabet(), &out.empty_blocks);
  } else {
    const auto& ef = std::get<ExpFamBlockModel>(model);
    NewtonOptions options;
    options.max_iters = config.newton_max_iters;
    options.grad_tol = config.newton_grad_tol;
    auto res = m_step_theta_newton(stats, ef, ef.theta(), options);
    out.newton_fallback = res.gradient_fallback;
    out.newton_converged = res.converged;
    out.model = ef.with_theta(res.theta);
  }
  return out;
}

bool relative_change_below(double prev, double next, double tol) {
  if (prev == next) return true;
  if (!std::isfinite(prev) || !std::isfinite(next)) return false;
  return std::abs(next - prev) / std::abs(next) < tol;
}

class DiagnosticLog {
 public:
  void note(const std::string& key, const std::string& message) {
    for (const auto& k : keys_)
      if (k == key) return;
    keys_.push_back(key);
    messages_.push_back(message);
  }
  std::vector<std::string> take() { return std::move(messages_); }

 private:
  std::vector<std::string> keys_;
  std::vector<std::string> messages_;
};

void record_m_step(DiagnosticLog& log, const MStepOutcome& m, const BlockDyadStats& stats,
                   std::size_t n, int sweep) {
  for (int k = 0; k < stats.K; ++k) {
    if (stats.col_sum[k] < 1e-8 * static_cast<double>(n)) {
      log.note("empty-component-" + std::to_string(k),
               "component " + std::to_string(k) + " has negligible total membership (first at sweep " +
                   std::to_string(sweep) + ")");
    }
  }
  for (int b : m.empty_blocks) {
    log.note("empty-block-" + std::to_string(b),
             "block pair (" + std::to_string(b / stats.K) + "," + std::to_string(b % stats.K) +
                 ") has zero weight; pi set uniform (first at sweep " + std::to_string(sweep) + ")");
  }
  if (m.newton_fallback)
    log.note("newton-fallback", "singular Hessian in theta M-step; gradient step used");
  if (!m.newton_converged)
    log.note("newton-budget", "theta M-step stopped before reaching the gradient tolerance");
}

void validate(const SparseNetwork& network, const DyadModel& model, const FitConfig& config) {
  const int K = model_components(model);
  if (!(model_alphabet(model) == network.alphabet()))
    throw DomainError("model alphabet does not match the network");
  if (static_cast<std::size_t>(K) > network.n()) throw DomainError("K exceeds the node count");
  if (config.max_sweeps < 0 || config.restarts < 1) throw DomainError("invalid fit configuration");
  if (!(config.rel_tol >= 0.0)) throw DomainError("rel_tol must be nonnegative");
}

}  // namespace

FitResult fit_from_alpha(const SparseNetwork& network, const DyadModel& model, Membership alpha,
                         const FitConfig& config) {
  validate(network, model, config);
  const int K = model_components(model);
  if (static_cast<std::size_t>(alpha.rows()) != network.n() || alpha.cols() != K)
    throw DomainError("initial memberships have the wrong shape");
  detail::floor_rows(alpha, config.alpha_floor);

  DiagnosticLog log;
  if (network.nonbaseline_count() == 0 && std::holds_alternative<ExpFamBlockModel>(model))
    log.note("empty-network", "network has no nonbaseline dyads; fitting a degenerate baseline model");

  auto stats = accumulate_block_stats(network, alpha);
  auto m = m_step(stats, alpha, model, config);
  record_m_step(log, m, stats, network.n(), 0);
  VariationalState state{std::move(alpha), std::move(m.gamma), std::move(m.model)};
  double lb = lower_bound(stats, state.alpha, state.gamma, log_prob_table(state.model));
  const double lb_initial = lb;
  std::vector<double> trace;
  std::vector<double> after_e;
  int sweeps = 0;
  bool converged = config.max_sweeps == 0;

  for (int sweep = 1; sweep <= config.max_sweeps; ++sweep) {
    Membership next = config.e_step == FitConfig::EStep::MM
                          ? detail::e_step_mm(network, state, stats, config.alpha_floor)
                          : detail::e_step_fp(network, state, stats, config.alpha_floor);
    stats = accumulate_block_stats(network, next);
    if (config.record_steps)
      after_e.push_back(lower_bound(stats, next, state.gamma, log_prob_table(state.model)));
    m = m_step(stats, next, state.model, config);
    record_m_step(log, m, stats, network.n(), sweep);
    state = VariationalState{std::move(next), std::move(m.gamma), std::move(m.model)};
    const double lb_next =
        lower_bound(stats, state.alpha, state.gamma, log_prob_table(state.model));
    trace.push_back(lb_next);
    sweeps = sweep;
    const bool done = relative_change_below(lb, lb_next, config.rel_tol);
    lb = lb_next;
    if (done) {
      converged = true;
      break;
    }
  }

  auto assignment = hard_assignment(state.alpha);
  FitResult result{std::move(state), lb, lb_initial, std::move(trace), std::move(after_e),
                   std::move(assignment), sweeps, 0, converged, {lb}, log.take()};
  return result;
}

FitResult fit(const SparseNetwork& network, const DyadModel& model, const FitConfig& config) {
  validate(network, model, config);
  const int K = model_components(model);
  std::vector<std::optional<FitResult>> runs(config.restarts);
  parallel_for(runs.size(), config.jobs, [&](std::size_t r) {
    auto alpha = init_random(network.n(), K, derive_seed(config.seed, 0x7265, r));
    runs[r] = fit_from_alpha(network, model, std::move(alpha), config);
  });

  std::size_t best = 0;
  auto score = [](const FitResult& f) {
    return std::isnan(f.lb) ? -std::numeric_limits<double>::infinity() : f.lb;
  };
  for (std::size_t r = 1; r < runs.size(); ++r)
    if (score(*runs[r]) > score(*runs[best])) best = r;

  std::vector<double> lbs;
  for (const auto& r : runs) lbs.push_back(r->lb);
  FitResult out = std::move(*runs[best]);
  out.restart_index = static_cast<int>(best);
  out.restart_lbs = std::move(lbs);
  return out;
}

}  // namespace blockmix
