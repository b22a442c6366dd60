#include <cmath>

#include "doctest.h"
#include "oracles.hpp"

#include "blockmix/bootstrap.hpp"
#include "blockmix/serialization.hpp"

using namespace blockmix;

namespace {

const DyadAlphabet kBinaryUndirected(EdgeAlphabet::binary(), false);

VariationalState planted_state(double p_in, double p_out, Eigen::VectorXd gamma) {
  const int K = static_cast<int>(gamma.size());
  std::vector<double> canonical;
  for (int k = 0; k < K; ++k)
    for (int l = k; l < K; ++l) {
      const double p = k == l ? p_in : p_out;
      canonical.push_back(1.0 - p);
      canonical.push_back(p);
    }
  return {Membership(0, K), std::move(gamma),
          TabularBlockModel::from_canonical(K, kBinaryUndirected, canonical)};
}

}  // namespace

TEST_CASE("anchored memberships") {
  auto a = anchor_alpha({1, 0, 4}, 5, 1e-10);
  CHECK(a(0, 1) == 1.0 - 4e-10);
  CHECK(a(0, 0) == 1e-10);
  CHECK(a(0, 2) == 1e-10);
  CHECK(a(2, 4) == 1.0 - 4e-10);
  for (int i = 0; i < 3; ++i) CHECK(a.row(i).sum() == doctest::Approx(1.0).epsilon(1e-15));
  auto one = anchor_alpha({0, 0}, 1, 1e-10);
  CHECK((one.array() == 1.0).all());
  CHECK_THROWS_AS(anchor_alpha({2}, 2, 1e-10), DomainError);
  CHECK_THROWS_AS(anchor_alpha({0}, 3, 0.6), DomainError);
}

TEST_CASE("sample quantiles interpolate linearly") {
  const std::vector<double> v{4, 1, 3, 2};
  CHECK(sample_quantile(v, 0.0) == 1.0);
  CHECK(sample_quantile(v, 1.0) == 4.0);
  CHECK(sample_quantile(v, 0.5) == doctest::Approx(2.5));
  CHECK(sample_quantile(v, 0.25) == doctest::Approx(1.75));
  CHECK(sample_quantile({7.0}, 0.3) == 7.0);
  CHECK_THROWS_AS(sample_quantile({}, 0.5), DomainError);
  CHECK_THROWS_AS(sample_quantile(v, 1.5), DomainError);
}

TEST_CASE("bootstrap with no replicates") {
  auto st = planted_state(0.3, 0.02, Eigen::Vector2d(0.5, 0.5));
  BootstrapConfig cfg;
  cfg.B = 0;
  auto r = run_bootstrap(st, 50, cfg);
  CHECK(r.samples.empty());
  CHECK(r.ci.empty());
  CHECK(r.failures.empty());
  CHECK_FALSE(r.warning);
  CHECK(r.names.size() == r.estimate.size());
}

TEST_CASE("bootstrap is deterministic, job-independent, and replicate-local") {
  auto st = planted_state(0.3, 0.02, Eigen::Vector2d(0.35, 0.65));
  BootstrapConfig cfg;
  cfg.B = 6;
  cfg.seed = 5;
  cfg.refit_max_sweeps = 200;
  auto a = run_bootstrap(st, 80, cfg);
  auto b = run_bootstrap(st, 80, cfg);
  cfg.jobs = 3;
  auto c = run_bootstrap(st, 80, cfg);
  CHECK(bootstrap_samples_csv(a) == bootstrap_samples_csv(b));
  CHECK(bootstrap_samples_csv(a) == bootstrap_samples_csv(c));

  cfg.B = 4;
  auto fewer = run_bootstrap(st, 80, cfg);
  for (int r = 0; r < 4; ++r) {
    CHECK(fewer.replicate_seeds[r] == a.replicate_seeds[r]);
    CHECK(fewer.samples[r] == a.samples[r]);
  }
}

TEST_CASE("anchored refits keep the simulated labeling") {
  // unequal weights make a label swap visible in gamma
  auto st = planted_state(0.3, 0.01, Eigen::Vector2d(0.3, 0.7));
  for (bool relabel : {false, true}) {
    BootstrapConfig cfg;
    cfg.B = 10;
    cfg.relabel = relabel;
    cfg.refit_max_sweeps = 300;
    auto r = run_bootstrap(st, 200, cfg);
    const std::size_t g0 = r.names.size() - 2;
    CHECK(r.names[g0] == "gamma[0]");
    for (const auto& row : r.samples) CHECK(row[g0] < 0.5);
    CHECK(r.failures.empty());
  }
}

TEST_CASE("intervals widen with wider levels") {
  auto st = planted_state(0.3, 0.02, Eigen::Vector2d(0.5, 0.5));
  BootstrapConfig cfg;
  cfg.B = 20;
  cfg.refit_max_sweeps = 200;
  cfg.ci_levels = {0.1, 0.9};
  auto narrow = run_bootstrap(st, 60, cfg);
  cfg.ci_levels = {0.025, 0.975};
  auto wide = run_bootstrap(st, 60, cfg);
  REQUIRE(narrow.ci.size() == wide.ci.size());
  for (std::size_t c = 0; c < wide.ci.size(); ++c) {
    CHECK(wide.ci[c].lower <= narrow.ci[c].lower);
    CHECK(wide.ci[c].upper >= narrow.ci[c].upper);
  }
}

TEST_CASE("replicates that hit the sweep cap are reported") {
  auto st = planted_state(0.3, 0.02, Eigen::Vector2d(0.5, 0.5));
  BootstrapConfig cfg;
  cfg.B = 5;
  cfg.refit_max_sweeps = 1;
  cfg.rel_tol = 0.0;
  auto r = run_bootstrap(st, 40, cfg);
  CHECK(r.failures.size() == 5);
  CHECK(r.warning);
  CHECK(r.ci.empty());
  CHECK(r.samples.size() == 5);
}
