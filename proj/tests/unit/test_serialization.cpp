#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <random>

#include "doctest.h"
#include "oracles.hpp"

#include "blockmix/serialization.hpp"

using namespace blockmix;

namespace {

const DyadAlphabet kSignedDirected(EdgeAlphabet::signed_ratings(), true);

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("blockmix_test_" + name)).string();
}

}  // namespace

TEST_CASE("alphabet JSON round trip") {
  for (bool directed : {true, false}) {
    const DyadAlphabet alph(EdgeAlphabet({-1, 0, 1, 2}, 0), directed);
    auto j = alphabet_to_json(alph);
    CHECK(j["dyads"].size() == static_cast<std::size_t>(alph.size()));
    CHECK(alphabet_from_json(j) == alph);
  }
}

TEST_CASE("tabular model JSON round trip is exact") {
  std::mt19937_64 rng(1);
  auto tab = oracle::random_tabular(rng, 3, kSignedDirected);
  const Eigen::VectorXd gamma = Eigen::Vector3d(0.2, 0.3, 0.5);
  const Json j = model_to_json(tab, &gamma);
  auto spec = model_from_json(Json::parse(j.dump()));
  REQUIRE(spec.gamma);
  CHECK(*spec.gamma == gamma);
  const auto& back = std::get<TabularBlockModel>(spec.model);
  CHECK(back.table() == tab.table());
}

TEST_CASE("exponential-family model JSON round trip") {
  auto p1 = build_p1_mixture(2, kSignedDirected);
  Eigen::VectorXd theta = p1.theta();
  theta[0] = 0.7;
  theta[1] = -1.25;
  auto m = p1.with_theta(theta);
  auto spec = model_from_json(Json::parse(model_to_json(m).dump()));
  const auto& back = std::get<ExpFamBlockModel>(spec.model);
  CHECK(back.kind() == "p1");
  CHECK(back.theta() == m.theta());
  CHECK(back.fixed_mask() == m.fixed_mask());
  CHECK(back.stat_table() == m.stat_table());
  CHECK_FALSE(spec.gamma);

  std::mt19937_64 rng(2);
  auto custom = oracle::random_expfam(rng, 2, kSignedDirected, 3);
  auto again = model_from_json(Json::parse(model_to_json(custom).dump()));
  CHECK(std::get<ExpFamBlockModel>(again.model).stat_table() == custom.stat_table());
}

TEST_CASE("malformed model documents are rejected") {
  CHECK_THROWS_AS(model_from_json(Json::parse(R"({"kind":"tabular"})")), DomainError);
  CHECK_THROWS_AS(model_from_json(Json::parse(R"({"schema":"other/1","kind":"tabular","K":1})")),
                  DomainError);
  const char* missing = R"({"kind":"tabular","K":2,"alphabet":{"values":[0,1],"directed":false},
    "pi":[{"k":0,"l":0,"p":[0.5,0.5]},{"k":1,"l":1,"p":[0.5,0.5]}]})";
  CHECK_THROWS_AS(model_from_json(Json::parse(missing)), DomainError);
  const char* bad_row = R"({"kind":"tabular","K":1,"alphabet":{"values":[0,1],"directed":false},
    "pi":[{"k":0,"l":0,"p":[0.5,0.6]}]})";
  CHECK_THROWS_AS(model_from_json(Json::parse(bad_row)), DomainError);
}

TEST_CASE("fit result JSON carries the state forward") {
  std::mt19937_64 rng(3);
  auto net = oracle::random_network(rng, 30, kSignedDirected, 0.2);
  FitConfig cfg;
  cfg.max_sweeps = 20;
  auto res = fit(net, TabularBlockModel::uniform(2, kSignedDirected), cfg);
  const Json j = fit_result_to_json(res);
  CHECK(j["schema"] == kFitSchema);
  CHECK(j["lb_trace"].size() == res.lb_trace.size());
  auto saved = saved_fit_from_json(Json::parse(j.dump()));
  CHECK(saved.n == 30);
  CHECK(saved.lb == res.lb);
  CHECK(*saved.spec.gamma == res.state.gamma);
  CHECK(std::get<TabularBlockModel>(saved.spec.model).table() ==
        std::get<TabularBlockModel>(res.state.model).table());
  CHECK_THROWS_AS(saved_fit_from_json(Json::parse(R"({"schema":"blockmix.model/1"})")), DomainError);
}

TEST_CASE("doubles print in shortest round-trip form") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(-2.0) == "-2");
  CHECK(format_double(std::nan("")) == "nan");
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int t = 0; t < 1000; ++t) {
    const double v = u(rng);
    CHECK(std::stod(format_double(v)) == v);
  }
}

TEST_CASE("membership and sample CSV layouts") {
  Membership a(2, 2);
  a << 0.25, 0.75, 1, 0;
  CHECK(membership_csv(a, {1, 0}) == "node_id,alpha_1,alpha_2,hard_assignment\n0,0.25,0.75,1\n1,1,0,0\n");

  BootstrapResult r;
  r.names = {"pi[0,0;0]", "gamma[0]"};
  r.samples = {{0.5, 1.0}};
  r.replicate_seeds = {9};
  r.replicate_lb = {-3.5};
  CHECK(bootstrap_samples_csv(r) == "replicate,seed,lb,\"pi[0,0;0]\",\"gamma[0]\"\n0,9,-3.5,0.5,1\n");
  auto j = bootstrap_to_json(r);
  CHECK(j["B"] == 1);
  CHECK(j["intervals"].empty());
}

TEST_CASE("atomic writes replace the target and leave no temp file") {
  const std::string path = temp_path("atomic.txt");
  write_file_atomic(path, "first");
  write_file_atomic(path, "second\n");
  CHECK(read_text_file(path) == "second\n");
  CHECK_FALSE(std::filesystem::exists(path + ".tmp"));
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_text_file(path), IoError);
  CHECK_THROWS_AS(write_file_atomic("/nonexistent-dir/x/y.txt", "z"), IoError);
}
