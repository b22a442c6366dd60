#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"

#include "blockmix/random.hpp"
#include "blockmix/simulator.hpp"

using namespace blockmix;

namespace {

const DyadAlphabet kSignedDirected(EdgeAlphabet::signed_ratings(), true);
const DyadAlphabet kBinaryUndirected(EdgeAlphabet::binary(), false);

std::string saved(const SparseNetwork& net) {
  std::ostringstream out;
  save_edge_list(net, out);
  return out.str();
}

// |observed - expected| within z standard errors of a Bernoulli mean.
bool within_se(double hits, double trials, double p, double z = 4.0) {
  const double se = std::sqrt(p * (1 - p) / trials);
  return std::abs(hits / trials - p) <= z * se;
}

}  // namespace

TEST_CASE("splitmix64 reference value and derived seeds") {
  CHECK(splitmix64(0) == 0xe220a8397b1dcdafULL);
  CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 2));
  CHECK(derive_seed(1, 2) != derive_seed(2, 2));
}

TEST_CASE("uniform helpers stay in range") {
  Rng rng(1);
  for (int t = 0; t < 10000; ++t) {
    const double u = uniform_open(rng);
    CHECK((u > 0.0 && u < 1.0));
    CHECK(uniform_index(rng, 7) < 7);
  }
  CHECK_THROWS_AS(uniform_index(rng, 0), DomainError);
}

TEST_CASE("binomial sampler moments on both sides of the crossover") {
  Rng rng(2);
  CHECK(sample_binomial(rng, 0, 0.3) == 0);
  CHECK(sample_binomial(rng, 50, 0.0) == 0);
  CHECK(sample_binomial(rng, 50, 1.0) == 50);
  CHECK(sample_binomial(rng, 4000000000ULL, 1.0) == 4000000000ULL);
  CHECK_THROWS_AS(sample_binomial(rng, 5, 1.5), DomainError);
  struct Case {
    std::uint64_t N;
    double p;
  };
  for (auto c : {Case{20, 0.3}, Case{1000, 0.01}, Case{1000, 0.99}, Case{100000, 0.2},
                 Case{1000000000ULL, 2e-8}, Case{1000000000ULL, 1e-4}}) {
    const int reps = 4000;
    double s = 0.0, s2 = 0.0;
    for (int r = 0; r < reps; ++r) {
      const double x = static_cast<double>(sample_binomial(rng, c.N, c.p));
      CHECK(x <= static_cast<double>(c.N));
      s += x;
      s2 += x * x;
    }
    const double mean = static_cast<double>(c.N) * c.p;
    const double var = mean * (1 - c.p);
    CHECK(std::abs(s / reps - mean) <= 4 * std::sqrt(var / reps));
    const double sample_var = (s2 - s * s / reps) / (reps - 1);
    CHECK(sample_var == doctest::Approx(var).epsilon(0.15));
  }
}

TEST_CASE("categorical and multinomial samplers") {
  Rng rng(3);
  const std::vector<double> w{1.0, 0.0, 3.0};
  int counts[3] = {0, 0, 0};
  for (int t = 0; t < 20000; ++t) ++counts[sample_categorical(rng, w)];
  CHECK(counts[1] == 0);
  CHECK(within_se(counts[2], 20000, 0.75));
  const std::vector<double> zero{0.0, 0.0};
  CHECK_THROWS_AS(sample_categorical(rng, zero), DomainError);
  auto m = sample_multinomial(rng, 1000, std::vector<double>{0.2, 0.3, 0.5});
  CHECK(m[0] + m[1] + m[2] == 1000);
}

TEST_CASE("membership sampling") {
  Rng rng(4);
  auto all = sample_memberships(Eigen::Vector2d(1.0, 0.0), 17, rng);
  CHECK(all.block_sizes == std::vector<std::uint64_t>{17, 0});
  auto one = sample_memberships(Eigen::Vector3d(0.2, 0.3, 0.5), 1, rng);
  CHECK(std::count(one.block_sizes.begin(), one.block_sizes.end(), 1u) == 1);

  auto split = sample_memberships(Eigen::Vector3d(0.2, 0.3, 0.5), 100, rng);
  std::size_t pos = 0;
  for (int k = 0; k < 3; ++k)
    for (std::uint64_t c = 0; c < split.block_sizes[k]; ++c) CHECK(split.assignment[pos++] == k);
  CHECK(pos == 100);

  const std::size_t n = 100000;
  double total = 0.0;
  for (int r = 0; r < 200; ++r)
    total += static_cast<double>(sample_memberships(Eigen::Vector2d(0.3, 0.7), n, rng).block_sizes[0]) / n;
  CHECK(std::abs(total / 200 - 0.3) <= 4 * std::sqrt(0.3 * 0.7 / n / 200));
  CHECK_THROWS_AS(sample_memberships(Eigen::Vector2d(0.5, 0.6), 10, rng), DomainError);
}

TEST_CASE("pair counts and decoders") {
  CHECK(block_pair_count(5, 5, true) == 10);
  CHECK(block_pair_count(4, 6, false) == 24);
  CHECK(block_pair_count(1, 1, true) == 0);

  const PairDecoder within(3, 5);
  std::set<std::pair<NodeId, NodeId>> seen;
  for (std::uint64_t x = 0; x < within.pair_count(); ++x) {
    auto [i, j] = within(x);
    CHECK(i < j);
    CHECK((i >= 3 && j < 8));
    seen.insert({i, j});
  }
  CHECK(seen.size() == 10);

  const PairDecoder cross(0, 4, 4, 5);
  seen.clear();
  for (std::uint64_t x = 0; x < cross.pair_count(); ++x) {
    auto [i, j] = cross(x);
    CHECK(i < 4);
    CHECK((j >= 4 && j < 9));
    seen.insert({i, j});
  }
  CHECK(seen.size() == 20);
  CHECK_THROWS_AS(cross(20), DomainError);
  CHECK_THROWS_AS(PairDecoder(4, 5, 0, 4), DomainError);

  // a huge within-block decoder still unranks near the end
  const PairDecoder big(0, 200000);
  auto [i, j] = big(big.pair_count() - 1);
  CHECK(i < j);
  CHECK(j == 199999);
}

TEST_CASE("Floyd sampling draws distinct indices") {
  Rng rng(5);
  auto all = floyd_sample(10, 10, rng);
  std::sort(all.begin(), all.end());
  for (std::uint64_t x = 0; x < 10; ++x) CHECK(all[x] == x);
  CHECK(floyd_sample(10, 0, rng).empty());
  CHECK_THROWS_AS(floyd_sample(3, 4, rng), DomainError);
  auto some = floyd_sample(1000000000000ULL, 1000, rng);
  CHECK(std::set<std::uint64_t>(some.begin(), some.end()).size() == 1000);
}

TEST_CASE("distinct pair sampling is exhaustive and uniform") {
  Rng rng(6);
  const PairDecoder cross(0, 4, 4, 5);
  auto every = sample_distinct_pairs(20, 20, cross, rng);
  CHECK(std::set<std::pair<NodeId, NodeId>>(every.begin(), every.end()).size() == 20);
  CHECK(sample_distinct_pairs(20, 0, cross, rng).empty());

  std::map<std::pair<NodeId, NodeId>, int> hits;
  const int reps = 100000;
  for (int r = 0; r < reps; ++r) {
    auto pairs = sample_distinct_pairs(20, 3, cross, rng);
    REQUIRE(std::set<std::pair<NodeId, NodeId>>(pairs.begin(), pairs.end()).size() == 3);
    for (auto p : pairs) ++hits[p];
  }
  REQUIRE(hits.size() == 20);
  for (const auto& [pair, count] : hits) CHECK(within_se(count, reps, 3.0 / 20));
}

TEST_CASE("simulation with an all-baseline model is empty") {
  const TabularBlockModel none(2, kSignedDirected, [] {
    std::vector<double> pi(4 * 9, 0.0);
    for (int b = 0; b < 4; ++b) pi[b * 9 + 4] = 1.0;
    return pi;
  }());
  SimSpec spec{500, Eigen::Vector2d(0.5, 0.5), none, 3, true};
  auto sim = sample_network(spec);
  CHECK(sim.network.n() == 500);
  CHECK(sim.network.nonbaseline_count() == 0);
}

TEST_CASE("simulation of a single Bernoulli dyad") {
  const TabularBlockModel coin(1, kBinaryUndirected, {0.5, 0.5});
  int present = 0;
  const int reps = 10000;
  for (int r = 0; r < reps; ++r) {
    SimSpec spec{2, Eigen::VectorXd::Ones(1), coin, static_cast<std::uint64_t>(r), false};
    auto sim = sample_network(spec);
    if (sim.network.nonbaseline_count() == 1) {
      ++present;
      CHECK(sim.network.dyads()[0].value == 1);
    }
  }
  CHECK(within_se(present, reps, 0.5));
}

TEST_CASE("a block with no baseline mass is complete") {
  std::vector<double> canonical{0.0, 1.0, 1.0, 0.0, 0.0, 1.0};
  auto model = TabularBlockModel::from_canonical(2, kBinaryUndirected, canonical);
  SimSpec spec{40, Eigen::Vector2d(0.5, 0.5), model, 8, false};
  auto sim = sample_network(spec);
  std::uint64_t sizes[2] = {0, 0};
  for (int z : sim.assignment) ++sizes[z];
  const auto expect = block_pair_count(sizes[0], sizes[0], true) + block_pair_count(sizes[1], sizes[1], true);
  CHECK(sim.network.nonbaseline_count() == expect);
  for (const auto& e : sim.network.dyads()) CHECK(sim.assignment[e.i] == sim.assignment[e.j]);
}

TEST_CASE("simulation is deterministic and relabeling keeps block structure") {
  std::mt19937_64 rng(9);
  auto model = oracle::random_tabular(rng, 3, kSignedDirected);
  SimSpec spec{300, Eigen::Vector3d(0.2, 0.3, 0.5), model, 42, false};
  auto a = sample_network(spec);
  auto b = sample_network(spec);
  CHECK(saved(a.network) == saved(b.network));
  CHECK(a.assignment == b.assignment);

  spec.relabel = true;
  auto r = sample_network(spec);
  CHECK(r.network.nonbaseline_count() == a.network.nonbaseline_count());
  std::vector<int> sizes_a(3, 0), sizes_r(3, 0);
  for (int z : a.assignment) ++sizes_a[z];
  for (int z : r.assignment) ++sizes_r[z];
  CHECK(sizes_a == sizes_r);
  CHECK(r.assignment != a.assignment);
  // same block pair dyad histogram under the permutation
  std::map<std::tuple<int, int, int>, int> ha, hr;
  for (const auto& e : a.network.dyads()) ++ha[{a.assignment[e.i], a.assignment[e.j], e.value}];
  for (const auto& e : r.network.dyads()) {
    int k = r.assignment[e.i], l = r.assignment[e.j], d = e.value;
    // contiguous layout lists the lower block first
    if (k > l) {
      std::swap(k, l);
      d = kSignedDirected.transpose(d);
    }
    // orientation inside a diagonal block follows node order
    if (k == l) d = std::min(d, kSignedDirected.transpose(d));
    ++hr[{k, l, d}];
  }
  std::map<std::tuple<int, int, int>, int> ha_canon;
  for (const auto& [key, c] : ha) {
    auto [k, l, d] = key;
    if (k > l) {
      std::swap(k, l);
      d = kSignedDirected.transpose(d);
    }
    if (k == l) d = std::min(d, kSignedDirected.transpose(d));
    ha_canon[{k, l, d}] += c;
  }
  CHECK(ha_canon == hr);
}

TEST_CASE("simulated dyad frequencies match the model") {
  std::vector<double> canonical;
  // block (0,0): mostly mutual trust; (0,1): distrust from 0 to 1; (1,1): sparse
  const int D = kSignedDirected.size();
  auto row = [&](std::map<std::pair<int, int>, double> cells) {
    std::vector<double> r(D, 0.0);
    double used = 0.0;
    for (auto [labels, p] : cells) {
      r[kSignedDirected.encode(labels.first, labels.second)] += p;
      used += p;
    }
    r[kSignedDirected.baseline()] += 1.0 - used;
    return r;
  };
  for (auto r : {row({{{1, 1}, 0.02}, {{1, 0}, 0.01}, {{0, 1}, 0.01}}),
                 row({{{-1, 0}, 0.004}, {{-1, 1}, 0.002}}),
                 row({{{1, 1}, 0.001}, {{-1, -1}, 0.001}})})
    canonical.insert(canonical.end(), r.begin(), r.end());
  auto model = TabularBlockModel::from_canonical(2, kSignedDirected, canonical);
  SimSpec spec{3000, Eigen::Vector2d(0.4, 0.6), model, 12, true};
  auto sim = sample_network(spec);
  std::uint64_t m[2] = {0, 0};
  for (int z : sim.assignment) ++m[z];
  std::map<std::tuple<int, int, int>, double> counts;
  for (const auto& e : sim.network.dyads()) {
    int k = sim.assignment[e.i], l = sim.assignment[e.j], d = e.value;
    if (k > l) {
      std::swap(k, l);
      d = kSignedDirected.transpose(d);
    }
    counts[{k, l, d}] += 1;
  }
  for (int k = 0; k < 2; ++k)
    for (int l = k; l < 2; ++l) {
      const double N = static_cast<double>(block_pair_count(m[k], m[l], k == l));
      for (int d = 0; d < D; ++d) {
        if (d == kSignedDirected.baseline()) continue;
        // diagonal blocks report d and its transpose together
        double p = model.pi(k, l, d);
        double c = counts[{k, l, d}];
        if (k == l && kSignedDirected.transpose(d) != d) {
          if (kSignedDirected.transpose(d) < d) continue;
          p += model.pi(k, l, kSignedDirected.transpose(d));
          c += counts[{k, l, kSignedDirected.transpose(d)}];
        }
        CHECK(within_se(c, N, p));
      }
    }
}
