#include <algorithm>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"

using namespace blockmix;

namespace {

SparseNetwork load(const std::string& text, const EdgeAlphabet& alph = EdgeAlphabet::signed_ratings(),
                   std::optional<bool> directed = std::nullopt) {
  std::istringstream in(text);
  return load_edge_list(in, alph, directed);
}

std::string save(const SparseNetwork& net) {
  std::ostringstream out;
  save_edge_list(net, out);
  return out.str();
}

}  // namespace

TEST_CASE("edge alphabet validation") {
  CHECK_THROWS_AS(EdgeAlphabet({0}, 0), DomainError);
  CHECK_THROWS_AS(EdgeAlphabet({0, 0, 1}, 0), DomainError);
  CHECK_THROWS_AS(EdgeAlphabet({1, 2}, 0), DomainError);
  CHECK(EdgeAlphabet::signed_ratings().is_signed());
  CHECK_FALSE(EdgeAlphabet::binary().is_signed());
}

TEST_CASE("dyad alphabet encodes pairs and transposes") {
  const DyadAlphabet dir(EdgeAlphabet::signed_ratings(), true);
  CHECK(dir.size() == 9);
  CHECK(dir.labels(dir.baseline()) == std::pair{0, 0});
  for (int d = 0; d < dir.size(); ++d) {
    CHECK(dir.transpose(dir.transpose(d)) == d);
    auto [a, b] = dir.labels(d);
    CHECK(dir.encode(a, b) == d);
    CHECK(dir.labels(dir.transpose(d)) == std::pair{b, a});
  }
  const DyadAlphabet und(EdgeAlphabet::binary(), false);
  CHECK(und.size() == 2);
  CHECK(und.transpose(1) == 1);
  CHECK_FALSE(dir.try_encode(2, 0).has_value());
}

TEST_CASE("loader combines the two directions of a dyad") {
  auto net = load("0\t1\t1\n1\t0\t-1\n");
  CHECK(net.n() == 2);
  CHECK(net.nonbaseline_count() == 1);
  CHECK(net.alphabet().labels(net.dyad(0, 1)) == std::pair{1, -1});
  CHECK(net.alphabet().labels(net.dyad(1, 0)) == std::pair{-1, 1});
}

TEST_CASE("loader handles headers, whitespace, and missing directions") {
  auto empty = load("#n=5\n");
  CHECK(empty.n() == 5);
  CHECK(empty.nonbaseline_count() == 0);

  auto net = load("#n=4\n# comment\n2 0 1\n");
  CHECK(net.n() == 4);
  CHECK(net.alphabet().labels(net.dyad(0, 2)) == std::pair{0, 1});
  CHECK(net.dyad(1, 3) == net.alphabet().baseline());

  auto inferred = load("0\t7\t-1\n");
  CHECK(inferred.n() == 8);
}

TEST_CASE("loader rejects malformed rows with line numbers") {
  try {
    load("0\t1\t1\n#x\n0\t1\t-1\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line == 3);
  }
  CHECK_THROWS_AS(load("0\t1\t2\n"), ParseError);
  CHECK_THROWS_AS(load("3\t3\t1\n"), ParseError);
  CHECK_THROWS_AS(load("#n=2\n0\t2\t1\n"), ParseError);
  CHECK_THROWS_AS(load("0\t1\n"), ParseError);
  CHECK_THROWS_AS(load("0\tx\t1\n"), ParseError);
}

TEST_CASE("zero self-loops are ignored") {
  auto net = load("2\t2\t0\n0\t1\t1\n");
  CHECK(net.n() == 3);
  CHECK(net.nonbaseline_count() == 1);
}

TEST_CASE("undirected loading") {
  auto net = load("#directed=0\n0\t1\t1\n", EdgeAlphabet::binary());
  CHECK_FALSE(net.directed());
  CHECK(net.dyad(1, 0) == 1);
  CHECK_THROWS_AS(load("0\t1\t1\n1\t0\t1\n", EdgeAlphabet::binary(), false), ParseError);
}

TEST_CASE("save writes header and sorted directed rows") {
  const DyadAlphabet alph(EdgeAlphabet::signed_ratings(), true);
  CHECK(save(SparseNetwork(3, alph, {})) == "#n=3\n");
  SparseNetwork one(2, alph, {{0, 1, static_cast<std::uint16_t>(alph.encode(1, -1))}});
  CHECK(save(one) == "#n=2\n0\t1\t1\n1\t0\t-1\n");
}

TEST_CASE("random networks round-trip and save is byte-stable") {
  std::mt19937_64 rng(11);
  for (bool directed : {true, false}) {
    const DyadAlphabet alph(EdgeAlphabet::signed_ratings(), directed);
    auto net = oracle::random_network(rng, 40, alph, 0.13);
    const std::string a = save(net);
    CHECK(a == save(net));
    auto back = load(a, EdgeAlphabet::signed_ratings());
    CHECK(back.n() == net.n());
    CHECK(back.directed() == directed);
    REQUIRE(back.nonbaseline_count() == net.nonbaseline_count());
    for (std::size_t e = 0; e < net.nonbaseline_count(); ++e) CHECK(back.dyads()[e] == net.dyads()[e]);
  }
  // a 100-row file in arbitrary order
  std::ostringstream rows;
  std::set<std::pair<int, int>> used;
  std::uniform_int_distribution<int> node(0, 29), val(0, 1);
  while (used.size() < 100) {
    int i = node(rng), j = node(rng);
    if (i == j || !used.insert({i, j}).second) continue;
    rows << i << "\t" << j << "\t" << (val(rng) ? 1 : -1) << "\n";
  }
  auto net = load(rows.str());
  auto again = load(save(net));
  REQUIRE(again.nonbaseline_count() == net.nonbaseline_count());
  for (std::size_t e = 0; e < net.nonbaseline_count(); ++e) CHECK(again.dyads()[e] == net.dyads()[e]);
}

TEST_CASE("adjacency is consistent with the dyad list") {
  std::mt19937_64 rng(3);
  const DyadAlphabet alph(EdgeAlphabet::signed_ratings(), true);
  auto net = oracle::random_network(rng, 30, alph, 0.2);
  std::size_t total = 0;
  for (NodeId i = 0; i < net.n(); ++i) {
    for (const auto& nb : net.neighbors(i)) CHECK(nb.value == net.dyad(i, nb.node));
    total += net.degree(i);
  }
  CHECK(total == 2 * net.nonbaseline_count());
}

TEST_CASE("excess trust statistic") {
  auto net = load("#n=5\n0\t3\t1\n1\t3\t1\n2\t3\t-1\n3\t0\t-1\n");
  CHECK(excess_trust(net, 3) == 1);
  CHECK(excess_trust(net, 4) == 0);
  CHECK(excess_trust(net, 0) == -1);

  auto binary = load("0\t1\t1\n", EdgeAlphabet::binary());
  CHECK_THROWS_AS(excess_trust(binary, 0), UnsupportedError);

  std::mt19937_64 rng(5);
  const DyadAlphabet alph(EdgeAlphabet::signed_ratings(), true);
  auto rnd = oracle::random_network(rng, 50, alph, 0.15);
  // dense column sums of y
  std::vector<long> col(50, 0);
  for (NodeId i = 0; i < 50; ++i)
    for (NodeId j = 0; j < 50; ++j)
      if (i != j) col[j] += alph.out_value(rnd.dyad(i, j));
  for (NodeId i = 0; i < 50; ++i) CHECK(excess_trust(rnd, i) == col[i]);
}

TEST_CASE("relabeling permutes dyads") {
  const DyadAlphabet alph(EdgeAlphabet::signed_ratings(), true);
  std::mt19937_64 rng(8);
  auto net = oracle::random_network(rng, 12, alph, 0.3);
  std::vector<NodeId> perm(12);
  std::iota(perm.begin(), perm.end(), NodeId{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  auto moved = net.relabeled(perm);
  for (NodeId i = 0; i < 12; ++i)
    for (NodeId j = 0; j < 12; ++j)
      if (i != j) CHECK(moved.dyad(perm[i], perm[j]) == net.dyad(i, j));
}
