#include "blockmix/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "blockmix/errors.hpp"

namespace blockmix {

Memberships sample_memberships(const Eigen::VectorXd& gamma, std::size_t n, Rng& rng) {
  if (n < 1) throw DomainError("sample_memberships needs n >= 1");
  if (gamma.size() < 1 || (gamma.array() < 0.0).any() || std::abs(gamma.sum() - 1.0) > 1e-9)
    throw DomainError("gamma must lie on the simplex");
  Memberships out;
  out.block_sizes = sample_multinomial(rng, n, std::span<const double>(gamma.data(), gamma.size()));
  out.assignment.reserve(n);
  for (std::size_t k = 0; k < out.block_sizes.size(); ++k)
    out.assignment.insert(out.assignment.end(), out.block_sizes[k], static_cast<int>(k));
  return out;
}

std::uint64_t block_pair_count(std::uint64_t size_k, std::uint64_t size_l, bool same_block) {
  if (same_block) return size_k < 2 ? 0 : size_k * (size_k - 1) / 2;
  return size_k * size_l;
}

PairDecoder::PairDecoder(NodeId offset, std::uint64_t size)
    : within_(true),
      offset_k_(offset),
      size_k_(size),
      offset_l_(offset),
      size_l_(size),
      count_(block_pair_count(size, size, true)) {}

PairDecoder::PairDecoder(NodeId offset_k, std::uint64_t size_k, NodeId offset_l,
                         std::uint64_t size_l)
    : within_(false),
      offset_k_(offset_k),
      size_k_(size_k),
      offset_l_(offset_l),
      size_l_(size_l),
      count_(size_k * size_l) {
  if (size_k > 0 && size_l > 0 && offset_k + size_k > offset_l)
    throw DomainError("cross-block decoder needs the first block before the second");
}

std::pair<NodeId, NodeId> PairDecoder::operator()(std::uint64_t index) const {
  if (index >= count_) throw DomainError("pair index out of range");
  if (!within_) {
    return {static_cast<NodeId>(offset_k_ + index / size_l_),
            static_cast<NodeId>(offset_l_ + index % size_l_)};
  }
  // colex order: index = v (v - 1) / 2 + u with u < v
  auto tri = [](std::uint64_t v) { return v * (v - 1) / 2; };
  auto v = static_cast<std::uint64_t>((1.0 + std::sqrt(1.0 + 8.0 * static_cast<double>(index))) / 2.0);
  while (v > 1 && tri(v) > index) --v;
  while (tri(v + 1) <= index) ++v;
  const std::uint64_t u = index - tri(v);
  return {static_cast<NodeId>(offset_k_ + u), static_cast<NodeId>(offset_k_ + v)};
}

std::vector<std::uint64_t> floyd_sample(std::uint64_t N, std::uint64_t S, Rng& rng) {
  if (S > N) throw DomainError("cannot sample more pairs than exist");
  std::vector<std::uint64_t> out;
  out.reserve(S);
  std::unordered_set<std::uint64_t> chosen;
  chosen.reserve(S * 2);
  for (std::uint64_t top = N - S; top < N; ++top) {
    const std::uint64_t t = uniform_index(rng, top + 1);
    const std::uint64_t pick = chosen.insert(t).second ? t : top;
    if (pick == top) chosen.insert(top);
    out.push_back(pick);
  }
  return out;
}

std::vector<std::pair<NodeId, NodeId>> sample_distinct_pairs(std::uint64_t N, std::uint64_t S,
                                                             const PairDecoder& decoder,
                                                             Rng& rng) {
  if (N != decoder.pair_count()) throw DomainError("pair count does not match the decoder");
  auto indices = floyd_sample(N, S, rng);
  std::vector<std::pair<NodeId, NodeId>> out;
  out.reserve(indices.size());
  for (auto idx : indices) out.push_back(decoder(idx));
  return out;
}

SimulatedNetwork sample_network(const SimSpec& spec) {
  const int K = model_components(spec.model);
  if (spec.gamma.size() != K) throw DomainError("gamma length differs from K");
  const auto& alphabet = model_alphabet(spec.model);
  const auto pi = to_tabular(spec.model);
  const int D = alphabet.size();
  const int b = alphabet.baseline();

  Rng master(derive_seed(spec.seed, 0x6d656d));
  auto members = sample_memberships(spec.gamma, spec.n, master);
  std::vector<NodeId> offsets(K + 1, 0);
  for (int k = 0; k < K; ++k)
    offsets[k + 1] = offsets[k] + static_cast<NodeId>(members.block_sizes[k]);

  std::vector<DyadEntry> entries;
  std::vector<double> weights(D);
  for (int k = 0; k < K; ++k)
    for (int l = k; l < K; ++l) {
      const bool same = k == l;
      PairDecoder decoder = same ? PairDecoder(offsets[k], members.block_sizes[k])
                                 : PairDecoder(offsets[k], members.block_sizes[k], offsets[l],
                                               members.block_sizes[l]);
      const std::uint64_t N = decoder.pair_count();
      if (N == 0) continue;
      const double p_base = pi.pi(k, l, b);
      if (p_base >= 1.0) continue;
      Rng rng(derive_seed(spec.seed, 0x626c6b, static_cast<std::uint64_t>(k),
                          static_cast<std::uint64_t>(l)));
      const std::uint64_t S = p_base <= 0.0 ? N : sample_binomial(rng, N, 1.0 - p_base);
      for (int d = 0; d < D; ++d) weights[d] = d == b ? 0.0 : pi.pi(k, l, d);
      for (const auto& [i, j] : sample_distinct_pairs(N, S, decoder, rng)) {
        const int d = sample_categorical(rng, weights);
        entries.push_back({i, j, static_cast<std::uint16_t>(d)});
      }
    }

  SparseNetwork network(spec.n, alphabet, std::move(entries));
  if (!spec.relabel) return {std::move(network), std::move(members.assignment)};

  Rng perm_rng(derive_seed(spec.seed, 0x7065726d));
  std::vector<NodeId> perm(spec.n);
  std::iota(perm.begin(), perm.end(), NodeId{0});
  for (std::size_t i = spec.n; i > 1; --i) std::swap(perm[i - 1], perm[uniform_index(perm_rng, i)]);
  std::vector<int> assignment(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) assignment[perm[i]] = members.assignment[i];
  return {network.relabeled(perm), std::move(assignment)};
}

}  // namespace blockmix
