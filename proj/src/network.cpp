#include "blockmix/network.hpp"

#include <algorithm>

#include "blockmix/errors.hpp"

namespace blockmix {

SparseNetwork::SparseNetwork(std::size_t n, DyadAlphabet alphabet,
                             std::vector<DyadEntry> entries)
    : n_(n), alphabet_(std::move(alphabet)) {
  const int base = alphabet_.baseline();
  std::erase_if(entries, [base](const DyadEntry& e) { return e.value == base; });
  for (const auto& e : entries) {
    if (e.i >= e.j) throw DomainError("dyad entries must satisfy i < j");
    if (e.j >= n_) throw DomainError("node id out of range");
    if (e.value >= alphabet_.size()) throw DomainError("dyad value outside alphabet");
  }
  std::sort(entries.begin(), entries.end(), [](const DyadEntry& a, const DyadEntry& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
  for (std::size_t k = 1; k < entries.size(); ++k) {
    if (entries[k].i == entries[k - 1].i && entries[k].j == entries[k - 1].j)
      throw DomainError("duplicate dyad (" + std::to_string(entries[k].i) + ", " +
                        std::to_string(entries[k].j) + ")");
  }
  dyads_ = std::move(entries);

  offsets_.assign(n_ + 1, 0);
  for (const auto& e : dyads_) {
    ++offsets_[e.i + 1];
    ++offsets_[e.j + 1];
  }
  for (std::size_t i = 0; i < n_; ++i) offsets_[i + 1] += offsets_[i];
  adjacency_.resize(offsets_[n_]);
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (const auto& e : dyads_) {
    adjacency_[fill[e.j]++] = {e.i, static_cast<std::uint16_t>(alphabet_.transpose(e.value))};
  }
  for (const auto& e : dyads_) adjacency_[fill[e.i]++] = {e.j, e.value};
  for (std::size_t i = 0; i < n_; ++i) {
    std::sort(adjacency_.begin() + offsets_[i], adjacency_.begin() + offsets_[i + 1],
              [](const Neighbor& a, const Neighbor& b) { return a.node < b.node; });
  }
}

int SparseNetwork::dyad(NodeId i, NodeId j) const {
  if (i >= n_ || j >= n_) throw DomainError("node id out of range");
  auto adj = neighbors(i);
  auto it = std::lower_bound(adj.begin(), adj.end(), j,
                             [](const Neighbor& nb, NodeId v) { return nb.node < v; });
  if (it != adj.end() && it->node == j) return it->value;
  return alphabet_.baseline();
}

void SparseNetwork::set_node_labels(std::vector<std::string> labels) {
  if (!labels.empty() && labels.size() != n_)
    throw DomainError("node label table must have one entry per node");
  labels_ = std::move(labels);
}

SparseNetwork SparseNetwork::relabeled(std::span<const NodeId> perm) const {
  if (perm.size() != n_) throw DomainError("permutation size mismatch");
  std::vector<DyadEntry> out;
  out.reserve(dyads_.size());
  for (const auto& e : dyads_) {
    NodeId a = perm[e.i];
    NodeId b = perm[e.j];
    if (a < b) {
      out.push_back({a, b, e.value});
    } else {
      out.push_back({b, a, static_cast<std::uint16_t>(alphabet_.transpose(e.value))});
    }
  }
  SparseNetwork result(n_, alphabet_, std::move(out));
  if (!labels_.empty()) {
    std::vector<std::string> labels(n_);
    for (std::size_t i = 0; i < n_; ++i) labels[perm[i]] = labels_[i];
    result.labels_ = std::move(labels);
  }
  return result;
}

long excess_trust(const SparseNetwork& network, NodeId i) {
  if (!network.alphabet().edges().is_signed())
    throw UnsupportedError("excess trust requires the signed alphabet {-1, 0, 1}");
  if (i >= network.n()) throw DomainError("node id out of range");
  long total = 0;
  for (const auto& nb : network.neighbors(i)) total += network.alphabet().in_value(nb.value);
  return total;
}

}  // namespace blockmix
