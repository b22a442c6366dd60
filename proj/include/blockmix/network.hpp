#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "blockmix/alphabet.hpp"

namespace blockmix {

using NodeId = std::uint32_t;

// A stored nonbaseline dyad for the pair i < j. `value` is D_ij = (y_ij, y_ji).
struct DyadEntry {
  NodeId i;
  NodeId j;
  std::uint16_t value;

  bool operator==(const DyadEntry&) const = default;
};

// Adjacency record seen from one endpoint: `value` is the dyad oriented
// from the owner's side, i.e. D_ij for i < j and transpose(D_ji) otherwise.
struct Neighbor {
  NodeId node;
  std::uint16_t value;
};

// Immutable sparse network. Only nonbaseline dyads are stored, both as a
// sorted (i, j) list and as per-node adjacency for the E-step.
class SparseNetwork {
 public:
  // Entries may arrive in any order with i < j; baseline values are dropped.
  // Throws DomainError on out-of-range ids, i >= j, or duplicate pairs.
  SparseNetwork(std::size_t n, DyadAlphabet alphabet, std::vector<DyadEntry> entries);

  std::size_t n() const { return n_; }
  const DyadAlphabet& alphabet() const { return alphabet_; }
  bool directed() const { return alphabet_.directed(); }

  // N = n(n-1)/2 dyads.
  std::uint64_t pair_count() const {
    return static_cast<std::uint64_t>(n_) * (n_ == 0 ? 0 : n_ - 1) / 2;
  }
  std::size_t nonbaseline_count() const { return dyads_.size(); }

  std::span<const DyadEntry> dyads() const { return dyads_; }
  std::span<const Neighbor> neighbors(NodeId i) const {
    return {adjacency_.data() + offsets_[i], adjacency_.data() + offsets_[i + 1]};
  }
  std::size_t degree(NodeId i) const { return offsets_[i + 1] - offsets_[i]; }

  // Dyad of the ordered pair (i, j); baseline when absent. For i > j this is
  // transpose(dyad(j, i)).
  int dyad(NodeId i, NodeId j) const;

  const std::vector<std::string>& node_labels() const { return labels_; }
  void set_node_labels(std::vector<std::string> labels);

  // Returns a copy with node ids renamed by `perm` (old id -> new id).
  SparseNetwork relabeled(std::span<const NodeId> perm) const;

 private:
  std::size_t n_;
  DyadAlphabet alphabet_;
  std::vector<DyadEntry> dyads_;
  std::vector<std::size_t> offsets_;
  std::vector<Neighbor> adjacency_;
  std::vector<std::string> labels_;
};

// e_i(y) = sum_{j != i} y_ji over a signed {-1, 0, 1} alphabet.
long excess_trust(const SparseNetwork& network, NodeId i);

// Edge-list TSV: "i<TAB>j<TAB>v" rows, '#n=<int>' and '#directed=<0|1>'
// headers, other '#' lines ignored except '#label<TAB>id<TAB>name'.
// `directed` overrides the header when given; default is directed.
SparseNetwork load_edge_list(std::istream& in, const EdgeAlphabet& alphabet,
                             std::optional<bool> directed = std::nullopt);
SparseNetwork load_edge_list_file(const std::string& path, const EdgeAlphabet& alphabet,
                                  std::optional<bool> directed = std::nullopt);

void save_edge_list(const SparseNetwork& network, std::ostream& out);

}  // namespace blockmix
