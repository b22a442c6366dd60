#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <utility>
#include <vector>

#include "blockmix/models.hpp"
#include "blockmix/network.hpp"
#include "blockmix/random.hpp"

namespace blockmix {

struct SimSpec {
  std::size_t n = 0;
  Eigen::VectorXd gamma;
  DyadModel model;
  std::uint64_t seed = 1;
  // Apply a uniform random node permutation after contiguous assignment.
  bool relabel = false;
};

struct Memberships {
  std::vector<std::uint64_t> block_sizes;
  std::vector<int> assignment;  // node -> component
};

// M ~ Multinomial(n; gamma), nodes assigned to components contiguously.
Memberships sample_memberships(const Eigen::VectorXd& gamma, std::size_t n, Rng& rng);

// Number of unordered node pairs between blocks k and l (k == l: within).
std::uint64_t block_pair_count(std::uint64_t size_k, std::uint64_t size_l, bool same_block);

// Maps a pair index of one block pair onto node ids (i < j). Blocks are
// contiguous: block k occupies [offset_k, offset_k + size_k).
class PairDecoder {
 public:
  // Within-block decoder.
  PairDecoder(NodeId offset, std::uint64_t size);
  // Cross-block decoder; the first block must precede the second.
  PairDecoder(NodeId offset_k, std::uint64_t size_k, NodeId offset_l, std::uint64_t size_l);

  std::uint64_t pair_count() const { return count_; }
  std::pair<NodeId, NodeId> operator()(std::uint64_t index) const;

 private:
  bool within_;
  NodeId offset_k_;
  std::uint64_t size_k_;
  NodeId offset_l_;
  std::uint64_t size_l_;
  std::uint64_t count_;
};

// S distinct indices of {0, ..., N-1} by Floyd's algorithm, in draw order.
std::vector<std::uint64_t> floyd_sample(std::uint64_t N, std::uint64_t S, Rng& rng);

std::vector<std::pair<NodeId, NodeId>> sample_distinct_pairs(std::uint64_t N, std::uint64_t S,
                                                             const PairDecoder& decoder, Rng& rng);

struct SimulatedNetwork {
  SparseNetwork network;
  std::vector<int> assignment;
};

SimulatedNetwork sample_network(const SimSpec& spec);

}  // namespace blockmix
