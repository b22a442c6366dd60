#pragma once

#include <optional>
#include <utility>
#include <vector>

namespace blockmix {

// Finite set of edge labels y_ij. `zero_label` means "no relationship".
class EdgeAlphabet {
 public:
  EdgeAlphabet(std::vector<int> values, int zero_label = 0);

  static EdgeAlphabet binary() { return EdgeAlphabet({0, 1}, 0); }
  static EdgeAlphabet signed_ratings() { return EdgeAlphabet({-1, 0, 1}, 0); }

  int size() const { return static_cast<int>(values_.size()); }
  const std::vector<int>& values() const { return values_; }
  int zero_label() const { return zero_label_; }
  int zero_index() const { return zero_index_; }
  int value(int index) const { return values_[index]; }
  std::optional<int> index_of(int value) const;
  bool is_signed() const;

  bool operator==(const EdgeAlphabet&) const = default;

 private:
  std::vector<int> values_;
  int zero_label_;
  int zero_index_ = 0;
};

// Sample space of a dyad. Directed dyads are ordered pairs (y_ij, y_ji)
// encoded as index(y_ij) * M + index(y_ji); undirected dyads are single
// labels. The baseline is the all-zero dyad.
class DyadAlphabet {
 public:
  DyadAlphabet(EdgeAlphabet edges, bool directed);

  const EdgeAlphabet& edges() const { return edges_; }
  bool directed() const { return directed_; }
  int size() const { return size_; }
  int baseline() const { return baseline_; }

  // Swaps the pair components; identity for undirected alphabets.
  int transpose(int d) const;

  int encode(int out_value, int in_value) const;
  std::optional<int> try_encode(int out_value, int in_value) const;
  // (y_ij, y_ji) as label values. Undirected dyads return (v, v).
  std::pair<int, int> labels(int d) const;
  int out_value(int d) const { return labels(d).first; }
  int in_value(int d) const { return labels(d).second; }

  bool operator==(const DyadAlphabet&) const = default;

 private:
  EdgeAlphabet edges_;
  bool directed_;
  int size_;
  int baseline_;
};

}  // namespace blockmix
