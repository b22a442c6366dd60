#include "blockmix/alphabet.hpp"

#include <algorithm>
#include <set>

#include "blockmix/errors.hpp"

namespace blockmix {

EdgeAlphabet::EdgeAlphabet(std::vector<int> values, int zero_label)
    : values_(std::move(values)), zero_label_(zero_label) {
  if (values_.size() < 2) throw DomainError("edge alphabet needs at least two labels");
  if (std::set<int>(values_.begin(), values_.end()).size() != values_.size())
    throw DomainError("edge alphabet labels must be distinct");
  auto it = std::find(values_.begin(), values_.end(), zero_label_);
  if (it == values_.end()) throw DomainError("zero label is not in the edge alphabet");
  zero_index_ = static_cast<int>(it - values_.begin());
}

std::optional<int> EdgeAlphabet::index_of(int value) const {
  auto it = std::find(values_.begin(), values_.end(), value);
  if (it == values_.end()) return std::nullopt;
  return static_cast<int>(it - values_.begin());
}

bool EdgeAlphabet::is_signed() const {
  return zero_label_ == 0 &&
         std::set<int>(values_.begin(), values_.end()) == std::set<int>{-1, 0, 1};
}

DyadAlphabet::DyadAlphabet(EdgeAlphabet edges, bool directed)
    : edges_(std::move(edges)), directed_(directed) {
  const int m = edges_.size();
  size_ = directed_ ? m * m : m;
  baseline_ = directed_ ? edges_.zero_index() * m + edges_.zero_index()
                        : edges_.zero_index();
}

int DyadAlphabet::transpose(int d) const {
  if (!directed_) return d;
  const int m = edges_.size();
  return (d % m) * m + d / m;
}

std::optional<int> DyadAlphabet::try_encode(int out_value, int in_value) const {
  auto a = edges_.index_of(out_value);
  auto b = edges_.index_of(in_value);
  if (!a || !b) return std::nullopt;
  if (!directed_) {
    if (*a != *b) return std::nullopt;
    return *a;
  }
  return *a * edges_.size() + *b;
}

int DyadAlphabet::encode(int out_value, int in_value) const {
  auto d = try_encode(out_value, in_value);
  if (!d) throw DomainError("dyad value outside alphabet");
  return *d;
}

std::pair<int, int> DyadAlphabet::labels(int d) const {
  if (!directed_) return {edges_.value(d), edges_.value(d)};
  const int m = edges_.size();
  return {edges_.value(d / m), edges_.value(d % m)};
}

}  // namespace blockmix
