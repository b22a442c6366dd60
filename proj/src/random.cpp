#include "blockmix/random.hpp"

#include <algorithm>
#include <cmath>

#include "blockmix/errors.hpp"

namespace blockmix {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b,
                          std::uint64_t c) {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ splitmix64(a + 1));
  h = splitmix64(h ^ splitmix64(b + 0x51ed27));
  h = splitmix64(h ^ splitmix64(c + 0xa5a5a5));
  return h;
}

double uniform_open(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t uniform_index(Rng& rng, std::uint64_t bound) {
  if (bound == 0) throw DomainError("uniform_index: empty range");
  // reject the short final bucket
  const std::uint64_t limit = (~std::uint64_t{0}) - (~std::uint64_t{0}) % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

namespace {

std::uint64_t binomial_inversion(Rng& rng, std::uint64_t N, double p) {
  // p <= 0.5 and N * p < 30, so (1 - p)^N does not underflow.
  const double q = 1.0 - p;
  const double ratio = p / q;
  double prob = std::exp(static_cast<double>(N) * std::log1p(-p));
  double u = uniform_open(rng);
  std::uint64_t x = 0;
  while (u > prob && x < N) {
    u -= prob;
    prob *= ratio * static_cast<double>(N - x) / static_cast<double>(x + 1);
    ++x;
    if (prob <= 0.0) break;
  }
  return x;
}

}  // namespace

std::uint64_t sample_binomial(Rng& rng, std::uint64_t N, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("binomial probability outside [0, 1]");
  if (N == 0 || p == 0.0) return 0;
  if (p == 1.0) return N;
  const bool flip = p > 0.5;
  const double pp = flip ? 1.0 - p : p;
  std::uint64_t x;
  if (static_cast<double>(N) * pp < 30.0) {
    x = binomial_inversion(rng, N, pp);
  } else {
    std::binomial_distribution<std::uint64_t> dist(N, pp);
    x = dist(rng);
  }
  return flip ? N - x : x;
}

int sample_categorical(Rng& rng, std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0)) throw DomainError("categorical weights sum to zero");
  double u = uniform_open(rng) * total;
  int last = -1;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    last = static_cast<int>(i);
    if (u < weights[i]) return last;
    u -= weights[i];
  }
  return last;
}

std::vector<std::uint64_t> sample_multinomial(Rng& rng, std::uint64_t n,
                                              std::span<const double> probs) {
  std::vector<std::uint64_t> counts(probs.size(), 0);
  double remaining_mass = 1.0;
  std::uint64_t remaining = n;
  for (std::size_t k = 0; k + 1 < probs.size() && remaining > 0; ++k) {
    const double p = remaining_mass > 0.0 ? std::clamp(probs[k] / remaining_mass, 0.0, 1.0) : 0.0;
    counts[k] = sample_binomial(rng, remaining, p);
    remaining -= counts[k];
    remaining_mass -= probs[k];
  }
  if (!probs.empty()) counts.back() += remaining;
  return counts;
}

}  // namespace blockmix
