#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace blockmix {

using Rng = std::mt19937_64;

// Stream splitting: every subsidiary seed is a SplitMix64 hash of the master
// seed and a stream path, so streams do not depend on execution order.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0,
                          std::uint64_t c = 0);

// Uniform on the open interval (0, 1) from the top 53 bits.
double uniform_open(Rng& rng);

// Uniform on {0, ..., bound - 1}; bound > 0.
std::uint64_t uniform_index(Rng& rng, std::uint64_t bound);

// Binomial(N, p). Inversion when the smaller tail mean N * min(p, 1 - p)
// is below 30, otherwise std::binomial_distribution's rejection sampler.
std::uint64_t sample_binomial(Rng& rng, std::uint64_t N, double p);

// Index drawn from unnormalized nonnegative weights.
int sample_categorical(Rng& rng, std::span<const double> weights);

std::vector<std::uint64_t> sample_multinomial(Rng& rng, std::uint64_t n,
                                              std::span<const double> probs);

}  // namespace blockmix
