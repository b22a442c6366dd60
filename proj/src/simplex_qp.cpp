#include <algorithm>
#include <cmath>
#include <limits>

#include "blockmix/engine.hpp"
#include "detail.hpp"

namespace blockmix {
namespace {

// Raises entries to `floor` and rescales the excess so the row still sums
// to one.
void apply_floor(std::span<double> x, double floor) {
  if (floor <= 0.0) return;
  const int K = static_cast<int>(x.size());
  if (K * floor >= 1.0) {
    std::fill(x.begin(), x.end(), 1.0 / K);
    return;
  }
  double excess = 0.0;
  for (double& v : x) {
    v = std::max(v, floor);
    excess += v - floor;
  }
  const double scale = (1.0 - K * floor) / excess;
  for (double& v : x) v = floor + (v - floor) * scale;
}

template <typename Total>
double bisect_multiplier(const Total& total, double lo, double hi) {
  double lambda = 0.5 * (lo + hi);
  for (int iter = 0; iter < 2000; ++iter) {
    const double s = total(lambda);
    if (std::abs(s - 1.0) <= 1e-12) break;
    if (s > 1.0)
      lo = lambda;
    else
      hi = lambda;
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    lambda = mid;
  }
  return lambda;
}

}  // namespace

std::vector<double> solve_simplex_qp(std::span<const double> quad, std::span<const double> lin,
                                     double floor) {
  const std::size_t K = quad.size();
  if (lin.size() != K || K == 0) throw DomainError("simplex QP: dimension mismatch");
  std::vector<bool> active(K);
  std::size_t n_active = 0;
  for (std::size_t k = 0; k < K; ++k) {
    if (std::isnan(quad[k]) || std::isnan(lin[k])) throw DomainError("simplex QP: NaN coefficient");
    if (!(quad[k] < 0.0)) throw DomainError("simplex QP: quadratic coefficients must be negative");
    active[k] = std::isfinite(quad[k]) && std::isfinite(lin[k]);
    n_active += active[k];
  }
  std::vector<double> x(K, 0.0);
  if (n_active == 0) {
    std::fill(x.begin(), x.end(), 1.0 / static_cast<double>(K));
    return x;
  }

  // x_k(lambda) = max(0, (lambda - b_k) / (2 a_k)) is nonincreasing in lambda.
  auto total = [&](double lambda) {
    double s = 0.0;
    for (std::size_t k = 0; k < K; ++k)
      if (active[k]) s += std::max(0.0, (lambda - lin[k]) / (2.0 * quad[k]));
    return s;
  };
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < K; ++k) {
    if (!active[k]) continue;
    lo = std::min(lo, lin[k] + 2.0 * quad[k]);
    hi = std::max(hi, lin[k]);
  }
  // Interior case first: with every component positive the multiplier has a
  // closed form. Otherwise bisect.
  double num = 1.0;
  double den = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    if (!active[k]) continue;
    num += lin[k] / (2.0 * quad[k]);
    den += 1.0 / (2.0 * quad[k]);
  }
  double lambda = num / den;
  bool interior = std::abs(total(lambda) - 1.0) <= 1e-12;
  for (std::size_t k = 0; k < K && interior; ++k)
    if (active[k] && lambda > lin[k]) interior = false;
  if (!interior) {
    lambda = bisect_multiplier(total, lo, hi);
    num = 1.0;
    den = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      if (!active[k] || lambda >= lin[k]) continue;
      num += lin[k] / (2.0 * quad[k]);
      den += 1.0 / (2.0 * quad[k]);
    }
    // Exact multiplier for the support found by bisection.
    if (den != 0.0) {
      const double exact = num / den;
      if (std::abs(total(exact) - 1.0) <= std::abs(total(lambda) - 1.0)) lambda = exact;
    }
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    if (active[k]) x[k] = std::max(0.0, (lambda - lin[k]) / (2.0 * quad[k]));
    sum += x[k];
  }
  for (double& v : x) v /= sum;
  apply_floor(x, floor);
  return x;
}

namespace detail {

void floor_row(std::span<double> x, double floor) { apply_floor(x, floor); }

void floor_rows(Membership& alpha, double floor) {
  const auto K = static_cast<std::size_t>(alpha.cols());
  for (Eigen::Index i = 0; i < alpha.rows(); ++i)
    apply_floor(std::span<double>(alpha.data() + i * alpha.cols(), K), floor);
}

}  // namespace detail

}  // namespace blockmix
