#include <algorithm>
#include <cmath>

#include "blockmix/engine.hpp"
#include "blockmix/random.hpp"

namespace blockmix {

Membership init_random(std::size_t n, int K, std::uint64_t seed) {
  if (K < 1) throw DomainError("K must be at least 1");
  Rng rng(seed);
  Membership alpha(static_cast<Eigen::Index>(n), K);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (int k = 0; k < K; ++k) {
      const double u = uniform_open(rng);
      alpha(i, k) = u;
      sum += u;
    }
    alpha.row(i) /= sum;
  }
  return alpha;
}

BlockDyadStats accumulate_block_stats(const SparseNetwork& network, const Membership& alpha) {
  if (static_cast<std::size_t>(alpha.rows()) != network.n())
    throw DomainError("membership matrix has the wrong number of rows");
  const int K = static_cast<int>(alpha.cols());
  if (K < 1) throw DomainError("membership matrix has no columns");
  const auto& alphabet = network.alphabet();
  const int D = alphabet.size();

  BlockDyadStats st;
  st.K = K;
  st.D = D;
  st.baseline = alphabet.baseline();
  st.col_sum = alpha.colwise().sum().transpose();
  st.self_prod = alpha.transpose() * alpha;
  st.pair_weight = Eigen::MatrixXd::Zero(K, K);
  for (int k = 0; k < K; ++k) {
    st.pair_weight(k, k) = 0.5 * (st.col_sum[k] * st.col_sum[k] - st.self_prod(k, k));
    for (int l = k + 1; l < K; ++l) {
      const double t = st.col_sum[k] * st.col_sum[l] - st.self_prod(k, l);
      st.pair_weight(k, l) = t;
      st.pair_weight(l, k) = t;
    }
  }

  // raw[(k * K + l) * D + d] = sum over stored pairs i < j with D_ij = d of
  // a_ik a_jl. Neighbor memberships are first summed per dyad value so the
  // per-dyad cost is O(K).
  std::vector<double> raw(static_cast<std::size_t>(K) * K * D, 0.0);
  std::vector<double> partial(static_cast<std::size_t>(D) * K, 0.0);
  std::vector<char> seen(D, 0);
  std::vector<int> touched;
  for (NodeId i = 0; i < network.n(); ++i) {
    touched.clear();
    for (const auto& nb : network.neighbors(i)) {
      if (nb.node < i) continue;
      const double* aj = alpha.data() + static_cast<Eigen::Index>(nb.node) * K;
      double* acc = partial.data() + nb.value * K;
      if (!seen[nb.value]) {
        seen[nb.value] = 1;
        touched.push_back(nb.value);
      }
      for (int l = 0; l < K; ++l) acc[l] += aj[l];
    }
    const double* ai = alpha.data() + static_cast<Eigen::Index>(i) * K;
    for (int d : touched) {
      double* acc = partial.data() + d * K;
      for (int k = 0; k < K; ++k)
        for (int l = 0; l < K; ++l) raw[(k * K + l) * D + d] += ai[k] * acc[l];
      std::fill(acc, acc + K, 0.0);
      seen[d] = 0;
    }
  }

  st.counts = DyadWeights(K, D);
  for (int k = 0; k < K; ++k) {
    for (int d = 0; d < D; ++d) {
      if (d == st.baseline) continue;
      const int td = alphabet.transpose(d);
      st.counts.at(k, k, d) = 0.5 * (raw[(k * K + k) * D + d] + raw[(k * K + k) * D + td]);
      for (int l = k + 1; l < K; ++l)
        st.counts.at(k, l, d) = raw[(k * K + l) * D + d] + raw[(l * K + k) * D + td];
    }
    for (int l = k; l < K; ++l) {
      double nonbase = 0.0;
      for (int d = 0; d < D; ++d)
        if (d != st.baseline) nonbase += st.counts(k, l, d);
      st.counts.at(k, l, st.baseline) = st.pair_weight(k, l) - nonbase;
    }
  }
  return st;
}

std::vector<int> hard_assignment(const Membership& alpha) {
  std::vector<int> out(alpha.rows());
  for (Eigen::Index i = 0; i < alpha.rows(); ++i) {
    int best = 0;
    for (int k = 1; k < alpha.cols(); ++k)
      if (alpha(i, k) > alpha(i, best)) best = k;
    out[i] = best;
  }
  return out;
}

Eigen::VectorXd m_step_gamma(const Membership& alpha) {
  if (alpha.rows() == 0) throw DomainError("empty membership matrix");
  return alpha.colwise().mean().transpose();
}

}  // namespace blockmix
