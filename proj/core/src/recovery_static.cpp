#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "tsbm/recovery.hpp"

namespace tsbm {

namespace {

constexpr double kMleBudget = 1e6;

double saturated_difference(double log_f, double log_g) {
  const double inf = std::numeric_limits<double>::infinity();
  if (log_f == -inf && log_g == -inf) return 0.0;
  if (log_f == -inf) return -kLogRatioCap;
  if (log_g == -inf) return kLogRatioCap;
  return std::clamp(log_f - log_g, -kLogRatioCap, kLogRatioCap);
}

}  // namespace

std::vector<double> pair_log_ratios(const SnapshotArray& x,
                                    const InteractionKernel& kernel) {
  kernel.validate();
  if (kernel.intra->T() != x.T()) {
    throw std::invalid_argument("kernel window differs from the data's T");
  }
  std::vector<double> r(x.pair_count());
  for (std::size_t p = 0; p < r.size(); ++p) {
    const auto pat = x.pattern_by_index(p);
    r[p] = saturated_difference(kernel.intra->log_density(pat),
                                kernel.inter->log_density(pat));
  }
  return r;
}

int refine_node(std::size_t i, const Labelling& sigma,
                const std::vector<double>& ratios, const SnapshotArray& x) {
  std::vector<double> h(static_cast<std::size_t>(sigma.K), 0.0);
  for (std::size_t j = 0; j < x.N(); ++j) {
    if (j == i) continue;
    h[static_cast<std::size_t>(sigma[j])] += ratios[x.pair_index(i, j)];
  }
  return static_cast<int>(std::max_element(h.begin(), h.end()) - h.begin());
}

Labelling alg1_recover(const SnapshotArray& x, const InteractionKernel& kernel,
                       int K, const Alg1Options& options) {
  if (K < 1) throw std::invalid_argument("K must be >= 1");
  const std::size_t N = x.N();
  Labelling out(std::vector<int>(N, 0), K);
  if (K == 1 || N == 0) return out;
  SpectralConfig cfg = options.spectral;
  cfg.K = K;
  const std::vector<double> ratios = pair_log_ratios(x, kernel);
  const SymmetricCsr adj = binarize(x);

  if (!options.leave_one_out) {
    const Labelling coarse = spectral_cluster(adj, cfg);
    for (std::size_t i = 0; i < N; ++i) out[i] = refine_node(i, coarse, ratios, x);
    return out;
  }

  // Row i holds the refined labelling built around node i.
  std::vector<Labelling> local(N);
  for (std::size_t i = 0; i < N; ++i) {
    const Labelling minor = leave_one_out_cluster(adj, i, cfg);
    Labelling full(std::vector<int>(N, 0), K);
    for (std::size_t j = 0, m = 0; j < N; ++j) {
      if (j != i) full[j] = minor[m++];
    }
    full[i] = refine_node(i, full, ratios, x);
    local[i] = std::move(full);
  }
  out[0] = local[0][0];
  std::vector<std::size_t> overlap(static_cast<std::size_t>(K));
  for (std::size_t i = 1; i < N; ++i) {
    std::fill(overlap.begin(), overlap.end(), 0);
    const int own = local[i][i];
    for (std::size_t j = 0; j < N; ++j) {
      if (local[i][j] == own) ++overlap[static_cast<std::size_t>(local[0][j])];
    }
    out[i] = static_cast<int>(std::max_element(overlap.begin(), overlap.end()) -
                              overlap.begin());
  }
  return out;
}

double labelling_log_likelihood(const Labelling& sigma,
                                const std::vector<double>& ratios,
                                const SnapshotArray& x) {
  double s = 0.0;
  std::size_t p = 0;
  for (std::size_t i = 0; i < x.N(); ++i) {
    for (std::size_t j = i + 1; j < x.N(); ++j, ++p) {
      if (sigma[i] == sigma[j]) s += ratios[p];
    }
  }
  return s;
}

Labelling mle_brute_force(const SnapshotArray& x, int K,
                          const InteractionKernel& kernel) {
  if (K < 1) throw std::invalid_argument("K must be >= 1");
  const std::size_t N = x.N();
  if (std::pow(static_cast<double>(K), static_cast<double>(N)) > kMleBudget) {
    throw std::invalid_argument("exhaustive search over K^N labellings exceeds 1e6");
  }
  const std::vector<double> ratios = pair_log_ratios(x, kernel);
  Labelling cur(std::vector<int>(N, 0), K);
  Labelling best = cur;
  double best_ll = labelling_log_likelihood(cur, ratios, x);
  // Odometer with node 0 most significant visits labellings in
  // lexicographic order, so a strict improvement test keeps the first tie.
  while (true) {
    std::size_t pos = N;
    while (pos > 0) {
      --pos;
      if (++cur[pos] < K) break;
      cur[pos] = 0;
      if (pos == 0) return best;
    }
    if (N == 0) return best;
    const double ll = labelling_log_likelihood(cur, ratios, x);
    if (ll > best_ll) {
      best_ll = ll;
      best = cur;
    }
  }
}

}  // namespace tsbm
