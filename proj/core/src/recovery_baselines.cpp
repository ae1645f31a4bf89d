#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "tsbm/recovery.hpp"

namespace tsbm {

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }

  std::size_t find(std::size_t v) {
    while (parent_[v] != v) {
      parent_[v] = parent_[parent_[v]];
      v = parent_[v];
    }
    return v;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
  }

  std::size_t size_of(std::size_t v) { return size_[find(v)]; }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
};

// Component ids numbered by first appearance in node order.
BlockEstimate components_as_blocks(DisjointSets& dsu, std::size_t N,
                                   std::size_t stride = 1) {
  std::vector<int> id(N * stride, -1);
  BlockEstimate out;
  out.labels.labels.assign(N, 0);
  int next = 0;
  for (std::size_t i = 0; i < N; ++i) {
    const std::size_t root = dsu.find(i * stride);
    if (id[root] < 0) id[root] = next++;
    out.labels[i] = id[root];
  }
  out.K_hat = next;
  out.labels.K = std::max(next, 1);
  return out;
}

}  // namespace

BlockEstimate alg4_transition_rates(const SnapshotArray& x, const MarkovParams& params) {
  params.intra.validate();
  params.inter.validate();
  const BinaryMarkovChain& P = params.intra;
  const BinaryMarkovChain& Q = params.inter;
  if (P.p01 == Q.p01 && P.p11 == Q.p11) {
    throw std::invalid_argument("transition matrices coincide; blocks are unidentifiable");
  }
  if (x.T() < 2) throw std::invalid_argument("transition rates need T >= 2");
  const std::size_t N = x.N();
  DisjointSets dsu(N);
  std::size_t p = 0;
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t j = i + 1; j < N; ++j, ++p) {
      const auto pat = x.pattern_by_index(p);
      double n[2][2] = {{0, 0}, {0, 0}};
      for (std::size_t s = 1; s < pat.size(); ++s) {
        n[pat[s - 1] != 0][pat[s] != 0] += 1.0;
      }
      bool similar = false;
      for (int a = 0; a < 2 && !similar; ++a) {
        const double na = n[a][0] + n[a][1];
        if (na == 0.0) continue;  // no evidence about row a
        for (int b = 0; b < 2 && !similar; ++b) {
          const double gap = std::abs(P.P(a, b) - Q.P(a, b));
          if (gap == 0.0) continue;
          similar = std::abs(n[a][b] / na - P.P(a, b)) <= 0.5 * gap;
        }
      }
      if (similar) dsu.unite(i, j);
    }
  }
  return components_as_blocks(dsu, N);
}

BlockEstimate alg5_best_friends(const SnapshotArray& x) {
  if (x.T() < 1) throw std::invalid_argument("need at least one snapshot");
  const std::size_t N = x.N();
  DisjointSets dsu(N);
  std::size_t p = 0;
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t j = i + 1; j < N; ++j, ++p) {
      const auto pat = x.pattern_by_index(p);
      if (std::all_of(pat.begin(), pat.end(), [](std::uint8_t s) { return s != 0; })) {
        dsu.unite(i, j);
      }
    }
  }
  const double cutoff = std::sqrt(static_cast<double>(N));
  std::vector<int> id(N, -1);
  BlockEstimate out;
  out.labels.labels.assign(N, 0);
  int next = 0;
  for (std::size_t i = 0; i < N; ++i) {
    const std::size_t root = dsu.find(i);
    if (static_cast<double>(dsu.size_of(root)) <= cutoff) continue;
    if (id[root] < 0) id[root] = next++;
    out.labels[i] = id[root];
  }
  out.K_hat = next;
  out.degenerate = next == 0;
  out.labels.K = std::max(next, 1);
  return out;
}

BlockEstimate alg6_enemy(const SnapshotArray& x) {
  if (x.T() < 1) throw std::invalid_argument("need at least one snapshot");
  const std::size_t N = x.N();
  // Even-length walks in the enemy graph are connectivity in its bipartite
  // double cover: node v has copies 2v (even) and 2v + 1 (odd).
  DisjointSets dsu(2 * N);
  std::size_t p = 0;
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t j = i + 1; j < N; ++j, ++p) {
      const auto pat = x.pattern_by_index(p);
      const bool any = std::any_of(pat.begin(), pat.end(), [](std::uint8_t s) { return s != 0; });
      const bool all = std::all_of(pat.begin(), pat.end(), [](std::uint8_t s) { return s != 0; });
      if (any && !all) {
        dsu.unite(2 * i, 2 * j + 1);
        dsu.unite(2 * i + 1, 2 * j);
      }
    }
  }
  return components_as_blocks(dsu, N, 2);
}

}  // namespace tsbm
