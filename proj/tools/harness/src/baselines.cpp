#include "tsbm/harness/baselines.hpp"

#include <algorithm>
#include <vector>

namespace tsbm::harness {

SymmetricCsr squared_adjacency(const SnapshotArray& x) {
  const std::size_t N = x.N();
  std::vector<SymmetricCsr::Entry> entries;
  std::vector<std::vector<std::uint32_t>> nbr(N);
  for (std::size_t t = 0; t < x.T(); ++t) {
    for (auto& l : nbr) l.clear();
    for (std::size_t i = 0; i < N; ++i) {
      for (std::size_t j = i + 1; j < N; ++j) {
        if (x.at(t, i, j) == 0) continue;
        nbr[i].push_back(static_cast<std::uint32_t>(j));
        nbr[j].push_back(static_cast<std::uint32_t>(i));
      }
    }
    // (A^2)_jk for j != k counts paths j - i - k; the diagonal equals the
    // degree and cancels against D.
    for (const auto& l : nbr) {
      for (std::size_t a = 0; a < l.size(); ++a) {
        for (std::size_t b = a + 1; b < l.size(); ++b) {
          const auto j = std::min(l[a], l[b]);
          const auto k = std::max(l[a], l[b]);
          entries.push_back({j, k, 1.0});
        }
      }
    }
  }
  return SymmetricCsr::from_upper(N, std::move(entries));
}

Labelling union_spectral(const SnapshotArray& x, const SpectralConfig& config) {
  return spectral_cluster(binarize(x), config);
}

Labelling aggregate_spectral(const SnapshotArray& x, const SpectralConfig& config) {
  return spectral_cluster(aggregate(x), config);
}

Labelling squared_adjacency_spectral(const SnapshotArray& x, const SpectralConfig& config) {
  return spectral_cluster(squared_adjacency(x), config);
}

}  // namespace tsbm::harness
