#pragma once

#include "tsbm/sbm.hpp"
#include "tsbm/spectral.hpp"

namespace tsbm::harness {

/// sum_t (A_t^2 - D_t): off-diagonal counts of common neighbours summed over
/// snapshots. Symbols other than 0 count as edges.
SymmetricCsr squared_adjacency(const SnapshotArray& x);

/// Spectral clustering of the union graph (edge iff any snapshot has one).
Labelling union_spectral(const SnapshotArray& x, const SpectralConfig& config);

/// Spectral clustering of the time-aggregated graph sum_t A_t.
Labelling aggregate_spectral(const SnapshotArray& x, const SpectralConfig& config);

Labelling squared_adjacency_spectral(const SnapshotArray& x, const SpectralConfig& config);

}  // namespace tsbm::harness
