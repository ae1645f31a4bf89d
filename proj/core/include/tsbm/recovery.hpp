#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "tsbm/markov.hpp"
#include "tsbm/sbm.hpp"
#include "tsbm/spectral.hpp"

namespace tsbm {

/// Log-likelihood ratios are clamped to [-kLogRatioCap, kLogRatioCap] so
/// kernels with zero-probability events stay finite.
inline constexpr double kLogRatioCap = 700.0;

/// log(num / den) saturated at +-kLogRatioCap; 0 when both vanish.
double saturated_log_ratio(double num, double den);

/// Intra-block chain (mu, P) and inter-block chain (nu, Q).
struct MarkovParams {
  BinaryMarkovChain intra;
  BinaryMarkovChain inter;
};

/// The two initial and four transition log-ratios an online step can see.
struct LogRatioTable {
  std::array<double, 2> initial{};
  std::array<std::array<double, 2>, 2> transition{};

  static LogRatioTable from(const MarkovParams& params);
};

enum class UpdateOrder {
  kSynchronous,   // every argmax reads the labelling frozen at step entry
  kAsynchronous,  // nodes updated in index order, later nodes see new labels
};

struct OnlineOptions {
  UpdateOrder order = UpdateOrder::kSynchronous;
  /// Re-estimate parameters every this many snapshots (unknown-parameter
  /// variant only).
  int refresh_every = 1;
};

/// State of an online likelihood clustering run after t snapshots.
struct LikelihoodState {
  std::size_t N = 0;
  /// Cumulative log-likelihood ratios, one per unordered pair (pair index of
  /// SnapshotArray); the matrix is symmetric with zero diagonal by layout.
  std::vector<double> M;
  Labelling sigma_hat;
  std::size_t t = 0;
  /// Per-pair transition counts n00, n01, n10, n11 (unknown-parameter
  /// variant only).
  std::vector<std::array<std::uint32_t, 4>> counts;
  MarkovParams estimates{};

  double m(std::size_t i, std::size_t j) const;
};

/// Per-node scores L(i, k) = sum_{j != i} M_ij 1(sigma_j = k), row-major N x K.
std::vector<double> block_scores(const LikelihoodState& state);

/// State after the first snapshot with known parameters.
LikelihoodState alg2_init(const SnapshotArray& x, Labelling initial,
                          const MarkovParams& params);
/// Consumes snapshot state.t (0-based) and relabels every node.
void alg2_step(LikelihoodState& state, const SnapshotArray& x,
               const LogRatioTable& table, const OnlineOptions& options = {});

/// State after the first snapshot with unknown parameters: mu and nu are
/// estimated from X^1 under the initial labelling, and P, Q start as the
/// memoryless chains with those marginals.
LikelihoodState alg3_init(const SnapshotArray& x, Labelling initial);
void alg3_step(LikelihoodState& state, const SnapshotArray& x,
               const OnlineOptions& options = {});

/// Averages of n_ab / n_a over same-label (intra) and different-label
/// (inter) pairs; pairs with n_a = 0 are skipped. Returns {intra, inter}
/// flags; a side with no usable pair keeps its previous estimate.
std::array<bool, 2> reestimate_transitions(LikelihoodState& state);

/// Called after every snapshot with (t, current labelling); t is 1-based.
using OnlineObserver = std::function<void(std::size_t, const Labelling&)>;

Labelling alg2_run(const SnapshotArray& x, Labelling initial,
                   const MarkovParams& params, const OnlineOptions& options = {},
                   const OnlineObserver& observer = {});
Labelling alg3_run(const SnapshotArray& x, Labelling initial,
                   const OnlineOptions& options = {},
                   const OnlineObserver& observer = {});

struct Alg1Options {
  SpectralConfig spectral{};
  /// One spectral run per node plus consensus, as opposed to a single
  /// spectral run followed by one refinement sweep.
  bool leave_one_out = false;
};

/// Spectral clustering of the binarized data refined by per-node
/// log-likelihood ratios of the full patterns.
Labelling alg1_recover(const SnapshotArray& x, const InteractionKernel& kernel,
                       int K, const Alg1Options& options = {});

/// Per-pair log f(x_ij) - log g(x_ij), saturated.
std::vector<double> pair_log_ratios(const SnapshotArray& x,
                                    const InteractionKernel& kernel);

/// argmax_k sum_{j != i, sigma(j) = k} ratio_ij, lowest index on ties.
int refine_node(std::size_t i, const Labelling& sigma,
                const std::vector<double>& ratios, const SnapshotArray& x);

struct BlockEstimate {
  Labelling labels;
  int K_hat = 0;
  /// Set when no component qualified as a block.
  bool degenerate = false;
};

/// Similarity graph from per-pair empirical transition rates; blocks are
/// its connected components. Throws when P == Q.
BlockEstimate alg4_transition_rates(const SnapshotArray& x, const MarkovParams& params);

/// Components of the always-interacting graph larger than sqrt(N) become
/// blocks; remaining nodes go to block 0.
BlockEstimate alg5_best_friends(const SnapshotArray& x);

/// Components of the graph linking nodes that share a neighbour whose
/// interaction with both changed over time.
BlockEstimate alg6_enemy(const SnapshotArray& x);

/// Exhaustive maximum-likelihood labelling; K^N must not exceed 1e6.
/// Ties go to the lexicographically smallest labelling.
Labelling mle_brute_force(const SnapshotArray& x, int K,
                          const InteractionKernel& kernel);

/// sum_{i<j, sigma_i = sigma_j} (log f - log g)(x_ij): the log-likelihood up
/// to a labelling-independent constant.
double labelling_log_likelihood(const Labelling& sigma,
                                const std::vector<double>& ratios,
                                const SnapshotArray& x);

}  // namespace tsbm
