#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "tsbm/sbm.hpp"

namespace tsbm {

/// counts[k][l] = |{i : s1(i) = k, s2(i) = l}| over a common label range
/// K = max(s1.K, s2.K).
struct ConfusionMatrix {
  int K = 0;
  std::vector<std::int64_t> counts;  // row-major K x K

  std::int64_t operator()(int k, int l) const {
    return counts[static_cast<std::size_t>(k) * static_cast<std::size_t>(K) +
                  static_cast<std::size_t>(l)];
  }
};

ConfusionMatrix confusion_matrix(const Labelling& s1, const Labelling& s2);

/// Number of nodes with s1(i) != s2(i).
std::int64_t ham(const Labelling& s1, const Labelling& s2);

/// min over permutations rho of Ham(rho o s1, s2). `perm[k]` is the label in
/// s2's range assigned to block k of s1.
struct Alignment {
  std::int64_t distance = 0;
  std::vector<int> perm;
};

/// Exhaustive search for K <= 8 (ties go to the lexicographically first
/// permutation), optimal assignment above that.
Alignment ham_star(const Labelling& s1, const Labelling& s2);
Alignment ham_star_exhaustive(const Labelling& s1, const Labelling& s2);
Alignment ham_star_assignment(const Labelling& s1, const Labelling& s2);

/// Maximum-weight perfect matching on a square matrix, rows to columns.
std::vector<int> max_weight_assignment(const std::vector<std::int64_t>& weights,
                                       int K);

/// |E(s1) \ E(s2)| where E(s) is the set of unordered same-block pairs.
std::int64_t pair_set_difference(const Labelling& s1, const Labelling& s2);

/// 2 (|E(s1) \ E(s2)| + |E(s2) \ E(s1)|), from block intersection counts.
std::int64_t mirkin(const Labelling& s1, const Labelling& s2);

/// Fraction of unordered node pairs on which the two partitions agree.
double rand_index(const Labelling& s1, const Labelling& s2);

/// Permutation tau of s2's labels with Ham(s1, tau o s2) < N_min(s1) / 2,
/// where N_min is the smallest block of s1. Such a tau is unique when it
/// exists; built from the row-wise argmax of the confusion matrix.
std::optional<std::vector<int>> unique_alignment(const Labelling& s1,
                                                 const Labelling& s2);

/// Applies a label permutation: out(i) = perm[s(i)].
Labelling relabel(const Labelling& s, const std::vector<int>& perm);

/// 1 - Ham* / N.
double accuracy(const Labelling& truth, const Labelling& estimate);

}  // namespace tsbm
