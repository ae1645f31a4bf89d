#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "tsbm/divergence.hpp"
#include "tsbm/markov.hpp"

namespace tsbm {

/// Block assignment of N nodes. Labels are 0-based internally; files use
/// 1-based labels.
struct Labelling {
  std::vector<int> labels;
  int K = 1;

  Labelling() = default;
  Labelling(std::vector<int> l, int k) : labels(std::move(l)), K(k) {}

  std::size_t size() const noexcept { return labels.size(); }
  int operator[](std::size_t i) const { return labels[i]; }
  int& operator[](std::size_t i) { return labels[i]; }

  /// Throws std::invalid_argument unless K >= 1 and every label is in [0, K).
  void validate() const;
  std::vector<std::size_t> block_sizes() const;

  bool operator==(const Labelling&) const = default;
};

/// Symmetric N x N x T array of interaction symbols with zero diagonal.
/// Storage is pair-major: the T symbols of pair (i, j), i < j, are
/// contiguous, which matches how patterns are scored.
class SnapshotArray {
 public:
  SnapshotArray() = default;
  SnapshotArray(std::size_t N, std::size_t T, int alphabet = 2);

  std::size_t N() const noexcept { return n_; }
  std::size_t T() const noexcept { return t_; }
  int alphabet() const noexcept { return alphabet_; }
  std::size_t pair_count() const noexcept { return n_ * (n_ - (n_ > 0)) / 2; }

  /// Index of the unordered pair {i, j}, i != j.
  std::size_t pair_index(std::size_t i, std::size_t j) const noexcept {
    if (i > j) std::swap(i, j);
    return i * n_ - i * (i + 1) / 2 + (j - i - 1);
  }

  /// Symbol at snapshot t (0-based); zero on the diagonal.
  std::uint8_t at(std::size_t t, std::size_t i, std::size_t j) const {
    if (i == j) return 0;
    return data_[pair_index(i, j) * t_ + t];
  }
  void set(std::size_t t, std::size_t i, std::size_t j, std::uint8_t symbol);

  std::span<const std::uint8_t> pattern(std::size_t i, std::size_t j) const {
    return {data_.data() + pair_index(i, j) * t_, t_};
  }
  std::span<std::uint8_t> mutable_pattern(std::size_t i, std::size_t j) {
    return {data_.data() + pair_index(i, j) * t_, t_};
  }
  std::span<const std::uint8_t> pattern_by_index(std::size_t pair) const {
    return {data_.data() + pair * t_, t_};
  }

  /// First `T` snapshots as a new array.
  SnapshotArray prefix(std::size_t T) const;

  std::size_t nonzero_count() const;

  bool operator==(const SnapshotArray&) const = default;

 private:
  std::size_t n_ = 0;
  std::size_t t_ = 0;
  int alphabet_ = 2;
  std::vector<std::uint8_t> data_;
};

/// Law of one pair's interaction pattern over the whole observation window.
class InteractionLaw {
 public:
  virtual ~InteractionLaw() = default;
  virtual std::size_t T() const = 0;
  virtual int alphabet() const = 0;
  /// log density of a length-T pattern; -infinity outside the support.
  virtual double log_density(std::span<const std::uint8_t> pattern) const = 0;
  virtual void sample(std::uint64_t key, std::span<std::uint8_t> out) const = 0;
};

/// Binary Markov chain observed for T snapshots.
class MarkovLaw final : public InteractionLaw {
 public:
  MarkovLaw(BinaryMarkovChain chain, std::size_t T);
  std::size_t T() const override { return t_; }
  int alphabet() const override { return 2; }
  double log_density(std::span<const std::uint8_t> pattern) const override;
  void sample(std::uint64_t key, std::span<std::uint8_t> out) const override;
  const BinaryMarkovChain& chain() const { return chain_; }

 private:
  BinaryMarkovChain chain_;
  std::size_t t_;
};

/// T independent draws from a finite distribution.
class CategoricalLaw final : public InteractionLaw {
 public:
  explicit CategoricalLaw(FiniteDistribution dist, std::size_t T = 1);
  std::size_t T() const override { return t_; }
  int alphabet() const override { return static_cast<int>(dist_.size()); }
  double log_density(std::span<const std::uint8_t> pattern) const override;
  void sample(std::uint64_t key, std::span<std::uint8_t> out) const override;
  const FiniteDistribution& distribution() const { return dist_; }

 private:
  FiniteDistribution dist_;
  std::vector<double> cdf_;
  std::size_t t_;
};

/// Homogeneous kernel: `intra` for pairs in one block, `inter` otherwise.
struct InteractionKernel {
  std::shared_ptr<const InteractionLaw> intra;
  std::shared_ptr<const InteractionLaw> inter;

  /// Throws unless both laws exist and share T and alphabet.
  void validate() const;
  const InteractionLaw& law(bool same_block) const {
    return same_block ? *intra : *inter;
  }
};

InteractionKernel markov_kernel(const BinaryMarkovChain& intra,
                                const BinaryMarkovChain& inter, std::size_t T);
InteractionKernel categorical_kernel(const FiniteDistribution& f,
                                     const FiniteDistribution& g);

/// I.i.d. labels from `weights` (uniform when empty). Requires K <= N.
Labelling sample_labelling(std::size_t N, int K, std::uint64_t seed,
                           std::span<const double> weights = {});

/// Each unordered pair's pattern drawn independently from the kernel law
/// selected by block equality, using the substream keyed by (seed, i, j).
SnapshotArray sample_snapshots(const Labelling& sigma,
                               const InteractionKernel& kernel,
                               std::uint64_t seed);

SnapshotArray sample_markov_snapshots(const Labelling& sigma,
                                      const BinaryMarkovChain& intra,
                                      const BinaryMarkovChain& inter,
                                      std::size_t T, std::uint64_t seed);

SnapshotArray sample_categorical_snapshots(const Labelling& sigma,
                                           const FiniteDistribution& f,
                                           const FiniteDistribution& g,
                                           std::uint64_t seed);

struct SnapshotFile {
  SnapshotArray array;
  std::optional<Labelling> labels;
};

/// Text format:
///   tsbm 1 N T
///   labels l1 ... lN      (optional, 1-based)
///   e t i j [s]           (one per nonzero symbol; t 1-based, i < j 0-based;
///                          s defaults to 1)
/// Lines starting with '#' are comments.
void write_snapshots(const std::filesystem::path& path, const SnapshotArray& x,
                     const Labelling* labels = nullptr);
SnapshotFile read_snapshots(const std::filesystem::path& path);

/// Sidecar holding a single `labels l1 ... lN` line.
void write_labels(const std::filesystem::path& path, const Labelling& labels);
Labelling read_labels(const std::filesystem::path& path);

}  // namespace tsbm
