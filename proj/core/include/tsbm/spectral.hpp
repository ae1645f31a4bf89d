#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "tsbm/sbm.hpp"

namespace tsbm {

/// Symmetric sparse matrix in compressed-row form; both triangles stored.
class SymmetricCsr {
 public:
  struct Entry {
    std::uint32_t i;
    std::uint32_t j;
    double w;
  };

  SymmetricCsr() = default;
  /// Builds from upper-triangle entries (i < j); duplicates are summed and
  /// zero weights dropped.
  static SymmetricCsr from_upper(std::size_t n, std::vector<Entry> entries);

  std::size_t n() const noexcept { return row_ptr_.empty() ? 0 : row_ptr_.size() - 1; }
  std::size_t nnz() const noexcept { return cols_.size(); }

  std::span<const std::uint32_t> neighbours(std::size_t i) const {
    return {cols_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
  }
  std::span<const double> weights(std::size_t i) const {
    return {vals_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
  }
  double weighted_degree(std::size_t i) const;

  /// y = A x.
  void multiply(std::span<const double> x, std::span<double> y) const;
  /// Max absolute row sum, an upper bound on the spectral norm.
  double inf_norm() const;

  /// Same matrix with the listed rows and columns zeroed.
  SymmetricCsr with_zeroed(const std::vector<bool>& drop) const;
  /// Principal submatrix without row/column `i`; indices above i shift down.
  SymmetricCsr without_node(std::size_t i) const;

  Eigen::MatrixXd dense() const;

 private:
  std::vector<std::size_t> row_ptr_;
  std::vector<std::uint32_t> cols_;
  std::vector<double> vals_;
};

/// 1 where the pair's pattern has any nonzero symbol.
SymmetricCsr binarize(const SnapshotArray& x);
/// Adjacency of the single snapshot t (0-based), binarized.
SymmetricCsr snapshot_adjacency(const SnapshotArray& x, std::size_t t);
/// Weight = number of snapshots in which the pair interacts.
SymmetricCsr aggregate(const SnapshotArray& x);

struct LanczosOptions {
  double tolerance = 1e-8;  // relative to the matrix norm
  int max_iterations = 1000;
};

struct Eigenpairs {
  Eigen::VectorXd values;   // sorted by decreasing magnitude
  Eigen::MatrixXd vectors;  // n x k, orthonormal columns
  int iterations = 0;
};

/// Top-k eigenpairs by magnitude via Lanczos with full
/// reorthogonalisation. Invariant subspaces are deflated by restarting from a
/// fresh random vector. Throws ConvergenceError past max_iterations.
Eigenpairs top_eigenpairs(const SymmetricCsr& a, int k, std::uint64_t seed,
                          const LanczosOptions& options = {});

struct KMeansResult {
  std::vector<int> labels;
  Eigen::MatrixXd centroids;
  double inertia = 0.0;
};

/// Lloyd iterations from k-means++ seeding; best inertia over restarts.
/// Empty clusters are reseeded at the point farthest from its centroid.
KMeansResult kmeans(const Eigen::MatrixXd& points, int K, int restarts,
                    int iterations, std::uint64_t seed);

struct SpectralConfig {
  int K = 2;
  double trim_factor = 40.0;
  int kmeans_restarts = 10;
  int kmeans_iters = 100;
  std::uint64_t seed = 0;
  LanczosOptions lanczos{};

  void validate() const;
};

/// Trim nodes of degree above trim_factor * K * mean degree, embed with the
/// top-K eigenvectors, cluster the rows with k-means.
Labelling spectral_cluster(const SymmetricCsr& adj, const SpectralConfig& config);

/// Clustering of the minor without node i. The result has N-1 entries and
/// lists nodes in order with i skipped. Seeded by (config.seed, i).
Labelling leave_one_out_cluster(const SymmetricCsr& adj, std::size_t i,
                                const SpectralConfig& config);

}  // namespace tsbm
