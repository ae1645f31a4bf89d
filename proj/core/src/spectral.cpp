#include "tsbm/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "tsbm/errors.hpp"
#include "tsbm/rng.hpp"

namespace tsbm {

namespace {

constexpr std::uint64_t kLanczosStream = 1;
constexpr std::uint64_t kKMeansStream = 2;
constexpr std::uint64_t kLeaveOneOutStream = 3;

Eigen::VectorXd random_unit(std::size_t n, SplitMix64& rng) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.uniform() - 0.5;
  const double norm = v.norm();
  if (norm == 0.0) v.setConstant(1.0 / std::sqrt(static_cast<double>(n)));
  else v /= norm;
  return v;
}

// Two passes of classical Gram-Schmidt against the first m columns.
void orthogonalise(Eigen::VectorXd& w, const Eigen::MatrixXd& V, Eigen::Index m) {
  if (m == 0) return;
  for (int pass = 0; pass < 2; ++pass) {
    const Eigen::VectorXd h = V.leftCols(m).transpose() * w;
    w.noalias() -= V.leftCols(m) * h;
  }
}

double squared_distance(const Eigen::MatrixXd& points, Eigen::Index i,
                        const Eigen::MatrixXd& centroids, Eigen::Index k) {
  return (points.row(i) - centroids.row(k)).squaredNorm();
}

KMeansResult kmeans_once(const Eigen::MatrixXd& points, int K, int iterations,
                         SplitMix64& rng) {
  const Eigen::Index n = points.rows();
  const Eigen::Index d = points.cols();
  KMeansResult r;
  r.centroids = Eigen::MatrixXd::Zero(K, d);
  r.labels.assign(static_cast<std::size_t>(n), 0);

  // k-means++ seeding.
  std::vector<double> dist(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  Eigen::Index first = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
  r.centroids.row(0) = points.row(first);
  for (int k = 1; k < K; ++k) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      auto& di = dist[static_cast<std::size_t>(i)];
      di = std::min(di, squared_distance(points, i, r.centroids, k - 1));
      total += di;
    }
    Eigen::Index pick = 0;
    if (total > 0.0) {
      double u = rng.uniform() * total;
      pick = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        u -= dist[static_cast<std::size_t>(i)];
        if (u < 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
    }
    r.centroids.row(k) = points.row(pick);
  }

  std::vector<Eigen::Index> counts(static_cast<std::size_t>(K));
  for (int iter = 0; iter < std::max(iterations, 1); ++iter) {
    bool changed = iter == 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = squared_distance(points, i, r.centroids, 0);
      for (int k = 1; k < K; ++k) {
        const double dk = squared_distance(points, i, r.centroids, k);
        if (dk < best_d) {
          best_d = dk;
          best = k;
        }
      }
      if (r.labels[static_cast<std::size_t>(i)] != best) changed = true;
      r.labels[static_cast<std::size_t>(i)] = best;
    }
    if (!changed) break;
    r.centroids.setZero();
    std::fill(counts.begin(), counts.end(), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const int k = r.labels[static_cast<std::size_t>(i)];
      r.centroids.row(k) += points.row(i);
      ++counts[static_cast<std::size_t>(k)];
    }
    for (int k = 0; k < K; ++k) {
      if (counts[static_cast<std::size_t>(k)] > 0) {
        r.centroids.row(k) /= static_cast<double>(counts[static_cast<std::size_t>(k)]);
      }
    }
    for (int k = 0; k < K; ++k) {
      if (counts[static_cast<std::size_t>(k)] > 0) continue;
      // Reseed at the point worst served by its current centroid.
      Eigen::Index far = -1;
      double far_d = -1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const int own = r.labels[static_cast<std::size_t>(i)];
        if (counts[static_cast<std::size_t>(own)] <= 1) continue;
        const double di = squared_distance(points, i, r.centroids, own);
        if (di > far_d) {
          far_d = di;
          far = i;
        }
      }
      if (far < 0) continue;
      --counts[static_cast<std::size_t>(r.labels[static_cast<std::size_t>(far)])];
      r.labels[static_cast<std::size_t>(far)] = k;
      counts[static_cast<std::size_t>(k)] = 1;
      r.centroids.row(k) = points.row(far);
    }
  }
  r.inertia = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    r.inertia += squared_distance(points, i, r.centroids, r.labels[static_cast<std::size_t>(i)]);
  }
  return r;
}

}  // namespace

SymmetricCsr SymmetricCsr::from_upper(std::size_t n, std::vector<Entry> entries) {
  std::vector<Entry> both;
  both.reserve(entries.size() * 2);
  for (const Entry& e : entries) {
    if (e.i >= n || e.j >= n) throw std::out_of_range("matrix entry outside n");
    if (e.i == e.j) throw std::invalid_argument("diagonal entries are not stored");
    if (e.w == 0.0) continue;
    both.push_back(e);
    both.push_back({e.j, e.i, e.w});
  }
  std::sort(both.begin(), both.end(), [](const Entry& a, const Entry& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
  SymmetricCsr m;
  m.row_ptr_.assign(n + 1, 0);
  for (std::size_t p = 0; p < both.size(); ++p) {
    const Entry& e = both[p];
    if (p > 0 && both[p - 1].i == e.i && both[p - 1].j == e.j) {
      m.vals_.back() += e.w;
      continue;
    }
    m.cols_.push_back(e.j);
    m.vals_.push_back(e.w);
    ++m.row_ptr_[e.i + 1];
  }
  for (std::size_t i = 1; i <= n; ++i) m.row_ptr_[i] += m.row_ptr_[i - 1];
  return m;
}

double SymmetricCsr::weighted_degree(std::size_t i) const {
  double s = 0.0;
  for (double w : weights(i)) s += std::abs(w);
  return s;
}

void SymmetricCsr::multiply(std::span<const double> x, std::span<double> y) const {
  for (std::size_t i = 0; i < n(); ++i) {
    double s = 0.0;
    for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) s += vals_[p] * x[cols_[p]];
    y[i] = s;
  }
}

double SymmetricCsr::inf_norm() const {
  double m = 0.0;
  for (std::size_t i = 0; i < n(); ++i) m = std::max(m, weighted_degree(i));
  return m;
}

SymmetricCsr SymmetricCsr::with_zeroed(const std::vector<bool>& drop) const {
  std::vector<Entry> upper;
  for (std::size_t i = 0; i < n(); ++i) {
    if (drop[i]) continue;
    for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
      if (cols_[p] > i && !drop[cols_[p]]) {
        upper.push_back({static_cast<std::uint32_t>(i), cols_[p], vals_[p]});
      }
    }
  }
  return from_upper(n(), std::move(upper));
}

SymmetricCsr SymmetricCsr::without_node(std::size_t skip) const {
  if (skip >= n()) throw std::out_of_range("node index");
  auto shift = [skip](std::size_t v) { return static_cast<std::uint32_t>(v > skip ? v - 1 : v); };
  std::vector<Entry> upper;
  for (std::size_t i = 0; i < n(); ++i) {
    if (i == skip) continue;
    for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
      if (cols_[p] > i && cols_[p] != skip) {
        upper.push_back({shift(i), shift(cols_[p]), vals_[p]});
      }
    }
  }
  return from_upper(n() - 1, std::move(upper));
}

Eigen::MatrixXd SymmetricCsr::dense() const {
  const auto size = static_cast<Eigen::Index>(n());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(size, size);
  for (std::size_t i = 0; i < n(); ++i) {
    for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
      d(static_cast<Eigen::Index>(i), cols_[p]) = vals_[p];
    }
  }
  return d;
}

SymmetricCsr binarize(const SnapshotArray& x) {
  std::vector<SymmetricCsr::Entry> upper;
  for (std::size_t i = 0; i < x.N(); ++i) {
    for (std::size_t j = i + 1; j < x.N(); ++j) {
      const auto pat = x.pattern(i, j);
      if (std::any_of(pat.begin(), pat.end(), [](std::uint8_t s) { return s != 0; })) {
        upper.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), 1.0});
      }
    }
  }
  return SymmetricCsr::from_upper(x.N(), std::move(upper));
}

SymmetricCsr snapshot_adjacency(const SnapshotArray& x, std::size_t t) {
  if (t >= x.T()) throw std::out_of_range("snapshot index");
  std::vector<SymmetricCsr::Entry> upper;
  for (std::size_t i = 0; i < x.N(); ++i) {
    for (std::size_t j = i + 1; j < x.N(); ++j) {
      if (x.at(t, i, j) != 0) {
        upper.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), 1.0});
      }
    }
  }
  return SymmetricCsr::from_upper(x.N(), std::move(upper));
}

SymmetricCsr aggregate(const SnapshotArray& x) {
  std::vector<SymmetricCsr::Entry> upper;
  for (std::size_t i = 0; i < x.N(); ++i) {
    for (std::size_t j = i + 1; j < x.N(); ++j) {
      const auto pat = x.pattern(i, j);
      const auto c = std::count_if(pat.begin(), pat.end(), [](std::uint8_t s) { return s != 0; });
      if (c > 0) {
        upper.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j),
                         static_cast<double>(c)});
      }
    }
  }
  return SymmetricCsr::from_upper(x.N(), std::move(upper));
}

Eigenpairs top_eigenpairs(const SymmetricCsr& a, int k, std::uint64_t seed,
                          const LanczosOptions& options) {
  const std::size_t n = a.n();
  if (k < 1) throw std::invalid_argument("need k >= 1 eigenpairs");
  Eigenpairs out;
  if (n == 0) return out;
  const auto kk = static_cast<Eigen::Index>(std::min<std::size_t>(static_cast<std::size_t>(k), n));
  const auto size = static_cast<Eigen::Index>(n);
  const Eigen::Index cap = std::min<Eigen::Index>(size, options.max_iterations);
  const Eigen::Index min_dim =
      std::min<Eigen::Index>(size, std::max<Eigen::Index>(4 * kk, 40));
  const double norm = a.inf_norm();
  const double tol = options.tolerance * std::max(norm, std::numeric_limits<double>::min());
  const double breakdown = 1e-12 * std::max(norm, 1.0);

  SplitMix64 rng(derive_seed(seed, kLanczosStream));
  Eigen::MatrixXd V(size, cap + 1);
  Eigen::VectorXd alpha(cap);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(cap);
  V.col(0) = random_unit(n, rng);
  Eigen::VectorXd w(size);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
  for (Eigen::Index j = 0; j < cap; ++j) {
    a.multiply({V.col(j).data(), n}, {w.data(), n});
    alpha[j] = V.col(j).dot(w);
    w -= alpha[j] * V.col(j);
    if (j > 0) w -= beta[j - 1] * V.col(j - 1);
    orthogonalise(w, V, j + 1);
    double b = w.norm();
    const Eigen::Index m = j + 1;

    if (m >= min_dim) {
      Eigen::VectorXd diag = alpha.head(m);
      Eigen::VectorXd sub = beta.head(std::max<Eigen::Index>(m - 1, 0));
      tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
      std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
      std::iota(order.begin(), order.end(), 0);
      const auto& theta = tri.eigenvalues();
      std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) {
        const double ax = std::abs(theta[x]);
        const double ay = std::abs(theta[y]);
        return ax != ay ? ax > ay : theta[x] > theta[y];
      });
      bool converged = true;
      if (m < size) {
        for (Eigen::Index c = 0; c < kk; ++c) {
          const double residual = b * std::abs(tri.eigenvectors()(m - 1, order[static_cast<std::size_t>(c)]));
          if (residual > tol) {
            converged = false;
            break;
          }
        }
      }
      if (converged) {
        out.values.resize(kk);
        out.vectors.resize(size, kk);
        for (Eigen::Index c = 0; c < kk; ++c) {
          const Eigen::Index idx = order[static_cast<std::size_t>(c)];
          out.values[c] = theta[idx];
          out.vectors.col(c) = V.leftCols(m) * tri.eigenvectors().col(idx);
          out.vectors.col(c).normalize();
        }
        out.iterations = static_cast<int>(m);
        return out;
      }
    }
    if (m == cap) break;
    if (b <= breakdown) {
      // Invariant subspace found: continue from a fresh orthogonal direction.
      Eigen::VectorXd fresh = random_unit(n, rng);
      orthogonalise(fresh, V, m);
      double fn = fresh.norm();
      for (int attempt = 0; fn <= 1e-8 && attempt < 8; ++attempt) {
        fresh = random_unit(n, rng);
        orthogonalise(fresh, V, m);
        fn = fresh.norm();
      }
      V.col(m) = fresh / fn;
      beta[j] = 0.0;
      b = 0.0;
    } else {
      beta[j] = b;
      V.col(m) = w / b;
    }
  }
  throw ConvergenceError("Lanczos did not converge", static_cast<int>(cap));
}

KMeansResult kmeans(const Eigen::MatrixXd& points, int K, int restarts,
                    int iterations, std::uint64_t seed) {
  if (K < 1) throw std::invalid_argument("k-means needs K >= 1");
  if (points.rows() < K) throw std::invalid_argument("k-means needs at least K points");
  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < std::max(restarts, 1); ++r) {
    SplitMix64 rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
    KMeansResult cur = kmeans_once(points, K, iterations, rng);
    if (cur.inertia < best.inertia) best = std::move(cur);
  }
  return best;
}

void SpectralConfig::validate() const {
  if (K < 1) throw std::invalid_argument("spectral clustering needs K >= 1");
  if (!(trim_factor > 0.0)) throw std::invalid_argument("trim factor must be positive");
  if (kmeans_restarts < 1 || kmeans_iters < 1) {
    throw std::invalid_argument("k-means restarts and iterations must be >= 1");
  }
}

Labelling spectral_cluster(const SymmetricCsr& adj, const SpectralConfig& config) {
  config.validate();
  const std::size_t n = adj.n();
  Labelling out(std::vector<int>(n, 0), config.K);
  if (config.K == 1 || n == 0) return out;
  if (n <= static_cast<std::size_t>(config.K)) {
    for (std::size_t i = 0; i < n; ++i) out.labels[i] = static_cast<int>(i);
    return out;
  }
  double mean_degree = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean_degree += adj.weighted_degree(i);
  mean_degree /= static_cast<double>(n);
  std::vector<bool> drop(n, false);
  bool any_drop = false;
  const double cut = config.trim_factor * config.K * mean_degree;
  for (std::size_t i = 0; i < n; ++i) {
    if (mean_degree > 0.0 && adj.weighted_degree(i) > cut) {
      drop[i] = true;
      any_drop = true;
    }
  }
  const SymmetricCsr trimmed = any_drop ? adj.with_zeroed(drop) : adj;
  const Eigenpairs eig = top_eigenpairs(trimmed, config.K, derive_seed(config.seed, kLanczosStream),
                                        config.lanczos);
  const KMeansResult km = kmeans(eig.vectors, config.K, config.kmeans_restarts,
                                 config.kmeans_iters, derive_seed(config.seed, kKMeansStream));
  out.labels = km.labels;
  return out;
}

Labelling leave_one_out_cluster(const SymmetricCsr& adj, std::size_t i,
                                const SpectralConfig& config) {
  if (adj.n() < 3) throw std::invalid_argument("leave-one-out needs N >= 3");
  SpectralConfig local = config;
  local.seed = derive_seed(config.seed, kLeaveOneOutStream, i);
  return spectral_cluster(adj.without_node(i), local);
}

}  // namespace tsbm
