#include "tsbm/metrics.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace tsbm {

namespace {

constexpr int kExhaustiveLimit = 8;

void require_same_length(const Labelling& s1, const Labelling& s2) {
  if (s1.size() != s2.size()) {
    throw std::invalid_argument("labellings have different lengths");
  }
}

std::int64_t choose2(std::int64_t n) { return n * (n - 1) / 2; }

struct PairCounts {
  std::int64_t within1 = 0;  // |E(s1)|
  std::int64_t within2 = 0;  // |E(s2)|
  std::int64_t both = 0;     // |E(s1) n E(s2)|
};

PairCounts pair_counts(const Labelling& s1, const Labelling& s2) {
  const ConfusionMatrix c = confusion_matrix(s1, s2);
  PairCounts p;
  std::vector<std::int64_t> rows(static_cast<std::size_t>(c.K), 0);
  std::vector<std::int64_t> cols(static_cast<std::size_t>(c.K), 0);
  for (int k = 0; k < c.K; ++k) {
    for (int l = 0; l < c.K; ++l) {
      const std::int64_t n = c(k, l);
      rows[static_cast<std::size_t>(k)] += n;
      cols[static_cast<std::size_t>(l)] += n;
      p.both += choose2(n);
    }
  }
  for (std::int64_t n : rows) p.within1 += choose2(n);
  for (std::int64_t n : cols) p.within2 += choose2(n);
  return p;
}

std::int64_t trace_under(const ConfusionMatrix& c, const std::vector<int>& perm) {
  std::int64_t t = 0;
  for (int k = 0; k < c.K; ++k) t += c(k, perm[static_cast<std::size_t>(k)]);
  return t;
}

}  // namespace

ConfusionMatrix confusion_matrix(const Labelling& s1, const Labelling& s2) {
  require_same_length(s1, s2);
  s1.validate();
  s2.validate();
  ConfusionMatrix c;
  c.K = std::max(s1.K, s2.K);
  c.counts.assign(static_cast<std::size_t>(c.K) * static_cast<std::size_t>(c.K), 0);
  for (std::size_t i = 0; i < s1.size(); ++i) {
    ++c.counts[static_cast<std::size_t>(s1[i]) * static_cast<std::size_t>(c.K) +
               static_cast<std::size_t>(s2[i])];
  }
  return c;
}

std::int64_t ham(const Labelling& s1, const Labelling& s2) {
  require_same_length(s1, s2);
  std::int64_t d = 0;
  for (std::size_t i = 0; i < s1.size(); ++i) d += s1[i] != s2[i];
  return d;
}

Alignment ham_star_exhaustive(const Labelling& s1, const Labelling& s2) {
  const ConfusionMatrix c = confusion_matrix(s1, s2);
  if (c.K > 10) throw std::invalid_argument("exhaustive alignment limited to K <= 10");
  std::vector<int> perm(static_cast<std::size_t>(c.K));
  std::iota(perm.begin(), perm.end(), 0);
  Alignment best{std::numeric_limits<std::int64_t>::max(), perm};
  const auto n = static_cast<std::int64_t>(s1.size());
  do {
    const std::int64_t d = n - trace_under(c, perm);
    if (d < best.distance) best = {d, perm};
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

std::vector<int> max_weight_assignment(const std::vector<std::int64_t>& weights,
                                       int K) {
  // Hungarian method on costs -w, 1-based potentials.
  const std::int64_t inf = std::numeric_limits<std::int64_t>::max() / 4;
  const auto n = static_cast<std::size_t>(K);
  std::vector<std::int64_t> u(n + 1, 0), v(n + 1, 0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  auto cost = [&](std::size_t i, std::size_t j) {
    return -weights[(i - 1) * n + (j - 1)];
  };
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<std::int64_t> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      std::int64_t delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const std::int64_t cur = cost(i0, j) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(n, 0);
  for (std::size_t j = 1; j <= n; ++j) {
    row_to_col[p[j] - 1] = static_cast<int>(j - 1);
  }
  return row_to_col;
}

Alignment ham_star_assignment(const Labelling& s1, const Labelling& s2) {
  const ConfusionMatrix c = confusion_matrix(s1, s2);
  std::vector<int> perm = max_weight_assignment(c.counts, c.K);
  const auto n = static_cast<std::int64_t>(s1.size());
  return {n - trace_under(c, perm), std::move(perm)};
}

Alignment ham_star(const Labelling& s1, const Labelling& s2) {
  if (std::max(s1.K, s2.K) <= kExhaustiveLimit) return ham_star_exhaustive(s1, s2);
  return ham_star_assignment(s1, s2);
}

std::int64_t pair_set_difference(const Labelling& s1, const Labelling& s2) {
  const PairCounts p = pair_counts(s1, s2);
  return p.within1 - p.both;
}

std::int64_t mirkin(const Labelling& s1, const Labelling& s2) {
  const PairCounts p = pair_counts(s1, s2);
  return 2 * (p.within1 + p.within2 - 2 * p.both);
}

double rand_index(const Labelling& s1, const Labelling& s2) {
  require_same_length(s1, s2);
  const auto n = static_cast<std::int64_t>(s1.size());
  if (n < 2) return 1.0;
  const PairCounts p = pair_counts(s1, s2);
  // Agreements: together in both, plus apart in both.
  const std::int64_t apart_both = choose2(n) - p.within1 - p.within2 + p.both;
  return static_cast<double>(p.both + apart_both) / static_cast<double>(choose2(n));
}

std::optional<std::vector<int>> unique_alignment(const Labelling& s1,
                                                 const Labelling& s2) {
  const ConfusionMatrix c = confusion_matrix(s1, s2);
  const auto K = static_cast<std::size_t>(c.K);
  std::int64_t n_min = std::numeric_limits<std::int64_t>::max();
  for (std::size_t k = 0; k < K; ++k) {
    std::int64_t row = 0;
    for (std::size_t l = 0; l < K; ++l) row += c(static_cast<int>(k), static_cast<int>(l));
    n_min = std::min(n_min, row);
  }
  // tau maps s2's label l to the s1 block that l dominates.
  std::vector<int> tau(K, -1);
  for (std::size_t k = 0; k < K; ++k) {
    std::size_t best = 0;
    for (std::size_t l = 1; l < K; ++l) {
      if (c(static_cast<int>(k), static_cast<int>(l)) >
          c(static_cast<int>(k), static_cast<int>(best))) {
        best = l;
      }
    }
    if (tau[best] != -1) return std::nullopt;
    tau[best] = static_cast<int>(k);
  }
  std::int64_t agree = 0;
  for (std::size_t l = 0; l < K; ++l) agree += c(tau[l], static_cast<int>(l));
  const std::int64_t d = static_cast<std::int64_t>(s1.size()) - agree;
  if (2 * d < n_min) return tau;
  return std::nullopt;
}

Labelling relabel(const Labelling& s, const std::vector<int>& perm) {
  Labelling out = s;
  out.K = static_cast<int>(perm.size());
  for (auto& l : out.labels) l = perm.at(static_cast<std::size_t>(l));
  return out;
}

double accuracy(const Labelling& truth, const Labelling& estimate) {
  require_same_length(truth, estimate);
  if (truth.size() == 0) return 1.0;
  return 1.0 - static_cast<double>(ham_star(truth, estimate).distance) /
                   static_cast<double>(truth.size());
}

}  // namespace tsbm
