#include "tsbm/sbm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "tsbm/rng.hpp"

namespace tsbm {

namespace {

constexpr std::uint64_t kLabelStream = 0x6c6162656cULL;
constexpr std::uint64_t kPairStream = 0x70616972ULL;

double safe_log(double p) {
  return p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity();
}

}  // namespace

void Labelling::validate() const {
  if (K < 1) throw std::invalid_argument("K must be >= 1");
  for (int l : labels) {
    if (l < 0 || l >= K) {
      throw std::invalid_argument("label " + std::to_string(l) +
                                  " outside [0, " + std::to_string(K) + ")");
    }
  }
}

std::vector<std::size_t> Labelling::block_sizes() const {
  std::vector<std::size_t> sizes(static_cast<std::size_t>(std::max(K, 0)), 0);
  for (int l : labels) ++sizes.at(static_cast<std::size_t>(l));
  return sizes;
}

SnapshotArray::SnapshotArray(std::size_t N, std::size_t T, int alphabet)
    : n_(N), t_(T), alphabet_(alphabet) {
  if (alphabet < 2 || alphabet > 256) {
    throw std::invalid_argument("alphabet size must lie in [2, 256]");
  }
  data_.assign(pair_count() * t_, 0);
}

void SnapshotArray::set(std::size_t t, std::size_t i, std::size_t j,
                        std::uint8_t symbol) {
  if (i == j) throw std::invalid_argument("diagonal entries are fixed at 0");
  if (i >= n_ || j >= n_ || t >= t_) throw std::out_of_range("snapshot index");
  if (symbol >= alphabet_) throw std::invalid_argument("symbol outside alphabet");
  data_[pair_index(i, j) * t_ + t] = symbol;
}

SnapshotArray SnapshotArray::prefix(std::size_t T) const {
  if (T > t_) throw std::invalid_argument("prefix longer than the array");
  SnapshotArray out(n_, T, alphabet_);
  for (std::size_t p = 0; p < pair_count(); ++p) {
    std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(p * t_), T,
                out.data_.begin() + static_cast<std::ptrdiff_t>(p * T));
  }
  return out;
}

std::size_t SnapshotArray::nonzero_count() const {
  return static_cast<std::size_t>(
      std::count_if(data_.begin(), data_.end(), [](std::uint8_t s) { return s != 0; }));
}

MarkovLaw::MarkovLaw(BinaryMarkovChain chain, std::size_t T)
    : chain_(chain), t_(T) {
  chain_.validate();
  if (T < 1) throw std::invalid_argument("T must be >= 1");
}

double MarkovLaw::log_density(std::span<const std::uint8_t> pattern) const {
  if (pattern.size() != t_) throw std::invalid_argument("pattern length != T");
  double s = safe_log(chain_.mu(pattern[0] ? 1 : 0));
  for (std::size_t k = 1; k < pattern.size(); ++k) {
    s += safe_log(chain_.P(pattern[k - 1] ? 1 : 0, pattern[k] ? 1 : 0));
  }
  return s;
}

void MarkovLaw::sample(std::uint64_t key, std::span<std::uint8_t> out) const {
  SplitMix64 rng(key);
  int state = rng.bernoulli(chain_.mu1) ? 1 : 0;
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (k > 0) state = rng.bernoulli(state == 1 ? chain_.p11 : chain_.p01) ? 1 : 0;
    out[k] = static_cast<std::uint8_t>(state);
  }
}

CategoricalLaw::CategoricalLaw(FiniteDistribution dist, std::size_t T)
    : dist_(std::move(dist)), t_(T) {
  if (T < 1) throw std::invalid_argument("T must be >= 1");
  if (dist_.size() < 2 || dist_.size() > 256) {
    throw std::invalid_argument("categorical alphabet must have 2..256 symbols");
  }
  cdf_.resize(dist_.size());
  std::partial_sum(dist_.probs().begin(), dist_.probs().end(), cdf_.begin());
  // The last positive symbol absorbs rounding at the top of the range.
  for (std::size_t k = dist_.size(); k-- > 0;) {
    cdf_[k] = 1.0;
    if (dist_[k] > 0.0) break;
  }
}

double CategoricalLaw::log_density(std::span<const std::uint8_t> pattern) const {
  if (pattern.size() != t_) throw std::invalid_argument("pattern length != T");
  double s = 0.0;
  for (std::uint8_t x : pattern) {
    if (x >= dist_.size()) return -std::numeric_limits<double>::infinity();
    s += safe_log(dist_[x]);
  }
  return s;
}

void CategoricalLaw::sample(std::uint64_t key, std::span<std::uint8_t> out) const {
  SplitMix64 rng(key);
  for (auto& x : out) {
    const double u = rng.uniform();
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    x = static_cast<std::uint8_t>(std::min<std::ptrdiff_t>(
        it - cdf_.begin(), static_cast<std::ptrdiff_t>(cdf_.size()) - 1));
  }
}

void InteractionKernel::validate() const {
  if (!intra || !inter) throw std::invalid_argument("kernel laws missing");
  if (intra->T() != inter->T() || intra->alphabet() != inter->alphabet()) {
    throw std::invalid_argument("intra and inter laws live on different spaces");
  }
}

InteractionKernel markov_kernel(const BinaryMarkovChain& intra,
                                const BinaryMarkovChain& inter, std::size_t T) {
  return {std::make_shared<MarkovLaw>(intra, T),
          std::make_shared<MarkovLaw>(inter, T)};
}

InteractionKernel categorical_kernel(const FiniteDistribution& f,
                                     const FiniteDistribution& g) {
  if (f.size() != g.size()) throw std::invalid_argument("alphabet mismatch");
  return {std::make_shared<CategoricalLaw>(f), std::make_shared<CategoricalLaw>(g)};
}

Labelling sample_labelling(std::size_t N, int K, std::uint64_t seed,
                           std::span<const double> weights) {
  if (K < 1) throw std::invalid_argument("K must be >= 1");
  if (static_cast<std::size_t>(K) > N) throw std::invalid_argument("need K <= N");
  SplitMix64 rng(derive_seed(seed, kLabelStream));
  Labelling sigma(std::vector<int>(N, 0), K);
  if (weights.empty()) {
    for (auto& l : sigma.labels) l = static_cast<int>(rng.below(static_cast<std::uint64_t>(K)));
    return sigma;
  }
  if (weights.size() != static_cast<std::size_t>(K)) {
    throw std::invalid_argument("need one weight per block");
  }
  std::vector<double> cdf(weights.size());
  double total = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (!(weights[k] >= 0.0) || !std::isfinite(weights[k])) {
      throw std::invalid_argument("block weights must be finite and >= 0");
    }
    total += weights[k];
    cdf[k] = total;
  }
  if (!(total > 0.0)) throw std::invalid_argument("block weights sum to zero");
  for (auto& l : sigma.labels) {
    const double u = rng.uniform() * total;
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    l = static_cast<int>(std::min<std::ptrdiff_t>(it - cdf.begin(), K - 1));
    while (weights[static_cast<std::size_t>(l)] == 0.0) --l;  // rounding at the top
  }
  return sigma;
}

SnapshotArray sample_snapshots(const Labelling& sigma,
                               const InteractionKernel& kernel,
                               std::uint64_t seed) {
  sigma.validate();
  kernel.validate();
  const std::size_t N = sigma.size();
  SnapshotArray x(N, kernel.intra->T(), kernel.intra->alphabet());
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t j = i + 1; j < N; ++j) {
      kernel.law(sigma[i] == sigma[j])
          .sample(derive_seed(seed, kPairStream, i, j), x.mutable_pattern(i, j));
    }
  }
  return x;
}

SnapshotArray sample_markov_snapshots(const Labelling& sigma,
                                      const BinaryMarkovChain& intra,
                                      const BinaryMarkovChain& inter,
                                      std::size_t T, std::uint64_t seed) {
  return sample_snapshots(sigma, markov_kernel(intra, inter, T), seed);
}

SnapshotArray sample_categorical_snapshots(const Labelling& sigma,
                                           const FiniteDistribution& f,
                                           const FiniteDistribution& g,
                                           std::uint64_t seed) {
  return sample_snapshots(sigma, categorical_kernel(f, g), seed);
}

}  // namespace tsbm
