#pragma once

#include <cstdint>
#include <vector>

#include "tsbm/divergence.hpp"
#include "tsbm/markov.hpp"
#include "tsbm/rng.hpp"
#include "tsbm/sbm.hpp"

namespace tsbm::testing {

// Strictly positive categorical law on `size` symbols.
inline FiniteDistribution random_distribution(SplitMix64& rng, std::size_t size) {
  std::vector<double> p(size);
  double s = 0.0;
  for (double& v : p) {
    v = 0.05 + rng.uniform();
    s += v;
  }
  for (double& v : p) v /= s;
  return FiniteDistribution(std::move(p));
}

inline BinaryMarkovChain random_chain(SplitMix64& rng) {
  return {0.05 + 0.9 * rng.uniform(), 0.05 + 0.9 * rng.uniform(),
          0.05 + 0.9 * rng.uniform()};
}

inline Labelling random_labelling(SplitMix64& rng, std::size_t N, int K) {
  std::vector<int> l(N);
  for (int& v : l) v = static_cast<int>(rng.below(static_cast<std::uint64_t>(K)));
  return {std::move(l), K};
}

}  // namespace tsbm::testing
