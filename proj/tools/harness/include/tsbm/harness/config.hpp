#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tsbm/recovery.hpp"

namespace tsbm::harness {

/// Invalid configuration or command line; maps to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Scale applied to densities given in a config.
enum class DensityUnit {
  kAbsolute,   // "abs"
  kLogNOverN,  // "logN/N"
  kOneOverN,   // "1/N"
};

double unit_scale(DensityUnit unit, std::size_t N);
/// "abs", "logN/N" or "1/N"; throws UsageError otherwise.
DensityUnit parse_unit(std::string_view s);

/// One binary Markov chain. mu1 (and p01 when present) are read in `unit`;
/// without p01 the chain is the stationary one with P(state 1) = mu1.
struct ChainSpec {
  double mu1 = 0.0;
  double p11 = 0.0;
  std::optional<double> p01;
  DensityUnit unit = DensityUnit::kAbsolute;

  BinaryMarkovChain resolve(std::size_t N) const;
};

enum class ModelKind { kMarkov, kCategorical };

enum class LabelDraw {
  kIid,       // i.i.d. uniform labels
  kBalanced,  // random assignment with block sizes differing by at most one
};

struct ModelSpec {
  ModelKind kind = ModelKind::kMarkov;
  std::size_t N = 100;
  int K = 2;
  std::size_t T = 10;
  LabelDraw labels = LabelDraw::kIid;
  ChainSpec intra;
  ChainSpec inter;
  std::vector<double> f;
  std::vector<double> g;

  /// Throws UsageError on out-of-range sizes or probabilities.
  void validate() const;
  MarkovParams markov() const;
  InteractionKernel kernel() const;
  /// Snapshot count of the generated data (1 for categorical models).
  std::size_t window() const { return kind == ModelKind::kMarkov ? T : 1; }
};

enum class Algorithm {
  kAlg1,
  kAlg1LeaveOneOut,
  kAlg2,
  kAlg3,
  kAlg4,
  kAlg5,
  kAlg6,
  kMle,
  kUnionSpectral,
  kAggregateSpectral,
  kSquaredAdjacency,
};

std::string_view algorithm_name(Algorithm a);
std::optional<Algorithm> parse_algorithm(std::string_view name);
bool is_online(Algorithm a);
/// Needs the model's kernel or chain parameters.
bool needs_parameters(Algorithm a);

/// Starting labelling of an online algorithm.
enum class InitKind {
  kSpectral,   // spectral clustering of the first snapshot
  kRandom,     // uniform random guess
  kPerturbed,  // truth with a fixed fraction of labels changed
};

std::string_view init_name(InitKind k);

struct AlgorithmSpec {
  Algorithm algorithm = Algorithm::kAlg2;
  InitKind init = InitKind::kSpectral;
  double flip_fraction = 0.25;
  OnlineOptions online{};
  SpectralConfig spectral{};
  /// Column value in the CSV; defaults to the algorithm name, plus the
  /// initialisation for online algorithms.
  std::string label;

  std::string display_name() const;
};

struct ExperimentConfig {
  ModelSpec model;
  std::vector<AlgorithmSpec> algorithms;
  int trials = 1;
  std::uint64_t seed = 1;
  std::filesystem::path out;
  bool deterministic = false;
  /// Worker threads; 0 picks the hardware concurrency.
  unsigned threads = 0;

  void validate() const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& c);
ExperimentConfig load_config(const std::filesystem::path& path);

/// "a,b,c" to doubles; throws UsageError on malformed input.
std::vector<double> parse_list(std::string_view text);

}  // namespace tsbm::harness
