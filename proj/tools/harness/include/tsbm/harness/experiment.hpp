#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "tsbm/harness/config.hpp"

namespace tsbm::harness {

/// Substream indices under a trial seed. cmd_generate and cmd_recover use
/// the same keys, so a generated file replays trial t of an experiment when
/// given derive_seed(master, t).
inline constexpr std::uint64_t kLabelStream = 1;
inline constexpr std::uint64_t kDataStream = 2;
inline constexpr std::uint64_t kInitStream = 3;
inline constexpr std::uint64_t kSpectralStream = 4;

std::uint64_t trial_seed(std::uint64_t master, int trial);

Labelling draw_labels(const ModelSpec& model, std::uint64_t seed);
SnapshotArray draw_snapshots(const ModelSpec& model, const Labelling& sigma,
                             std::uint64_t seed);

/// Truth with round(fraction * N) nodes moved to a different block.
Labelling perturb_labels(const Labelling& truth, double fraction, std::uint64_t seed);

/// Per-snapshot labelling produced by one algorithm run; offline algorithms
/// report a single entry at t = T.
struct Trajectory {
  std::vector<std::size_t> t;
  std::vector<Labelling> labels;
  std::vector<double> seconds;
};

/// Runs one algorithm on one data set. `truth` is read only by the
/// perturbed initialisation. Seeds derive from `seed` via kInitStream and
/// kSpectralStream.
Trajectory run_algorithm(const AlgorithmSpec& spec, const ModelSpec& model,
                         const SnapshotArray& x, const Labelling* truth,
                         std::uint64_t seed);

struct TrialRecord {
  int trial = 0;
  std::uint64_t seed = 0;
  std::string algorithm;
  std::vector<std::size_t> t;
  std::vector<double> accuracy;
  std::vector<std::int64_t> ham_star;
  std::vector<double> seconds;
};

/// Runs every trial on a bounded worker pool; records come back ordered by
/// trial, then by algorithm in config order.
std::vector<TrialRecord> run_experiment(const ExperimentConfig& config);

/// Calls fn(trial) for trial in [0, trials) on `threads` workers (0 picks
/// the hardware concurrency). The first exception in trial order is
/// rethrown after all workers finish.
void parallel_trials(int trials, unsigned threads, const std::function<void(int)>& fn);

/// Long CSV with a parameter-echo header. The timestamp line is omitted and
/// seconds are written as 0 when `deterministic`.
void write_records_csv(std::ostream& out, const std::vector<TrialRecord>& records,
                       const nlohmann::json& echo, bool deterministic);
void write_records_csv(const std::filesystem::path& path,
                       const std::vector<TrialRecord>& records,
                       const nlohmann::json& echo, bool deterministic);

/// Records of one point of a parameter sweep; `prefix` holds the values of
/// the swept columns, already comma-joined.
struct SweepBlock {
  std::string prefix;
  std::vector<TrialRecord> records;
};

/// Long CSV whose rows start with the swept columns named by
/// `prefix_header`, followed by the usual record columns.
void write_sweep_csv(std::ostream& out, std::string_view prefix_header,
                     const std::vector<SweepBlock>& blocks, const nlohmann::json& echo,
                     bool deterministic);

struct SummaryRow {
  std::string algorithm;
  std::size_t t = 0;
  int n = 0;
  double mean = 0.0;
  /// Standard error of the mean; 0 for a single trial.
  double se = 0.0;
};

std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& records);
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);

}  // namespace tsbm::harness
