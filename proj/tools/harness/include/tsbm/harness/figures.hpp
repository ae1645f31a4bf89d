#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "tsbm/harness/config.hpp"
#include "tsbm/markov.hpp"

namespace tsbm::harness {

/// Built-in experiment definitions for the figures of the simulation study.
/// Panels are lettered from 'a'. Every online run uses the in-place
/// (asynchronous) sweep.
struct FigureOptions {
  /// Trials per panel or grid point; empty picks the figure default.
  std::optional<int> trials;
  std::uint64_t seed = 1;
  bool deterministic = false;
  unsigned threads = 0;
  /// Threshold definition used by figure 2.
  ThresholdConvention convention = ThresholdConvention::kBhattacharyya;
  /// Grid spacing of figures 2 and 3; empty picks the figure default.
  std::optional<double> grid_step;
  std::filesystem::path out_dir = ".";
};

int default_trials(int figure);
/// Number of panels of a figure; throws UsageError for ids outside 2..7.
int panel_count(int figure);

/// Panel mu1 of figures 2 and 3, in units of log N / N.
double grid_mu1(char panel);

AlgorithmSpec online_algorithm(Algorithm a, InitKind init);

ModelSpec fig3_model(char panel, double p11, double q11);
ModelSpec fig4_model(char panel);
ModelSpec fig5_model(char panel);
ModelSpec fig6_model(char panel);
/// Panel a sweeps Q11 with P11 = 1; panel b sweeps P11 with i.i.d.
/// inter-block patterns (Q11 = nu1).
ModelSpec fig7_model(char panel, double value);
std::vector<double> fig7_grid(char panel);
std::vector<AlgorithmSpec> fig7_algorithms();

/// Writes the CSV bundle of one figure into options.out_dir and returns the
/// paths in write order.
std::vector<std::filesystem::path> replicate_figure(int figure, const FigureOptions& options);

}  // namespace tsbm::harness
