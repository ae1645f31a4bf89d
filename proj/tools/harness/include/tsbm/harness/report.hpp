#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "tsbm/divergence.hpp"
#include "tsbm/markov.hpp"

namespace tsbm::harness {

/// Slack parameters of the upper bound: zeta = 1/21 and
/// eps = zeta / (2 (K - 1)), so the entropy exponent stays positive.
BoundInputs default_bound_inputs(std::int64_t N, int K, double I, double J);

struct BoundValues {
  double lower_linear = 0.0;
  double lower_quadratic = 0.0;
  double i21_linear = 0.0;
  double i21_quadratic = 0.0;
  double kappa = 0.0;
  UpperBoundTerms upper{};
  double eps = 0.0;
  double zeta = 0.0;
};

BoundValues evaluate_bounds(std::int64_t N, int K, double I, double J);

/// Divergence quantities of one homogeneous model, with the threshold
/// K log N / N and the error-rate bounds that use them.
struct DivergenceReport {
  std::int64_t N = 0;
  int K = 2;
  /// log N / N, the critical density.
  double rho_crit = 0.0;
  double threshold = 0.0;

  double I = 0.0;  // D_1/2(f, g)
  double J = 0.0;
  double hellinger_sq = 0.0;
  /// D^s_3/2 / D^s_1/2; empty when the denominator vanishes.
  std::optional<double> beta_half;
  BoundValues bounds{};

  // Markov models only.
  std::optional<std::int64_t> T;
  std::optional<BinaryMarkovChain> intra;
  std::optional<BinaryMarkovChain> inter;
  std::optional<double> bhattacharyya;  // -log Z = I / 2
  std::optional<SparseApproximation> approx;
  /// I~(T) and its per-snapshot long-time rate, in units of log N / N.
  std::optional<double> i_tilde;
  std::optional<double> i_tilde_rate;
  std::optional<std::int64_t> t_star_exact;
  std::optional<std::int64_t> t_star_itilde;
  std::optional<std::int64_t> t_star_bhattacharyya;
  bool t_star_computed = false;
};

DivergenceReport markov_report(const BinaryMarkovChain& intra, const BinaryMarkovChain& inter,
                               std::int64_t T, std::int64_t N, int K);
DivergenceReport categorical_report(const FiniteDistribution& f, const FiniteDistribution& g,
                                    std::int64_t N, int K);

void write_report_text(std::ostream& out, const DivergenceReport& r);
nlohmann::json report_to_json(const DivergenceReport& r);

/// Inclusive arithmetic grid lo, lo + step, ..., hi (rounded to 1e-9).
std::vector<double> grid_points(double lo, double hi, double step);

struct ThresholdCell {
  double p11 = 0.0;
  double q11 = 0.0;
  std::optional<std::int64_t> t_star;
};

/// T* over a (P11, Q11) grid of stationary chains with P(state 1) = mu1 and
/// nu1, both in units of log N / N.
std::vector<ThresholdCell> threshold_grid(std::int64_t N, int K, double mu1_units,
                                          double nu1_units, const std::vector<double>& p11,
                                          const std::vector<double>& q11,
                                          ThresholdConvention convention);

/// CSV with columns p11,q11,t_star,log10_t_star; missing cells print "inf".
void write_threshold_csv(std::ostream& out, const std::vector<ThresholdCell>& cells,
                         const char* prefix_header = nullptr, const char* prefix = nullptr);

std::optional<ThresholdConvention> parse_convention(std::string_view name);
const char* convention_name(ThresholdConvention c);

}  // namespace tsbm::harness
