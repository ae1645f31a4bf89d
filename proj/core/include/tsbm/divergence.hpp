#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace tsbm {

/// Probability vector over a finite interaction alphabet {0, ..., L-1}.
///
/// Construction validates non-negativity and normalisation: inputs whose sum
/// is within 1e-12 of one are renormalised, anything further off is rejected
/// with std::invalid_argument.
class FiniteDistribution {
 public:
  static constexpr double kNormTolerance = 1e-12;

  explicit FiniteDistribution(std::vector<double> probs);

  static FiniteDistribution bernoulli(double p);
  static FiniteDistribution point_mass(std::size_t size, std::size_t at);
  /// Zero-inflated law (1-p) delta_0 + p * conditional, where `conditional`
  /// lives on symbols 1..L (its index 0 is symbol 1).
  static FiniteDistribution zero_inflated(double p,
                                          const FiniteDistribution& conditional);
  /// Law of the pair (x1, x2) with x1 ~ a, x2 ~ b independent; symbol
  /// index is x1 * b.size() + x2.
  static FiniteDistribution product(const FiniteDistribution& a,
                                    const FiniteDistribution& b);

  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> probs() const noexcept { return probs_; }

  bool operator==(const FiniteDistribution&) const = default;

 private:
  std::vector<double> probs_;
};

/// Renyi divergence D_alpha(f || g) of positive order alpha != 1.
/// Returns +infinity where the defining sum vanishes (alpha < 1, f and g
/// mutually singular) or where f charges a symbol g does not (alpha > 1).
double renyi(double alpha, const FiniteDistribution& f,
             const FiniteDistribution& g);

/// Squared Hellinger distance 1/2 sum (sqrt f - sqrt g)^2, in [0, 1].
double hellinger_sq(const FiniteDistribution& f, const FiniteDistribution& g);

/// Kullback-Leibler divergence; +infinity when supp f is not inside supp g.
double kl(const FiniteDistribution& f, const FiniteDistribution& g);

/// Variance of the log-likelihood ratio log(f/g) under f. Empty when
/// supp f is not inside supp g.
std::optional<double> v_kl(const FiniteDistribution& f,
                           const FiniteDistribution& g);

/// (D_alpha(f||g) + D_alpha(g||f)) / 2.
double renyi_symmetric(double alpha, const FiniteDistribution& f,
                       const FiniteDistribution& g);

/// D^s_{1+r} / D^s_r for r in (0, 1]. Throws std::domain_error when the
/// denominator vanishes; +infinity when the numerator is infinite.
double beta_ratio(double r, const FiniteDistribution& f,
                  const FiniteDistribution& g);

/// Leading term (sqrt p - sqrt q)^2 + 2 sqrt(pq) Hel^2(f~, g~) of D_1/2 for
/// zero-inflated laws with presence probabilities p, q. Only meaningful for
/// p, q small; the neglected remainder is O(max(p,q)^2).
double zero_inflated_renyi_half(double p, double q, double hel_sq_tilde);

/// Z^-1 sum sqrt(fg) log^2(f/g) with Z = sum sqrt(fg). Throws when f and g
/// are mutually singular.
double j_quantity(const FiniteDistribution& f, const FiniteDistribution& g);

/// Leading term of I21 in the lower bound: (1/2 - 1/K) I / K (kLinear) or
/// (1/2 - 1/K) I^2 / K (kQuadratic, the default).
enum class I21Convention { kLinear, kQuadratic };

struct BoundInputs {
  std::int64_t N = 1;
  int K = 1;
  double I = 0.0;
  double J = 0.0;
  double eps = 0.0;
  double zeta = 0.0;
  I21Convention convention = I21Convention::kQuadratic;

  /// Throws std::invalid_argument unless 0 <= eps <= zeta <= 1/21, N, K >= 1
  /// and I, J >= 0.
  void validate() const;
};

double i21(const BoundInputs& in);

/// Lower bound on the minimum mean classification error, clamped at 0.
double lower_bound_error_rate(const BoundInputs& in);

/// kappa = 56 max{K^2 exp(-N I / (8K)), K / N}.
double upper_bound_kappa(std::int64_t N, int K, double I);

struct UpperBoundTerms {
  double exponential = 0.0;   // 8e(K-1) exp(-(1 - zeta - kappa) N I / K)
  double entropy = 0.0;       // K^N exp(-(zeta/(K-1) - eps) (N/K)^2 I / 4)
  double imbalance = 0.0;     // 2K exp(-eps^2 N / (3K))
  double total() const { return exponential + entropy + imbalance; }
};

UpperBoundTerms upper_bound_terms(const BoundInputs& in, double kappa);
double upper_bound_error_rate(const BoundInputs& in, double kappa);

struct ChangeOfMeasureQuantities {
  double i1 = 0.0;
  double i21 = 0.0;
  double i22 = 0.0;
};

/// General evaluation of (I1, I21, I22) for block weights `alpha` over [K],
/// a subset `subset` of [K] (0-based block indices), kernel laws
/// kernel[k][l] and reference laws reference[l].
ChangeOfMeasureQuantities change_of_measure_quantities(
    std::span<const double> alpha, std::span<const int> subset,
    const std::vector<std::vector<FiniteDistribution>>& kernel,
    const std::vector<FiniteDistribution>& reference);

/// Homogeneous kernel, uniform block weights, optimal references:
/// (D_1/2 / K, (1/2 - 1/K) I^2 / K + J / (2K), 0).
ChangeOfMeasureQuantities homogeneous_uniform_quantities(int K,
                                                   const FiniteDistribution& f,
                                                   const FiniteDistribution& g);

/// Tilted law Z^-1 f^a g^(1-a); the optimal reference law for a two-block
/// change of measure. Throws when f and g are mutually singular.
FiniteDistribution tilted(const FiniteDistribution& f,
                          const FiniteDistribution& g, double a);

}  // namespace tsbm
