#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>

namespace tsbm {

/// Two-state Markov chain on {0, 1}: initial law (1 - mu1, mu1) and
/// transition matrix [[1 - p01, p01], [1 - p11, p11]].
struct BinaryMarkovChain {
  double mu1 = 0.0;
  double p01 = 0.0;
  double p11 = 0.0;

  /// Throws std::invalid_argument unless every field lies in [0, 1].
  void validate() const;

  double mu(int a) const { return a == 1 ? mu1 : 1.0 - mu1; }
  double P(int a, int b) const {
    const double to_one = a == 1 ? p11 : p01;
    return b == 1 ? to_one : 1.0 - to_one;
  }
  /// Stationary probability of state 1; NaN for the identity chain.
  double stationary1() const;

  bool operator==(const BinaryMarkovChain&) const = default;
};

/// Stationary chain with P(state 1) = pi1 and P(1 -> 1) = p11. Throws when
/// pi1 is outside (0, 1) or the implied p01 exceeds 1.
BinaryMarkovChain chain_from_stationary(double pi1, double p11);

/// Probability of the path x in {0,1}^T under the chain.
double path_probability(const BinaryMarkovChain& c, std::span<const uint8_t> x);

/// Initial weights r_a and transfer matrix R_ab whose T-1 fold product sums
/// to Z = sum_x f(x)^alpha g(x)^(1-alpha). With f == g and alpha == 1 this is
/// the chain itself.
struct TransferWeights {
  std::array<double, 2> r{};
  std::array<std::array<double, 2>, 2> R{};
};

TransferWeights transfer_weights(double alpha, const BinaryMarkovChain& f,
                                 const BinaryMarkovChain& g);
TransferWeights chain_weights(const BinaryMarkovChain& c);

/// Renyi divergence of order alpha between the path laws of two chains over
/// T snapshots, by the transfer recursion in O(T). The running vector is
/// renormalised every step so Z may be far below the double range.
double markov_renyi_exact(double alpha, const BinaryMarkovChain& f,
                          const BinaryMarkovChain& g, std::int64_t T);

/// Same quantity by enumerating all 2^T paths. T must be in [1, 20].
double markov_renyi_brute(double alpha, const BinaryMarkovChain& f,
                          const BinaryMarkovChain& g, int T);

struct SparseApproximation {
  double value = 0.0;
  /// Guaranteed bound on |exact - value| inside the sparse regime.
  double error_radius = 0.0;
  /// max(mu1, nu1, p01, q01).
  double rho = 0.0;
  /// rho * T <= 0.01; outside it the radius is not a guarantee.
  bool in_regime = false;
};

/// Sparse-chain approximation of D_alpha for alpha in (0, 1), with the
/// geometric transient of the on-state resolved in closed form. Error radius
/// 46 (rho T)^2 / (1 - alpha).
SparseApproximation sparse_renyi_approx(double alpha, const BinaryMarkovChain& f,
                                        const BinaryMarkovChain& g,
                                        std::int64_t T);

/// Order-1/2 form written with H11^2 and Gamma = 1 - sqrt(P11 Q11).
/// Error radius 92 (rho T)^2.
SparseApproximation sparse_renyi_half_approx(const BinaryMarkovChain& f,
                                             const BinaryMarkovChain& g,
                                             std::int64_t T);

/// 1 - sqrt(1-P11) sqrt(1-Q11) / (1 - sqrt(P11 Q11)); zero when both chains
/// are absorbing in state 1.
double h11_sq(double p11, double q11);

/// Upper bound (2a+1)/(a-1) C rho T exp(5 C rho T), C = M^(2a) / (1 - L),
/// L = P11^a Q11^(1-a), on D_alpha for alpha > 1. Throws when L >= 1 or the
/// ratio / density preconditions fail.
double high_order_bound(double alpha, const BinaryMarkovChain& f,
                        const BinaryMarkovChain& g, std::int64_t T, double M,
                        double rho);

/// Threshold quantity over T snapshots in units of the critical density.
/// Sums the geometric transient term by term; gamma must be in (0, 1].
double i_tilde_short(double u, double v, double p01, double q01, double h11_sq,
                     double gamma, std::int64_t T);

/// Per-snapshot rate (sqrt p01 - sqrt q01)^2 + 2 h11^2 sqrt(p01 q01).
double i_tilde_long(double p01, double q01, double h11_sq);

/// Z^-1 sum_x sqrt(f g) log^2(f/g) over path laws, from the second
/// derivative of the transfer sum at order 1/2.
double markov_j(const BinaryMarkovChain& f, const BinaryMarkovChain& g,
                std::int64_t T);

enum class ThresholdConvention {
  kExact,          // D_1/2(f_T, g_T) >= K log N / N
  kITilde,         // I~(T) > K with densities rescaled by log N / N
  kBhattacharyya,  // -log Z(f_T, g_T) >= K log N / N
};

/// Smallest T at which the chosen criterion holds, or empty when it fails
/// for every T <= t_max. Linear scan up to 1000, then doubling and bisection
/// (assumes the criterion is monotone in T beyond the scan range).
std::optional<std::int64_t> t_star(const BinaryMarkovChain& f,
                                   const BinaryMarkovChain& g, std::int64_t N,
                                   int K, ThresholdConvention convention,
                                   std::int64_t t_max = 1000000);

struct PathStats {
  int ones = 0;
  int on_periods = 0;
  int first = 0;
  int last = 0;
  std::array<std::array<int, 2>, 2> transitions{};
};

PathStats path_stats(std::span<const uint8_t> path);

/// Number of paths in {0,1}^T with j on-periods, t ones, x_1 = a, x_T = b.
std::uint64_t count_paths(int j, int t, int a, int b, int T);

/// Weight r_{x1} prod R_{x_{s-1} x_s} shared by every path with the given
/// (j, t, a, b); the transition counts are determined by these four numbers.
double path_class_weight(const TransferWeights& w, int j, int t, int a, int b,
                         int T);

}  // namespace tsbm
