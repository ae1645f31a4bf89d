#include "tsbm/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace tsbm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_same_alphabet(const FiniteDistribution& f,
                           const FiniteDistribution& g) {
  if (f.size() != g.size()) {
    throw std::invalid_argument("alphabet mismatch: " +
                                std::to_string(f.size()) + " vs " +
                                std::to_string(g.size()));
  }
}

void require_order(double alpha) {
  if (!(alpha > 0.0) || alpha == 1.0 || !std::isfinite(alpha)) {
    throw std::invalid_argument("Renyi order must be positive, finite and != 1");
  }
}

// log sum_x f(x)^alpha g(x)^(1-alpha), max-factored. Returns +inf when a
// symbol with f > 0 = g is met at alpha > 1, -inf when the sum vanishes.
double log_hellinger_integral(double alpha, const FiniteDistribution& f,
                              const FiniteDistribution& g) {
  std::vector<double> terms;
  terms.reserve(f.size());
  for (std::size_t x = 0; x < f.size(); ++x) {
    const double fx = f[x];
    const double gx = g[x];
    if (fx == 0.0) continue;  // 0^alpha = 0 for alpha > 0
    if (gx == 0.0) {
      if (alpha > 1.0) return kInf;
      continue;
    }
    terms.push_back(alpha * std::log(fx) + (1.0 - alpha) * std::log(gx));
  }
  if (terms.empty()) return -kInf;
  const double m = *std::max_element(terms.begin(), terms.end());
  double s = 0.0;
  for (double t : terms) s += std::exp(t - m);
  return m + std::log(s);
}

double bhattacharyya_coefficient(const FiniteDistribution& f,
                                 const FiniteDistribution& g) {
  double z = 0.0;
  for (std::size_t x = 0; x < f.size(); ++x) z += std::sqrt(f[x] * g[x]);
  return z;
}

}  // namespace

FiniteDistribution::FiniteDistribution(std::vector<double> probs)
    : probs_(std::move(probs)) {
  if (probs_.empty()) {
    throw std::invalid_argument("distribution needs at least one symbol");
  }
  double sum = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw std::invalid_argument("probabilities must be finite and >= 0");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kNormTolerance) {
    throw std::invalid_argument("probabilities sum to " + std::to_string(sum));
  }
  for (double& p : probs_) p /= sum;
}

FiniteDistribution FiniteDistribution::bernoulli(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("Bernoulli mean outside [0, 1]");
  }
  return FiniteDistribution({1.0 - p, p});
}

FiniteDistribution FiniteDistribution::point_mass(std::size_t size,
                                                  std::size_t at) {
  if (at >= size) throw std::invalid_argument("point mass outside alphabet");
  std::vector<double> p(size, 0.0);
  p[at] = 1.0;
  return FiniteDistribution(std::move(p));
}

FiniteDistribution FiniteDistribution::zero_inflated(
    double p, const FiniteDistribution& conditional) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("presence probability outside [0, 1]");
  }
  std::vector<double> probs(conditional.size() + 1);
  probs[0] = 1.0 - p;
  for (std::size_t x = 0; x < conditional.size(); ++x) {
    probs[x + 1] = p * conditional[x];
  }
  return FiniteDistribution(std::move(probs));
}

FiniteDistribution FiniteDistribution::product(const FiniteDistribution& a,
                                               const FiniteDistribution& b) {
  std::vector<double> probs;
  probs.reserve(a.size() * b.size());
  for (double pa : a.probs()) {
    for (double pb : b.probs()) probs.push_back(pa * pb);
  }
  return FiniteDistribution(std::move(probs));
}

double renyi(double alpha, const FiniteDistribution& f,
             const FiniteDistribution& g) {
  require_order(alpha);
  require_same_alphabet(f, g);
  if (alpha == 0.5) {
    // 1 - Z = Hel^2 avoids cancellation for nearly identical laws; far apart
    // laws go through the log sum so a vanishing Z stays exact.
    const double h = hellinger_sq(f, g);
    if (h < 0.5) return -2.0 * std::log1p(-h);
  }
  const double log_z = log_hellinger_integral(alpha, f, g);
  if (log_z == kInf) return kInf;
  if (log_z == -kInf) return kInf;  // alpha < 1, mutually singular
  return std::max(0.0, log_z / (alpha - 1.0));
}

double hellinger_sq(const FiniteDistribution& f, const FiniteDistribution& g) {
  require_same_alphabet(f, g);
  double s = 0.0;
  for (std::size_t x = 0; x < f.size(); ++x) {
    const double d = std::sqrt(f[x]) - std::sqrt(g[x]);
    s += d * d;
  }
  return std::clamp(0.5 * s, 0.0, 1.0);
}

double kl(const FiniteDistribution& f, const FiniteDistribution& g) {
  require_same_alphabet(f, g);
  double s = 0.0;
  for (std::size_t x = 0; x < f.size(); ++x) {
    if (f[x] == 0.0) continue;
    if (g[x] == 0.0) return kInf;
    s += f[x] * std::log(f[x] / g[x]);
  }
  return std::max(0.0, s);
}

std::optional<double> v_kl(const FiniteDistribution& f,
                           const FiniteDistribution& g) {
  require_same_alphabet(f, g);
  double first = 0.0;
  double second = 0.0;
  for (std::size_t x = 0; x < f.size(); ++x) {
    if (f[x] == 0.0) continue;
    if (g[x] == 0.0) return std::nullopt;
    const double l = std::log(f[x] / g[x]);
    first += f[x] * l;
    second += f[x] * l * l;
  }
  return std::max(0.0, second - first * first);
}

double renyi_symmetric(double alpha, const FiniteDistribution& f,
                       const FiniteDistribution& g) {
  return 0.5 * (renyi(alpha, f, g) + renyi(alpha, g, f));
}

double beta_ratio(double r, const FiniteDistribution& f,
                  const FiniteDistribution& g) {
  if (!(r > 0.0 && r <= 1.0)) {
    throw std::invalid_argument("beta ratio needs r in (0, 1]");
  }
  // r == 1 is the KL order; use the symmetric KL for the denominator.
  const double denominator =
      r == 1.0 ? 0.5 * (kl(f, g) + kl(g, f)) : renyi_symmetric(r, f, g);
  const double numerator = renyi_symmetric(1.0 + r, f, g);
  if (numerator == kInf) return kInf;
  if (denominator == 0.0) {
    throw std::domain_error("beta ratio undefined: D^s_r vanishes");
  }
  return numerator / denominator;
}

double zero_inflated_renyi_half(double p, double q, double hel_sq_tilde) {
  if (!(p >= 0.0 && p <= 1.0 && q >= 0.0 && q <= 1.0)) {
    throw std::invalid_argument("presence probabilities outside [0, 1]");
  }
  if (!(hel_sq_tilde >= 0.0 && hel_sq_tilde <= 1.0)) {
    throw std::invalid_argument("squared Hellinger distance outside [0, 1]");
  }
  const double d = std::sqrt(p) - std::sqrt(q);
  return d * d + 2.0 * std::sqrt(p * q) * hel_sq_tilde;
}

double j_quantity(const FiniteDistribution& f, const FiniteDistribution& g) {
  require_same_alphabet(f, g);
  const double z = bhattacharyya_coefficient(f, g);
  if (z == 0.0) {
    throw std::domain_error("J undefined for mutually singular laws");
  }
  double s = 0.0;
  for (std::size_t x = 0; x < f.size(); ++x) {
    if (f[x] == 0.0 || g[x] == 0.0) continue;  // sqrt(fg) = 0 kills the term
    const double l = std::log(f[x] / g[x]);
    s += std::sqrt(f[x] * g[x]) * l * l;
  }
  return s / z;
}

void BoundInputs::validate() const {
  if (N < 1 || K < 1) throw std::invalid_argument("N and K must be >= 1");
  if (!(I >= 0.0) || !(J >= 0.0)) {
    throw std::invalid_argument("I and J must be non-negative");
  }
  if (!(eps >= 0.0 && eps <= zeta && zeta <= 1.0 / 21.0)) {
    throw std::invalid_argument("need 0 <= eps <= zeta <= 1/21");
  }
}

double i21(const BoundInputs& in) {
  const double k_inv = 1.0 / in.K;
  const double lead =
      in.convention == I21Convention::kLinear ? in.I : in.I * in.I;
  return (0.5 - k_inv) * k_inv * lead + 0.5 * k_inv * in.J;
}

double lower_bound_error_rate(const BoundInputs& in) {
  in.validate();
  if (in.N < 2 || in.K < 2) {
    throw std::invalid_argument("lower bound needs N, K >= 2");
  }
  const double n = static_cast<double>(in.N);
  const double k = static_cast<double>(in.K);
  const double v = std::max(0.0, i21(in));
  const double first =
      std::exp(-n / k * in.I - std::sqrt(8.0 * n * v)) / (84.0 * k * k * k);
  const double second = std::exp(-n / (8.0 * k)) / 6.0;
  return std::clamp(first - second, 0.0, 1.0);
}

double upper_bound_kappa(std::int64_t N, int K, double I) {
  const double n = static_cast<double>(N);
  const double k = static_cast<double>(K);
  return 56.0 * std::max(k * k * std::exp(-n * I / (8.0 * k)), k / n);
}

UpperBoundTerms upper_bound_terms(const BoundInputs& in, double kappa) {
  in.validate();
  if (in.K < 2) throw std::invalid_argument("upper bound needs K >= 2");
  const double n = static_cast<double>(in.N);
  const double k = static_cast<double>(in.K);
  UpperBoundTerms terms;
  terms.exponential =
      8.0 * M_E * (k - 1.0) * std::exp(-(1.0 - in.zeta - kappa) * n / k * in.I);
  const double rate = 0.25 * (in.zeta / (k - 1.0) - in.eps) * (n / k) * (n / k);
  // K^N e^{-rate I}: combine in the log domain, 0 * inf counts as inf.
  const double log_entropy = n * std::log(k) - rate * in.I;
  terms.entropy = std::exp(log_entropy);
  terms.imbalance = 2.0 * k * std::exp(-in.eps * in.eps * n / (3.0 * k));
  return terms;
}

double upper_bound_error_rate(const BoundInputs& in, double kappa) {
  return upper_bound_terms(in, kappa).total();
}

ChangeOfMeasureQuantities change_of_measure_quantities(
    std::span<const double> alpha, std::span<const int> subset,
    const std::vector<std::vector<FiniteDistribution>>& kernel,
    const std::vector<FiniteDistribution>& reference) {
  const std::size_t K = alpha.size();
  if (kernel.size() != K || reference.size() != K) {
    throw std::invalid_argument("kernel/reference size must match K");
  }
  for (const auto& row : kernel) {
    if (row.size() != K) throw std::invalid_argument("kernel must be K x K");
  }
  std::vector<double> alpha_star(K, 0.0);
  double mass = 0.0;
  for (int k : subset) {
    if (k < 0 || static_cast<std::size_t>(k) >= K) {
      throw std::invalid_argument("subset index out of range");
    }
    mass += alpha[k];
  }
  if (!(mass > 0.0)) throw std::invalid_argument("subset carries no mass");
  for (int k : subset) alpha_star[k] = alpha[k] / mass;

  ChangeOfMeasureQuantities out;
  double mean_a = 0.0;
  double mean_a2 = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    if (alpha_star[k] == 0.0) continue;
    double a_k = 0.0;
    double d2 = 0.0;
    double v_sum = 0.0;
    for (std::size_t l = 0; l < K; ++l) {
      const double d = kl(reference[l], kernel[k][l]);
      const auto v = v_kl(reference[l], kernel[k][l]);
      if (!v) {
        return {kInf, kInf, kInf};
      }
      a_k += alpha[l] * d;
      d2 += alpha[l] * d * d;
      v_sum += alpha[l] * *v;
    }
    const double b_k = d2 - a_k * a_k;
    out.i1 += alpha_star[k] * a_k;
    out.i21 += alpha_star[k] * (v_sum + b_k);
    mean_a += alpha_star[k] * a_k;
    mean_a2 += alpha_star[k] * a_k * a_k;
  }
  out.i22 = std::max(0.0, mean_a2 - mean_a * mean_a);
  return out;
}

ChangeOfMeasureQuantities homogeneous_uniform_quantities(
    int K, const FiniteDistribution& f, const FiniteDistribution& g) {
  if (K < 1) throw std::invalid_argument("K must be >= 1");
  const double I = renyi(0.5, f, g);
  const double J = j_quantity(f, g);
  const double k_inv = 1.0 / K;
  return {k_inv * I, (0.5 - k_inv) * k_inv * I * I + 0.5 * k_inv * J, 0.0};
}

FiniteDistribution tilted(const FiniteDistribution& f,
                          const FiniteDistribution& g, double a) {
  require_same_alphabet(f, g);
  std::vector<double> w(f.size(), 0.0);
  double z = 0.0;
  for (std::size_t x = 0; x < f.size(); ++x) {
    if (f[x] > 0.0 && g[x] > 0.0) {
      w[x] = std::exp(a * std::log(f[x]) + (1.0 - a) * std::log(g[x]));
    }
    z += w[x];
  }
  if (z == 0.0) throw std::domain_error("tilted law undefined");
  for (double& v : w) v /= z;
  // Re-sum guards the constructor's tolerance against rounding drift.
  const double s = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& v : w) v /= s;
  return FiniteDistribution(std::move(w));
}

}  // namespace tsbm
