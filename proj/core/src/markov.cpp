#include "tsbm/markov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "tsbm/divergence.hpp"

namespace tsbm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::int64_t kLinearScanLimit = 1000;

bool in_unit(double x) { return x >= 0.0 && x <= 1.0; }

// x^alpha y^(1-alpha) with 0^alpha = 0 and x/0 handled by the order.
double geometric(double x, double y, double alpha) {
  if (x == 0.0) return 0.0;
  if (y == 0.0) return alpha < 1.0 ? 0.0 : kInf;
  if (alpha == 0.5) return std::sqrt(x * y);
  return std::exp(alpha * std::log(x) + (1.0 - alpha) * std::log(y));
}

void require_order(double alpha) {
  if (!(alpha > 0.0) || alpha == 1.0 || !std::isfinite(alpha)) {
    throw std::invalid_argument("Renyi order must be positive, finite and != 1");
  }
}

// Running z^(t) = r R^(t-1), stored as a unit-sum direction and a log scale.
class TransferAccumulator {
 public:
  explicit TransferAccumulator(const TransferWeights& w) : w_(w) {
    z_ = w.r;
    normalise();
  }

  void step() {
    if (dead_) return;
    const std::array<double, 2> next{z_[0] * w_.R[0][0] + z_[1] * w_.R[1][0],
                                     z_[0] * w_.R[0][1] + z_[1] * w_.R[1][1]};
    z_ = next;
    normalise();
  }

  double log_z() const { return dead_ ? -kInf : log_scale_; }

 private:
  void normalise() {
    const double s = z_[0] + z_[1];
    if (!(s > 0.0)) {
      dead_ = true;
      return;
    }
    z_[0] /= s;
    z_[1] /= s;
    log_scale_ += std::log(s);
  }

  TransferWeights w_;
  std::array<double, 2> z_{};
  double log_scale_ = 0.0;
  bool dead_ = false;
};

using Mat2 = std::array<std::array<double, 2>, 2>;

Mat2 multiply(const Mat2& a, const Mat2& b) {
  Mat2 c{};
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
  }
  return c;
}

double rescale(Mat2& m) {
  const double s = std::max({m[0][0], m[0][1], m[1][0], m[1][1]});
  if (!(s > 0.0)) return -kInf;
  for (auto& row : m) {
    for (double& v : row) v /= s;
  }
  return std::log(s);
}

// log(r R^(T-1) 1) by repeated squaring; all entries must be finite.
double log_transfer_sum_pow(const TransferWeights& w, std::int64_t T) {
  Mat2 result{{{1.0, 0.0}, {0.0, 1.0}}};
  double log_result = 0.0;
  Mat2 base = w.R;
  double log_base = rescale(base);
  for (std::int64_t e = T - 1; e > 0; e >>= 1) {
    if (e & 1) {
      if (log_base == -kInf) return -kInf;
      result = multiply(result, base);
      log_result += log_base + rescale(result);
      if (log_result == -kInf) return -kInf;
    }
    if (e > 1) {
      base = multiply(base, base);
      log_base = 2.0 * log_base + rescale(base);
    }
  }
  double s = 0.0;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) s += w.r[a] * result[a][b];
  }
  if (!(s > 0.0)) return -kInf;
  return log_result + std::log(s);
}

// For alpha > 1: does some path with f(x) > 0 cross an entry where g = 0?
bool charges_g_null_path(const TransferWeights& w, const BinaryMarkovChain& f,
                         std::int64_t T) {
  std::array<bool, 2> reach{f.mu(0) > 0.0, f.mu(1) > 0.0};
  std::array<bool, 2> bad{reach[0] && std::isinf(w.r[0]),
                          reach[1] && std::isinf(w.r[1])};
  for (std::int64_t t = 2; t <= T; ++t) {
    std::array<bool, 2> nreach{false, false};
    std::array<bool, 2> nbad{false, false};
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        if (!(f.P(a, b) > 0.0)) continue;
        if (reach[a]) nreach[b] = true;
        if (bad[a] || (reach[a] && std::isinf(w.R[a][b]))) nbad[b] = true;
      }
    }
    reach = nreach;
    bad = nbad;
    if (!reach[0] && !reach[1]) break;
    if (bad[0] || bad[1]) return true;  // bad states stay bad once reached
  }
  return bad[0] || bad[1];
}

std::uint64_t binomial_u64(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t c = 1;
  for (int i = 1; i <= k; ++i) {
    c = c * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  }
  return c;
}

// Value with first and second derivatives in the tilt order.
struct Jet {
  double v = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

Jet operator*(const Jet& a, const Jet& b) {
  return {a.v * b.v, a.d1 * b.v + a.v * b.d1,
          a.d2 * b.v + 2.0 * a.d1 * b.d1 + a.v * b.d2};
}

Jet operator+(const Jet& a, const Jet& b) {
  return {a.v + b.v, a.d1 + b.d1, a.d2 + b.d2};
}

Jet half_jet(double x, double y) {
  if (x == 0.0 || y == 0.0) return {};
  const double w = std::sqrt(x * y);
  const double l = std::log(x / y);
  return {w, w * l, w * l * l};
}

}  // namespace

void BinaryMarkovChain::validate() const {
  if (!in_unit(mu1) || !in_unit(p01) || !in_unit(p11)) {
    throw std::invalid_argument("chain parameters must lie in [0, 1]");
  }
}

double BinaryMarkovChain::stationary1() const {
  const double leave = p01 + (1.0 - p11);
  if (leave == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return p01 / leave;
}

BinaryMarkovChain chain_from_stationary(double pi1, double p11) {
  if (!(pi1 > 0.0 && pi1 < 1.0)) {
    throw std::invalid_argument("stationary mass must lie in (0, 1)");
  }
  if (!in_unit(p11)) throw std::invalid_argument("p11 must lie in [0, 1]");
  const double p01 = pi1 * (1.0 - p11) / (1.0 - pi1);
  if (p01 > 1.0) {
    throw std::invalid_argument("infeasible chain: p01 = " +
                                std::to_string(p01) + " > 1");
  }
  return {pi1, p01, p11};
}

double path_probability(const BinaryMarkovChain& c,
                        std::span<const uint8_t> x) {
  if (x.empty()) return 1.0;
  double p = c.mu(x[0] ? 1 : 0);
  for (std::size_t s = 1; s < x.size(); ++s) {
    p *= c.P(x[s - 1] ? 1 : 0, x[s] ? 1 : 0);
  }
  return p;
}

TransferWeights transfer_weights(double alpha, const BinaryMarkovChain& f,
                                 const BinaryMarkovChain& g) {
  TransferWeights w;
  for (int a = 0; a < 2; ++a) {
    w.r[a] = geometric(f.mu(a), g.mu(a), alpha);
    for (int b = 0; b < 2; ++b) w.R[a][b] = geometric(f.P(a, b), g.P(a, b), alpha);
  }
  return w;
}

TransferWeights chain_weights(const BinaryMarkovChain& c) {
  TransferWeights w;
  for (int a = 0; a < 2; ++a) {
    w.r[a] = c.mu(a);
    for (int b = 0; b < 2; ++b) w.R[a][b] = c.P(a, b);
  }
  return w;
}

double markov_renyi_exact(double alpha, const BinaryMarkovChain& f,
                          const BinaryMarkovChain& g, std::int64_t T) {
  require_order(alpha);
  f.validate();
  g.validate();
  if (T < 1) throw std::invalid_argument("T must be >= 1");
  TransferWeights w = transfer_weights(alpha, f, g);
  if (alpha > 1.0) {
    if (charges_g_null_path(w, f, T)) return kInf;
    // Remaining infinite entries only sit on paths with f(x) = 0.
    for (double& v : w.r) v = std::isinf(v) ? 0.0 : v;
    for (auto& row : w.R) {
      for (double& v : row) v = std::isinf(v) ? 0.0 : v;
    }
  }
  TransferAccumulator acc(w);
  for (std::int64_t t = 2; t <= T; ++t) acc.step();
  const double log_z = acc.log_z();
  if (log_z == -kInf) return kInf;
  return std::max(0.0, log_z / (alpha - 1.0));
}

double markov_renyi_brute(double alpha, const BinaryMarkovChain& f,
                          const BinaryMarkovChain& g, int T) {
  require_order(alpha);
  f.validate();
  g.validate();
  if (T < 1 || T > 20) throw std::invalid_argument("brute force needs 1 <= T <= 20");
  const std::size_t n = std::size_t{1} << T;
  std::vector<double> pf(n);
  std::vector<double> pg(n);
  std::vector<uint8_t> x(static_cast<std::size_t>(T));
  for (std::size_t code = 0; code < n; ++code) {
    for (int s = 0; s < T; ++s) x[s] = static_cast<uint8_t>((code >> s) & 1U);
    pf[code] = path_probability(f, x);
    pg[code] = path_probability(g, x);
  }
  return renyi(alpha, FiniteDistribution(std::move(pf)),
               FiniteDistribution(std::move(pg)));
}

SparseApproximation sparse_renyi_approx(double alpha, const BinaryMarkovChain& f,
                                        const BinaryMarkovChain& g,
                                        std::int64_t T) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("sparse approximation needs alpha in (0, 1)");
  }
  f.validate();
  g.validate();
  if (T < 1) throw std::invalid_argument("T must be >= 1");
  const double r1 = geometric(f.mu1, g.mu1, alpha);
  const double r1_hat = alpha * f.mu1 + (1.0 - alpha) * g.mu1;
  const double R01 = geometric(f.p01, g.p01, alpha);
  const double R01_hat = alpha * f.p01 + (1.0 - alpha) * g.p01;
  const double R10 = geometric(1.0 - f.p11, 1.0 - g.p11, alpha);
  const double R11 = geometric(f.p11, g.p11, alpha);

  double sum = 0.0;
  if (R11 < 1.0) {
    const double lead = 1.0 - R10 / (1.0 - R11);
    const double transient = r1 * (1.0 - R11) - R01;
    double power = 1.0;  // R11^(t-2)
    for (std::int64_t t = 2; t <= T; ++t) {
      sum += R01_hat - R01 + lead * (R01 + transient * power);
      power *= R11;
    }
  } else {
    sum = static_cast<double>(T - 1) * (R01_hat - R01);
  }

  SparseApproximation out;
  out.value = (r1_hat - r1 + sum) / (1.0 - alpha);
  out.rho = std::max({f.mu1, g.mu1, f.p01, g.p01});
  const double rt = out.rho * static_cast<double>(T);
  out.error_radius = 46.0 * rt * rt / (1.0 - alpha);
  out.in_regime = rt <= 0.01;
  return out;
}

SparseApproximation sparse_renyi_half_approx(const BinaryMarkovChain& f,
                                             const BinaryMarkovChain& g,
                                             std::int64_t T) {
  f.validate();
  g.validate();
  if (T < 1) throw std::invalid_argument("T must be >= 1");
  const double h2 = h11_sq(f.p11, g.p11);
  const double gamma = 1.0 - std::sqrt(f.p11 * g.p11);
  const double d0 = std::sqrt(f.mu1) - std::sqrt(g.mu1);
  const double d1 = std::sqrt(f.p01) - std::sqrt(g.p01);
  const double cross = std::sqrt(f.p01 * g.p01);
  double geometric_sum = 0.0;
  double power = 1.0;
  for (std::int64_t t = 0; t <= T - 2; ++t) {
    geometric_sum += power;
    power *= 1.0 - gamma;
  }
  SparseApproximation out;
  out.value = d0 * d0 +
              (d1 * d1 + 2.0 * h2 * cross) * static_cast<double>(T - 1) +
              2.0 * (gamma * std::sqrt(f.mu1 * g.mu1) - cross) * h2 * geometric_sum;
  out.rho = std::max({f.mu1, g.mu1, f.p01, g.p01});
  const double rt = out.rho * static_cast<double>(T);
  out.error_radius = 92.0 * rt * rt;
  out.in_regime = rt <= 0.01;
  return out;
}

double h11_sq(double p11, double q11) {
  if (!in_unit(p11) || !in_unit(q11)) {
    throw std::invalid_argument("p11, q11 must lie in [0, 1]");
  }
  const double denom = 1.0 - std::sqrt(p11 * q11);
  if (denom == 0.0) return 0.0;
  // Rounding can push p11 == q11 slightly below zero.
  return std::max(0.0, 1.0 - std::sqrt(1.0 - p11) * std::sqrt(1.0 - q11) / denom);
}

double high_order_bound(double alpha, const BinaryMarkovChain& f,
                        const BinaryMarkovChain& g, std::int64_t T, double M,
                        double rho) {
  if (!(alpha > 1.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("high-order bound needs finite alpha > 1");
  }
  f.validate();
  g.validate();
  if (T < 1) throw std::invalid_argument("T must be >= 1");
  if (!(M >= 1.0)) throw std::invalid_argument("ratio bound M must be >= 1");
  if (!(rho > 0.0 && rho <= 0.5)) throw std::invalid_argument("need 0 < rho <= 1/2");
  if (!(g.p11 > 0.0)) throw std::invalid_argument("bound needs Q11 > 0");
  if (g.mu1 > rho || g.p01 > rho) {
    throw std::invalid_argument("bound needs nu1, Q01 <= rho");
  }
  auto ratio_ok = [M](double num, double den) {
    if (num == 0.0) return true;
    return den > 0.0 && num <= M * den;
  };
  if (!ratio_ok(f.mu1, g.mu1) || !ratio_ok(f.p01, g.p01) ||
      !ratio_ok(1.0 - f.p11, 1.0 - g.p11)) {
    throw std::invalid_argument("ratio bound M violated");
  }
  const double lambda = geometric(f.p11, g.p11, alpha);
  if (!(lambda < 1.0)) {
    throw std::domain_error("high-order bound inapplicable: Lambda >= 1");
  }
  const double C = std::pow(M, 2.0 * alpha) / (1.0 - lambda);
  const double crt = C * rho * static_cast<double>(T);
  return (2.0 * alpha + 1.0) / (alpha - 1.0) * crt * std::exp(5.0 * crt);
}

double i_tilde_short(double u, double v, double p01, double q01, double h11_sq,
                     double gamma, std::int64_t T) {
  if (u < 0.0 || v < 0.0 || p01 < 0.0 || q01 < 0.0 || h11_sq < 0.0) {
    throw std::invalid_argument("threshold arguments must be non-negative");
  }
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw std::invalid_argument("gamma must lie in (0, 1]");
  }
  if (T < 1) throw std::invalid_argument("T must be >= 1");
  const double d0 = std::sqrt(u) - std::sqrt(v);
  const double cross = std::sqrt(p01 * q01);
  double geometric_sum = 0.0;
  double power = 1.0;
  for (std::int64_t t = 0; t <= T - 2; ++t) {
    geometric_sum += power;
    power *= 1.0 - gamma;
  }
  return d0 * d0 + i_tilde_long(p01, q01, h11_sq) * static_cast<double>(T - 1) +
         2.0 * h11_sq * (gamma * std::sqrt(u * v) - cross) * geometric_sum;
}

double i_tilde_long(double p01, double q01, double h11_sq) {
  if (p01 < 0.0 || q01 < 0.0 || h11_sq < 0.0) {
    throw std::invalid_argument("threshold arguments must be non-negative");
  }
  const double d = std::sqrt(p01) - std::sqrt(q01);
  return d * d + 2.0 * h11_sq * std::sqrt(p01 * q01);
}

double markov_j(const BinaryMarkovChain& f, const BinaryMarkovChain& g,
                std::int64_t T) {
  f.validate();
  g.validate();
  if (T < 1) throw std::invalid_argument("T must be >= 1");
  std::array<Jet, 2> z{half_jet(f.mu(0), g.mu(0)), half_jet(f.mu(1), g.mu(1))};
  std::array<std::array<Jet, 2>, 2> R;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) R[a][b] = half_jet(f.P(a, b), g.P(a, b));
  }
  auto normalise = [&z]() {
    const double s = z[0].v + z[1].v;
    if (!(s > 0.0)) throw std::domain_error("J undefined for singular path laws");
    for (Jet& j : z) j = {j.v / s, j.d1 / s, j.d2 / s};
  };
  normalise();
  for (std::int64_t t = 2; t <= T; ++t) {
    z = {z[0] * R[0][0] + z[1] * R[1][0], z[0] * R[0][1] + z[1] * R[1][1]};
    normalise();
  }
  const Jet total = z[0] + z[1];
  return std::max(0.0, total.d2 / total.v);
}

std::optional<std::int64_t> t_star(const BinaryMarkovChain& f,
                                   const BinaryMarkovChain& g, std::int64_t N,
                                   int K, ThresholdConvention convention,
                                   std::int64_t t_max) {
  f.validate();
  g.validate();
  if (K < 2) throw std::invalid_argument("threshold search needs K >= 2");
  if (N < 2) throw std::invalid_argument("threshold search needs N >= 2");
  if (t_max < 1) return std::nullopt;
  const double n = static_cast<double>(N);
  const double rho = std::log(n) / n;
  const double critical = static_cast<double>(K) * rho;

  if (convention == ThresholdConvention::kITilde) {
    const double gamma = 1.0 - std::sqrt(f.p11 * g.p11);
    if (!(gamma > 0.0)) return std::nullopt;  // both chains absorbing in 1
    const double h2 = h11_sq(f.p11, g.p11);
    const double u = f.mu1 / rho;
    const double v = g.mu1 / rho;
    const double p = f.p01 / rho;
    const double q = g.p01 / rho;
    // Incremental evaluation keeps the scan linear overall.
    const double d0 = std::sqrt(u) - std::sqrt(v);
    const double rate = i_tilde_long(p, q, h2);
    const double transient = 2.0 * h2 * (gamma * std::sqrt(u * v) - std::sqrt(p * q));
    auto value_at = [&](std::int64_t T) {
      return i_tilde_short(u, v, p, q, h2, gamma, T);
    };
    double geometric_sum = 0.0;
    double power = 1.0;
    const std::int64_t scan = std::min(t_max, kLinearScanLimit);
    for (std::int64_t T = 1; T <= scan; ++T) {
      if (T >= 2) {
        geometric_sum += power;
        power *= 1.0 - gamma;
      }
      const double value =
          d0 * d0 + rate * static_cast<double>(T - 1) + transient * geometric_sum;
      if (value > static_cast<double>(K)) return T;
    }
    if (t_max <= scan) return std::nullopt;
    auto holds = [&](std::int64_t T) { return value_at(T) > static_cast<double>(K); };
    std::int64_t lo = scan;
    std::int64_t hi = scan;
    while (true) {
      hi = std::min(t_max, hi * 2);
      if (holds(hi)) break;
      if (hi == t_max) return std::nullopt;
      lo = hi;
    }
    while (hi - lo > 1) {
      const std::int64_t mid = lo + (hi - lo) / 2;
      (holds(mid) ? hi : lo) = mid;
    }
    return hi;
  }

  const double scale =
      convention == ThresholdConvention::kBhattacharyya ? 1.0 : 2.0;
  const TransferWeights w = transfer_weights(0.5, f, g);
  // D_1/2 = -2 log Z, Bhattacharyya distance = -log Z.
  auto crosses = [&](double log_z) {
    if (log_z == -kInf) return true;
    return -scale * log_z >= critical;
  };
  TransferAccumulator acc(w);
  const std::int64_t scan = std::min(t_max, kLinearScanLimit);
  for (std::int64_t T = 1; T <= scan; ++T) {
    if (T >= 2) acc.step();
    if (crosses(acc.log_z())) return T;
  }
  if (t_max <= scan) return std::nullopt;
  auto holds = [&](std::int64_t T) { return crosses(log_transfer_sum_pow(w, T)); };
  std::int64_t lo = scan;
  std::int64_t hi = scan;
  while (true) {
    hi = std::min(t_max, hi * 2);
    if (holds(hi)) break;
    if (hi == t_max) return std::nullopt;
    lo = hi;
  }
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    (holds(mid) ? hi : lo) = mid;
  }
  return hi;
}

PathStats path_stats(std::span<const uint8_t> path) {
  PathStats s;
  if (path.empty()) return s;
  s.first = path.front() ? 1 : 0;
  s.last = path.back() ? 1 : 0;
  int prev = 0;
  for (std::size_t k = 0; k < path.size(); ++k) {
    const int bit = path[k] ? 1 : 0;
    s.ones += bit;
    if (bit == 1 && (k == 0 || prev == 0)) ++s.on_periods;
    if (k > 0) ++s.transitions[prev][bit];
    prev = bit;
  }
  return s;
}

std::uint64_t count_paths(int j, int t, int a, int b, int T) {
  if (T < 1 || j < 0 || t < 0 || t > T || (a != 0 && a != 1) ||
      (b != 0 && b != 1)) {
    return 0;
  }
  if (T == 1) {
    // Single symbol: x_1 = x_T.
    if (a != b) return 0;
    return (a == 0 && j == 0 && t == 0) || (a == 1 && j == 1 && t == 1) ? 1 : 0;
  }
  if (j == 0) return (t == 0 && a == 0 && b == 0) ? 1 : 0;
  if (j == 1) {
    if (a == 0 && b == 0) {
      return (t >= 1 && t <= T - 2) ? static_cast<std::uint64_t>(T - t - 1) : 0;
    }
    if (a != b) return (t >= 1 && t <= T - 1) ? 1 : 0;
    return t == T ? 1 : 0;
  }
  if (j > (T + 1) / 2) return 0;
  if (t < j || t > T - 1 - j + a + b) return 0;
  return binomial_u64(t - 1, j - 1) * binomial_u64(T - t - 1, j - a - b);
}

double path_class_weight(const TransferWeights& w, int j, int t, int a, int b,
                         int T) {
  const int n01 = j - a;
  const int n10 = j - b;
  const int n11 = t - j;
  const int n00 = T - 1 - (t + j - a - b);
  if (n01 < 0 || n10 < 0 || n11 < 0 || n00 < 0) return 0.0;
  return w.r[a] * std::pow(w.R[0][0], n00) * std::pow(w.R[0][1], n01) *
         std::pow(w.R[1][0], n10) * std::pow(w.R[1][1], n11);
}

}  // namespace tsbm
