#include "tsbm/harness/report.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>

#include "tsbm/harness/config.hpp"

namespace tsbm::harness {

namespace {

constexpr double kZeta = 1.0 / 21.0;

std::string sci(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9e", v);
  return buf;
}

std::string t_star_text(const std::optional<std::int64_t>& t) {
  return t ? std::to_string(*t) : std::string("none");
}

nlohmann::json finite_or_string(double v) {
  if (std::isfinite(v)) return v;
  return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

nlohmann::json optional_t(const std::optional<std::int64_t>& t) {
  return t ? nlohmann::json(*t) : nlohmann::json(nullptr);
}

void line(std::ostream& out, const char* key, const std::string& value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%-28s", key);
  out << buf << value << '\n';
}

void base_fields(DivergenceReport& r, std::int64_t N, int K) {
  if (N < 2) throw UsageError("N must be >= 2");
  if (K < 2) throw UsageError("K must be >= 2");
  r.N = N;
  r.K = K;
  const auto n = static_cast<double>(N);
  r.rho_crit = std::log(n) / n;
  r.threshold = K * r.rho_crit;
}

}  // namespace

BoundInputs default_bound_inputs(std::int64_t N, int K, double I, double J) {
  BoundInputs in;
  in.N = N;
  in.K = K;
  in.I = I;
  in.J = J;
  in.zeta = kZeta;
  in.eps = kZeta / (2.0 * (K - 1));
  return in;
}

BoundValues evaluate_bounds(std::int64_t N, int K, double I, double J) {
  BoundValues b;
  BoundInputs in = default_bound_inputs(N, K, I, J);
  b.eps = in.eps;
  b.zeta = in.zeta;
  if (!std::isfinite(I) || !std::isfinite(J)) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    b.lower_linear = b.lower_quadratic = b.i21_linear = b.i21_quadratic = nan;
    b.kappa = nan;
    b.upper = {nan, nan, nan};
    return b;
  }
  in.convention = I21Convention::kLinear;
  b.i21_linear = i21(in);
  b.lower_linear = lower_bound_error_rate(in);
  in.convention = I21Convention::kQuadratic;
  b.i21_quadratic = i21(in);
  b.lower_quadratic = lower_bound_error_rate(in);
  b.kappa = upper_bound_kappa(N, K, I);
  b.upper = upper_bound_terms(in, b.kappa);
  return b;
}

DivergenceReport markov_report(const BinaryMarkovChain& intra, const BinaryMarkovChain& inter,
                               std::int64_t T, std::int64_t N, int K) {
  intra.validate();
  inter.validate();
  if (T < 1) throw UsageError("T must be >= 1");
  DivergenceReport r;
  base_fields(r, N, K);
  r.T = T;
  r.intra = intra;
  r.inter = inter;
  r.I = markov_renyi_exact(0.5, intra, inter, T);
  r.bhattacharyya = r.I / 2.0;
  r.hellinger_sq = -std::expm1(-r.I / 2.0);
  r.J = std::isfinite(r.I) ? markov_j(intra, inter, T) : std::numeric_limits<double>::infinity();
  if (r.I > 0.0) {
    const double d32 = 0.5 * (markov_renyi_exact(1.5, intra, inter, T) +
                              markov_renyi_exact(1.5, inter, intra, T));
    r.beta_half = d32 / r.I;
  }
  r.approx = sparse_renyi_half_approx(intra, inter, T);

  const double gamma = 1.0 - std::sqrt(intra.p11 * inter.p11);
  const double h2 = h11_sq(intra.p11, inter.p11);
  const double u = intra.mu1 / r.rho_crit;
  const double v = inter.mu1 / r.rho_crit;
  const double p = intra.p01 / r.rho_crit;
  const double q = inter.p01 / r.rho_crit;
  if (gamma > 0.0) r.i_tilde = i_tilde_short(u, v, p, q, h2, gamma, T);
  r.i_tilde_rate = i_tilde_long(p, q, h2);

  r.t_star_exact = t_star(intra, inter, N, K, ThresholdConvention::kExact);
  r.t_star_itilde = t_star(intra, inter, N, K, ThresholdConvention::kITilde);
  r.t_star_bhattacharyya = t_star(intra, inter, N, K, ThresholdConvention::kBhattacharyya);
  r.t_star_computed = true;
  r.bounds = evaluate_bounds(N, K, r.I, r.J);
  return r;
}

DivergenceReport categorical_report(const FiniteDistribution& f, const FiniteDistribution& g,
                                    std::int64_t N, int K) {
  if (f.size() != g.size()) throw UsageError("f and g must have the same length");
  DivergenceReport r;
  base_fields(r, N, K);
  r.I = renyi(0.5, f, g);
  r.hellinger_sq = hellinger_sq(f, g);
  r.J = std::isfinite(r.I) ? j_quantity(f, g) : std::numeric_limits<double>::infinity();
  if (r.I > 0.0) {
    try {
      r.beta_half = beta_ratio(0.5, f, g);
    } catch (const std::domain_error&) {
    }
  }
  r.bounds = evaluate_bounds(N, K, r.I, r.J);
  return r;
}

void write_report_text(std::ostream& out, const DivergenceReport& r) {
  line(out, "model", r.T ? "markov" : "categorical");
  line(out, "N", std::to_string(r.N));
  line(out, "K", std::to_string(r.K));
  if (r.T) {
    line(out, "T", std::to_string(*r.T));
    char chain[96];
    std::snprintf(chain, sizeof chain, "mu1=%.6g p01=%.6g p11=%.6g", r.intra->mu1,
                  r.intra->p01, r.intra->p11);
    line(out, "intra chain", chain);
    std::snprintf(chain, sizeof chain, "mu1=%.6g p01=%.6g p11=%.6g", r.inter->mu1,
                  r.inter->p01, r.inter->p11);
    line(out, "inter chain", chain);
  }
  line(out, "log N / N", sci(r.rho_crit));
  line(out, "threshold K log N / N", sci(r.threshold));
  line(out, "D_1/2 exact", sci(r.I));
  if (r.bhattacharyya) line(out, "-log Z", sci(*r.bhattacharyya));
  if (r.approx) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%s +- %s (rho T = %.3g, %s)", sci(r.approx->value).c_str(),
                  sci(r.approx->error_radius).c_str(),
                  r.approx->rho * static_cast<double>(*r.T),
                  r.approx->in_regime ? "radius guaranteed" : "outside rho T <= 0.01");
    line(out, "D_1/2 sparse approx", buf);
  }
  line(out, "Hel^2", sci(r.hellinger_sq));
  line(out, "J", sci(r.J));
  line(out, "beta_1/2", r.beta_half ? sci(*r.beta_half) : "undefined");
  if (r.T) {
    line(out, "I~(T) [log N / N]", r.i_tilde ? sci(*r.i_tilde) : "undefined");
    line(out, "I~ rate [log N / N]", sci(*r.i_tilde_rate));
  }
  if (r.t_star_computed) {
    line(out, "T* exact", t_star_text(r.t_star_exact));
    line(out, "T* itilde", t_star_text(r.t_star_itilde));
    line(out, "T* bhattacharyya", t_star_text(r.t_star_bhattacharyya));
  }
  line(out, "I21 linear", sci(r.bounds.i21_linear));
  line(out, "I21 quadratic", sci(r.bounds.i21_quadratic));
  line(out, "lower bound (I21 linear)", sci(r.bounds.lower_linear));
  line(out, "lower bound (I21 quadratic)", sci(r.bounds.lower_quadratic));
  char slack[64];
  std::snprintf(slack, sizeof slack, " (eps=%.6g, zeta=%.6g)", r.bounds.eps, r.bounds.zeta);
  line(out, "upper bound", sci(r.bounds.upper.total()) + slack);
}

nlohmann::json report_to_json(const DivergenceReport& r) {
  nlohmann::json j{
      {"model", r.T ? "markov" : "categorical"},
      {"N", r.N},
      {"K", r.K},
      {"rho_crit", r.rho_crit},
      {"threshold", r.threshold},
      {"I", finite_or_string(r.I)},
      {"J", finite_or_string(r.J)},
      {"hellinger_sq", finite_or_string(r.hellinger_sq)},
      {"beta_half", r.beta_half ? finite_or_string(*r.beta_half) : nlohmann::json(nullptr)},
      {"bounds",
       {{"i21_linear", finite_or_string(r.bounds.i21_linear)},
        {"i21_quadratic", finite_or_string(r.bounds.i21_quadratic)},
        {"lower_linear", finite_or_string(r.bounds.lower_linear)},
        {"lower_quadratic", finite_or_string(r.bounds.lower_quadratic)},
        {"kappa", finite_or_string(r.bounds.kappa)},
        {"upper_exponential", finite_or_string(r.bounds.upper.exponential)},
        {"upper_entropy", finite_or_string(r.bounds.upper.entropy)},
        {"upper_imbalance", finite_or_string(r.bounds.upper.imbalance)},
        {"upper_total", finite_or_string(r.bounds.upper.total())},
        {"eps", r.bounds.eps},
        {"zeta", r.bounds.zeta}}},
  };
  if (r.T) {
    j["T"] = *r.T;
    auto chain = [](const BinaryMarkovChain& c) {
      return nlohmann::json{{"mu1", c.mu1}, {"p01", c.p01}, {"p11", c.p11}};
    };
    j["intra"] = chain(*r.intra);
    j["inter"] = chain(*r.inter);
    j["bhattacharyya"] = finite_or_string(*r.bhattacharyya);
    j["approx"] = {{"value", finite_or_string(r.approx->value)},
                   {"error_radius", r.approx->error_radius},
                   {"rho", r.approx->rho},
                   {"in_regime", r.approx->in_regime}};
    j["i_tilde"] = r.i_tilde ? finite_or_string(*r.i_tilde) : nlohmann::json(nullptr);
    j["i_tilde_rate"] = finite_or_string(*r.i_tilde_rate);
    j["t_star"] = {{"exact", optional_t(r.t_star_exact)},
                   {"itilde", optional_t(r.t_star_itilde)},
                   {"bhattacharyya", optional_t(r.t_star_bhattacharyya)}};
  }
  return j;
}

std::vector<double> grid_points(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo)) throw UsageError("grid needs lo <= hi and step > 0");
  const auto n = static_cast<std::int64_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  if (n > 100000) throw UsageError("grid has more than 1e5 points");
  std::vector<double> out;
  for (std::int64_t k = 0; k < n; ++k) {
    out.push_back(std::round((lo + static_cast<double>(k) * step) * 1e9) / 1e9);
  }
  return out;
}

std::vector<ThresholdCell> threshold_grid(std::int64_t N, int K, double mu1_units,
                                          double nu1_units, const std::vector<double>& p11,
                                          const std::vector<double>& q11,
                                          ThresholdConvention convention) {
  if (N < 2 || K < 2) throw UsageError("threshold grid needs N >= 2 and K >= 2");
  for (double v : p11) {
    if (!(v >= 0.0 && v < 1.0)) throw UsageError("P11 grid values must lie in [0, 1)");
  }
  for (double v : q11) {
    if (!(v >= 0.0 && v < 1.0)) throw UsageError("Q11 grid values must lie in [0, 1)");
  }
  ChainSpec fs{mu1_units, 0.0, std::nullopt, DensityUnit::kLogNOverN};
  ChainSpec gs{nu1_units, 0.0, std::nullopt, DensityUnit::kLogNOverN};
  std::vector<ThresholdCell> cells;
  for (double a : p11) {
    fs.p11 = a;
    const auto f = fs.resolve(static_cast<std::size_t>(N));
    for (double b : q11) {
      gs.p11 = b;
      const auto g = gs.resolve(static_cast<std::size_t>(N));
      cells.push_back({a, b, t_star(f, g, N, K, convention)});
    }
  }
  return cells;
}

void write_threshold_csv(std::ostream& out, const std::vector<ThresholdCell>& cells,
                         const char* prefix_header, const char* prefix) {
  if (prefix_header != nullptr) out << prefix_header << ',';
  out << "p11,q11,t_star,log10_t_star\n";
  char buf[96];
  for (const auto& c : cells) {
    if (prefix != nullptr) out << prefix << ',';
    if (c.t_star) {
      std::snprintf(buf, sizeof buf, "%.6g,%.6g,%lld,%.6f", c.p11, c.q11,
                    static_cast<long long>(*c.t_star),
                    std::log10(static_cast<double>(*c.t_star)));
    } else {
      std::snprintf(buf, sizeof buf, "%.6g,%.6g,inf,inf", c.p11, c.q11);
    }
    out << buf << '\n';
  }
}

std::optional<ThresholdConvention> parse_convention(std::string_view name) {
  if (name == "exact") return ThresholdConvention::kExact;
  if (name == "itilde") return ThresholdConvention::kITilde;
  if (name == "bhattacharyya") return ThresholdConvention::kBhattacharyya;
  return std::nullopt;
}

const char* convention_name(ThresholdConvention c) {
  switch (c) {
    case ThresholdConvention::kExact: return "exact";
    case ThresholdConvention::kITilde: return "itilde";
    case ThresholdConvention::kBhattacharyya: return "bhattacharyya";
  }
  return "exact";
}

}  // namespace tsbm::harness
