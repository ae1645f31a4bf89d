#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "support.hpp"
#include "tsbm/divergence.hpp"

using namespace tsbm;
using tsbm::testing::random_distribution;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

FiniteDistribution ber(double p) { return FiniteDistribution::bernoulli(p); }

}  // namespace

TEST_CASE("FiniteDistribution validates and renormalises") {
  CHECK_THROWS_AS(FiniteDistribution({}), std::invalid_argument);
  CHECK_THROWS_AS(FiniteDistribution({0.5, -0.1, 0.6}), std::invalid_argument);
  CHECK_THROWS_AS(FiniteDistribution({0.5, 0.4}), std::invalid_argument);
  const FiniteDistribution d({0.5 + 4e-13, 0.5});
  CHECK(d[0] + d[1] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(FiniteDistribution::bernoulli(1.5), std::invalid_argument);
  CHECK_THROWS_AS(FiniteDistribution::point_mass(3, 3), std::invalid_argument);
}

TEST_CASE("renyi examples") {
  CHECK(renyi(0.5, ber(0.3), ber(0.3)) == doctest::Approx(0.0));
  CHECK(renyi(0.5, ber(1.0), ber(0.0)) == kInf);
  // mpmath, 40 digits: -2 log(sqrt(0.05) + sqrt(0.45)).
  CHECK(renyi(0.5, ber(0.5), ber(0.1)) ==
        doctest::Approx(0.2231435513142098).epsilon(1e-14));
}

TEST_CASE("renyi argument errors") {
  CHECK_THROWS_AS(renyi(0.5, ber(0.5), FiniteDistribution({0.2, 0.3, 0.5})),
                  std::invalid_argument);
  CHECK_THROWS_AS(renyi(1.0, ber(0.5), ber(0.2)), std::invalid_argument);
  CHECK_THROWS_AS(renyi(0.0, ber(0.5), ber(0.2)), std::invalid_argument);
  CHECK_THROWS_AS(renyi(-0.5, ber(0.5), ber(0.2)), std::invalid_argument);
}

TEST_CASE("renyi support conventions") {
  // alpha < 1: symbols charged by one law only contribute nothing.
  const FiniteDistribution f({0.5, 0.5, 0.0});
  const FiniteDistribution g({0.5, 0.0, 0.5});
  CHECK(std::isfinite(renyi(0.5, f, g)));
  CHECK(renyi(0.5, f, g) == doctest::Approx(-2.0 * std::log(0.5)));
  // alpha > 1: f charges a symbol g misses.
  CHECK(renyi(1.5, f, g) == kInf);
  CHECK(std::isfinite(renyi(1.5, ber(0.0), ber(0.5))));
}

TEST_CASE("renyi keeps precision at tiny densities") {
  // D_1/2 between Ber(p) and Ber(q) is ~ (sqrt p - sqrt q)^2 for small p, q.
  const double p = 4e-7;
  const double q = 1e-7;
  const double approx = std::pow(std::sqrt(p) - std::sqrt(q), 2);
  CHECK(renyi(0.5, ber(p), ber(q)) == doctest::Approx(approx).epsilon(1e-5));
}

TEST_CASE("hellinger_sq examples") {
  CHECK(hellinger_sq(ber(0.4), ber(0.4)) == doctest::Approx(0.0));
  CHECK(hellinger_sq(ber(1.0), ber(0.0)) == doctest::Approx(1.0));
  CHECK(hellinger_sq(ber(0.5), ber(0.1)) ==
        doctest::Approx(0.1055728090000841).epsilon(1e-13));
}

TEST_CASE("kl and v_kl") {
  CHECK(kl(ber(0.3), ber(0.3)) == doctest::Approx(0.0));
  CHECK(*v_kl(ber(0.3), ber(0.3)) == doctest::Approx(0.0));
  CHECK(kl(ber(0.5), ber(0.25)) ==
        doctest::Approx(0.5 * std::log(2.0) + 0.5 * std::log(2.0 / 3.0)));
  CHECK(kl(ber(0.5), ber(0.25)) == doctest::Approx(0.143841).epsilon(1e-6));
  CHECK(kl(ber(1.0), ber(0.5)) == doctest::Approx(std::log(2.0)));
  CHECK(kl(ber(0.5), ber(1.0)) == kInf);
  CHECK_FALSE(v_kl(ber(0.5), ber(1.0)).has_value());
  // v_KL of Ber(1) against anything with full support is a point mass: 0.
  CHECK(*v_kl(ber(1.0), ber(0.5)) == doctest::Approx(0.0));
}

TEST_CASE("renyi_symmetric and beta_ratio") {
  CHECK(renyi_symmetric(0.5, ber(0.2), ber(0.8)) ==
        doctest::Approx(renyi(0.5, ber(0.2), ber(0.8))));
  CHECK(renyi_symmetric(1.5, ber(0.2), ber(0.8)) ==
        doctest::Approx(renyi(1.5, ber(0.2), ber(0.8))));
  CHECK_THROWS_AS(beta_ratio(0.5, ber(0.3), ber(0.3)), std::domain_error);
  CHECK_THROWS_AS(beta_ratio(0.0, ber(0.3), ber(0.2)), std::invalid_argument);
  CHECK_THROWS_AS(beta_ratio(1.5, ber(0.3), ber(0.2)), std::invalid_argument);

  // mpmath: D^s_1.5 / D^s_0.5 for Ber(0.5) vs Ber(0.1).
  const double beta = beta_ratio(0.5, ber(0.5), ber(0.1));
  CHECK(beta == doctest::Approx(2.797097677244181).epsilon(1e-12));
  const double num = 0.5 * (renyi(1.5, ber(0.5), ber(0.1)) + renyi(1.5, ber(0.1), ber(0.5)));
  const double den = 0.5 * (renyi(0.5, ber(0.5), ber(0.1)) + renyi(0.5, ber(0.1), ber(0.5)));
  CHECK(beta == doctest::Approx(num / den).epsilon(1e-14));

  // Infinite numerator.
  CHECK(beta_ratio(0.5, FiniteDistribution({0.5, 0.5, 0.0}),
                   FiniteDistribution({0.5, 0.25, 0.25})) == kInf);
  // r = 1 uses symmetric KL as the denominator.
  const double skl = 0.5 * (kl(ber(0.5), ber(0.1)) + kl(ber(0.1), ber(0.5)));
  CHECK(beta_ratio(1.0, ber(0.5), ber(0.1)) ==
        doctest::Approx(renyi_symmetric(2.0, ber(0.5), ber(0.1)) / skl));
}

TEST_CASE("zero_inflated_renyi_half") {
  CHECK(zero_inflated_renyi_half(0.01, 0.01, 0.0) == doctest::Approx(0.0));
  CHECK(zero_inflated_renyi_half(0.04, 0.01, 0.0) == doctest::Approx(0.01));
  const double approx = zero_inflated_renyi_half(0.02, 0.01, 0.25);
  CHECK(approx == doctest::Approx(0.0087868).epsilon(1e-5));
  // Exact D_1/2 on a concrete pair: f~ = delta_1, g~ = (0.5625, 0.4375), so
  // Hel^2(f~, g~) = 1 - sqrt(0.5625) = 0.25. mpmath gives 0.0088316483.
  const auto f = FiniteDistribution::zero_inflated(0.02, ber(0.0));
  const auto g = FiniteDistribution::zero_inflated(0.01, FiniteDistribution({0.5625, 0.4375}));
  CHECK(hellinger_sq(ber(0.0), FiniteDistribution({0.5625, 0.4375})) ==
        doctest::Approx(0.25));
  const double exact = renyi(0.5, f, g);
  CHECK(exact == doctest::Approx(0.008831648270891242).epsilon(1e-12));
  const double rho = 0.02;
  CHECK(std::abs(exact - approx) <= 92.0 * rho * rho);
  CHECK_THROWS_AS(zero_inflated_renyi_half(1.5, 0.1, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(zero_inflated_renyi_half(0.1, 0.1, 1.1), std::invalid_argument);
}

TEST_CASE("zero_inflated_renyi_half tracks exact value within 5 rho^2") {
  SplitMix64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const double rho = 1e-4 + 0.0099 * rng.uniform();
    const double p = rho * rng.uniform();
    const double q = rho * rng.uniform();
    const auto ft = random_distribution(rng, 3);
    const auto gt = random_distribution(rng, 3);
    const double exact = renyi(0.5, FiniteDistribution::zero_inflated(p, ft),
                               FiniteDistribution::zero_inflated(q, gt));
    const double approx = zero_inflated_renyi_half(p, q, hellinger_sq(ft, gt));
    CHECK(std::abs(exact - approx) <= 5.0 * rho * rho);
  }
}

TEST_CASE("j_quantity") {
  CHECK(j_quantity(ber(0.3), ber(0.3)) == doctest::Approx(0.0));
  CHECK_THROWS_AS(j_quantity(ber(1.0), ber(0.0)), std::domain_error);
  const double J = j_quantity(ber(0.5), ber(0.1));
  CHECK(J == doctest::Approx(0.9066924710726257).epsilon(1e-12));
  const double I = renyi(0.5, ber(0.5), ber(0.1));
  CHECK(J <= 14.0 * I);
  CHECK(J <= 8.0 * (std::exp(I / 2.0) - 1.0));
}

TEST_CASE("lower bound evaluator") {
  BoundInputs in{1000, 2, 0.0, 0.0, 0.0, 0.0};
  const double expected = 1.0 / 84.0 / 8.0 - std::exp(-62.5) / 6.0;
  CHECK(lower_bound_error_rate(in) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(lower_bound_error_rate(in) == doctest::Approx(0.0014881).epsilon(1e-4));

  in.I = 50.0;
  CHECK(lower_bound_error_rate(in) == 0.0);

  // Both I21 conventions against mpmath at N=1000, K=3, I=0.004, J=0.01.
  BoundInputs c{1000, 3, 0.004, 0.01, 0.0, 0.0, I21Convention::kLinear};
  CHECK(lower_bound_error_rate(c) ==
        doctest::Approx(2.382671403231553e-06).epsilon(1e-10));
  c.convention = I21Convention::kQuadratic;
  CHECK(lower_bound_error_rate(c) ==
        doctest::Approx(3.013391666459540e-06).epsilon(1e-10));

  BoundInputs bad{1000, 1, 0.1, 0.0, 0.0, 0.0};
  CHECK_THROWS_AS(lower_bound_error_rate(bad), std::invalid_argument);
  BoundInputs eps_bad{1000, 2, 0.1, 0.0, 0.03, 0.02};
  CHECK_THROWS_AS(eps_bad.validate(), std::invalid_argument);
  BoundInputs zeta_bad{1000, 2, 0.1, 0.0, 0.0, 0.05};
  CHECK_THROWS_AS(zeta_bad.validate(), std::invalid_argument);
}

TEST_CASE("lower bound decreases in I") {
  for (auto conv : {I21Convention::kLinear, I21Convention::kQuadratic}) {
    double prev = 2.0;
    for (int s = 0; s <= 40; ++s) {
      BoundInputs in{200, 2, 0.002 * s, 0.01, 0.0, 0.0, conv};
      const double lb = lower_bound_error_rate(in);
      CHECK(lb >= 0.0);
      if (lb > 0.0) CHECK(lb < prev);
      prev = lb;
    }
  }
}

TEST_CASE("upper bound evaluator") {
  const std::int64_t N = 500;
  const double I = 4.0 * std::log(500.0) / 500.0;
  const double kappa = upper_bound_kappa(N, 2, I);
  CHECK(kappa == doctest::Approx(47.37023260213727).epsilon(1e-12));
  BoundInputs in{N, 2, I, 0.0, 0.01, 0.01};
  const auto terms = upper_bound_terms(in, kappa);
  // mpmath term-by-term.
  CHECK(terms.exponential == doctest::Approx(4.955615966024567e+251).epsilon(1e-10));
  CHECK(terms.entropy == doctest::Approx(3.273390607896142e+150).epsilon(1e-10));
  CHECK(terms.imbalance == doctest::Approx(3.966805170555504).epsilon(1e-12));
  CHECK(upper_bound_error_rate(in, kappa) == doctest::Approx(terms.total()));

  BoundInputs zero{N, 2, 0.0, 0.0, 0.01, 0.01};
  CHECK(upper_bound_error_rate(zero, upper_bound_kappa(N, 2, 0.0)) >= 1.0);

  // K^N beyond the double range still combines with the decay factor.
  // log term = 20000 log 2 - 2e4 < 0 although 2^20000 overflows.
  BoundInputs big{20000, 2, 0.02, 0.0, 0.0, 0.04};
  const auto bt = upper_bound_terms(big, upper_bound_kappa(20000, 2, 0.02));
  CHECK(bt.entropy == doctest::Approx(std::exp(20000 * std::log(2.0) - 2e4)));
  CHECK(std::isfinite(bt.entropy));
}

TEST_CASE("upper bound decreases in I") {
  double prev = std::numeric_limits<double>::infinity();
  for (int s = 1; s <= 30; ++s) {
    const double I = 0.01 * s;
    BoundInputs in{2000, 2, I, 0.0, 0.01, 0.02};
    const double ub = upper_bound_error_rate(in, upper_bound_kappa(2000, 2, I));
    CHECK(ub <= prev);
    prev = ub;
  }
}

TEST_CASE("change-of-measure quantities") {
  const auto f = ber(0.3);
  const auto g = ber(0.1);
  const auto h = homogeneous_uniform_quantities(2, f, g);
  CHECK(h.i22 == 0.0);
  CHECK(h.i1 == doctest::Approx(renyi(0.5, f, g) / 2.0));
  const double I = renyi(0.5, f, g);
  CHECK(h.i21 == doctest::Approx(0.5 * j_quantity(f, g) / 2.0));
  const auto h3 = homogeneous_uniform_quantities(3, f, g);
  CHECK(h3.i21 == doctest::Approx((0.5 - 1.0 / 3.0) / 3.0 * I * I + j_quantity(f, g) / 6.0));

  // Homogeneous K=2 with tilted references agrees with the general formula.
  const double alpha[] = {0.5, 0.5};
  const int sub[] = {0};
  const auto ref = tilted(f, g, 0.5);
  const auto general = change_of_measure_quantities(alpha, sub, {{f, g}, {g, f}}, {ref, ref});
  CHECK(general.i1 == doctest::Approx(h.i1).epsilon(1e-12));
  CHECK(general.i22 == doctest::Approx(0.0));

  // f == g with f* = f: nothing to distinguish.
  const auto same = change_of_measure_quantities(alpha, sub, {{f, f}, {f, f}}, {f, f});
  CHECK(same.i1 == doctest::Approx(0.0));

  // Non-homogeneous two-block instance summed directly in mpmath.
  const double w[] = {0.4, 0.6};
  const std::vector<std::vector<FiniteDistribution>> kernel = {{ber(0.3), ber(0.1)},
                                                               {ber(0.1), ber(0.2)}};
  const std::vector<FiniteDistribution> refs = {ber(0.15), ber(0.25)};
  const int first[] = {0};
  const auto a = change_of_measure_quantities(w, first, kernel, refs);
  CHECK(a.i1 == doctest::Approx(0.0798231233001725).epsilon(1e-12));
  CHECK(a.i21 == doctest::Approx(0.1761691028525889).epsilon(1e-12));
  CHECK(a.i22 == doctest::Approx(0.0));
  const int both[] = {0, 1};
  const auto b = change_of_measure_quantities(w, both, kernel, refs);
  CHECK(b.i1 == doctest::Approx(0.03752319569974806).epsilon(1e-12));
  CHECK(b.i21 == doctest::Approx(0.0826064265422381).epsilon(1e-12));
  CHECK(b.i22 == doctest::Approx(0.001192855916667433).epsilon(1e-9));

  const int out_of_range[] = {2};
  CHECK_THROWS_AS(change_of_measure_quantities(w, out_of_range, kernel, refs),
                  std::invalid_argument);
}

TEST_CASE("property: Hellinger identity, skew symmetry, monotonicity, additivity") {
  SplitMix64 rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t L = 2 + rng.below(5);
    const auto f = random_distribution(rng, L);
    const auto g = random_distribution(rng, L);
    CHECK(renyi(0.5, f, g) ==
          doctest::Approx(-2.0 * std::log(1.0 - hellinger_sq(f, g))).epsilon(1e-12));
    for (double a : {0.2, 0.3, 0.7}) {
      CHECK((1.0 - a) * renyi(a, f, g) ==
            doctest::Approx(a * renyi(1.0 - a, g, f)).epsilon(1e-10));
    }
    double prev = 0.0;
    for (double a : {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.5}) {
      const double d = renyi(a, f, g);
      CHECK(d >= prev - 1e-12);
      prev = d;
    }
    const auto f2 = random_distribution(rng, 3);
    const auto g2 = random_distribution(rng, 3);
    const auto fp = FiniteDistribution::product(f, f2);
    const auto gp = FiniteDistribution::product(g, g2);
    for (double a : {0.5, 1.5}) {
      CHECK(renyi(a, fp, gp) ==
            doctest::Approx(renyi(a, f, g) + renyi(a, f2, g2)).epsilon(1e-10));
    }
  }
}
