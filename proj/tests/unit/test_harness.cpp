#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "support.hpp"
#include "tsbm/harness/baselines.hpp"
#include "tsbm/harness/config.hpp"
#include "tsbm/harness/experiment.hpp"
#include "tsbm/harness/figures.hpp"
#include "tsbm/harness/report.hpp"
#include "tsbm/metrics.hpp"

using namespace tsbm;
using namespace tsbm::harness;

namespace {

namespace fs = std::filesystem;

double log_n_over_n(double N) { return std::log(N) / N; }

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.model.N = 60;
  c.model.T = 6;
  c.model.intra = {4.0, 0.7, std::nullopt, DensityUnit::kLogNOverN};
  c.model.inter = {1.5, 0.3, std::nullopt, DensityUnit::kLogNOverN};
  AlgorithmSpec online;
  online.algorithm = Algorithm::kAlg2;
  online.init = InitKind::kRandom;
  AlgorithmSpec bff;
  bff.algorithm = Algorithm::kAlg5;
  c.algorithms = {online, bff};
  c.trials = 4;
  c.seed = 99;
  c.deterministic = true;
  return c;
}

std::string csv_of(const ExperimentConfig& c) {
  std::ostringstream s;
  write_records_csv(s, run_experiment(c), config_to_json(c), true);
  return s.str();
}

fs::path scratch(const std::string& name) {
  fs::path p = fs::path(TSBM_TEST_TMPDIR) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::size_t line_count(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) ++n;
  return n;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Mean accuracy at snapshot t of one algorithm over the trials of `records`.
double mean_at(const std::vector<TrialRecord>& records, const std::string& name, std::size_t t) {
  double sum = 0.0;
  int n = 0;
  for (const auto& r : records) {
    if (r.algorithm != name) continue;
    for (std::size_t k = 0; k < r.t.size(); ++k) {
      if (r.t[k] == t) {
        sum += r.accuracy[k];
        ++n;
      }
    }
  }
  REQUIRE(n > 0);
  return sum / n;
}

}  // namespace

TEST_CASE("config JSON round trip and strict keys") {
  const auto c = small_config();
  const auto j = config_to_json(c);
  const auto back = config_from_json(j);
  CHECK(config_to_json(back) == j);
  CHECK(back.algorithms.size() == 2);
  CHECK(back.model.intra.unit == DensityUnit::kLogNOverN);

  auto bad = j;
  bad["model"]["typo"] = 1;
  CHECK_THROWS_AS(config_from_json(bad), UsageError);
  bad = j;
  bad["algorithms"] = nlohmann::json::array({"alg9"});
  CHECK_THROWS_AS(config_from_json(bad), UsageError);
  bad = j;
  bad["model"]["unit"] = "furlongs";
  CHECK_THROWS_AS(config_from_json(bad), UsageError);
}

TEST_CASE("chain specs resolve in every unit") {
  const std::size_t N = 500;
  const double rho = log_n_over_n(N);
  const auto log_chain = ChainSpec{1.5, 0.7, std::nullopt, DensityUnit::kLogNOverN}.resolve(N);
  const auto direct = chain_from_stationary(1.5 * rho, 0.7);
  CHECK(log_chain.mu1 == doctest::Approx(direct.mu1).epsilon(1e-15));
  CHECK(log_chain.p01 == doctest::Approx(direct.p01).epsilon(1e-15));

  const auto per_n = ChainSpec{2.5, 0.6, std::nullopt, DensityUnit::kOneOverN}.resolve(N);
  CHECK(per_n.mu1 == doctest::Approx(2.5 / 500.0));

  const auto explicit_p01 = ChainSpec{0.1, 0.5, 0.2, DensityUnit::kAbsolute}.resolve(N);
  CHECK(explicit_p01.p01 == 0.2);
  CHECK(explicit_p01.mu1 == 0.1);

  const auto frozen = ChainSpec{0.05, 1.0, std::nullopt, DensityUnit::kAbsolute}.resolve(N);
  CHECK(frozen.p11 == 1.0);
  CHECK(frozen.p01 == 0.0);

  CHECK_THROWS_AS((ChainSpec{2.0, 0.5, std::nullopt, DensityUnit::kAbsolute}.resolve(N)),
                  UsageError);
}

TEST_CASE("experiment validation happens before any trial") {
  auto c = small_config();
  c.trials = 0;
  CHECK_THROWS_AS(c.validate(), UsageError);

  c = small_config();
  c.model.kind = ModelKind::kCategorical;
  c.model.f = {0.5, 0.5};
  c.model.g = {0.9, 0.1};
  CHECK_THROWS_AS(c.validate(), UsageError);  // alg2 on a categorical model

  c = small_config();
  c.algorithms[0].algorithm = Algorithm::kMle;
  CHECK_THROWS_AS(c.validate(), UsageError);  // 2^60 labellings

  c = small_config();
  c.algorithms[0].algorithm = Algorithm::kAlg4;
  c.model.T = 1;
  CHECK_THROWS_AS(c.validate(), UsageError);

  c = small_config();
  c.algorithms[0].algorithm = Algorithm::kAlg3;
  c.algorithms[0].online.refresh_every = 0;
  CHECK_THROWS_AS(c.validate(), UsageError);
}

TEST_CASE("perturbed labels change exactly the requested number of nodes") {
  SplitMix64 rng(5);
  for (int K : {2, 3, 5}) {
    const auto truth = testing::random_labelling(rng, 200, K);
    for (double fraction : {0.0, 0.1, 0.25, 1.0}) {
      const auto l = perturb_labels(truth, fraction, 17);
      std::size_t changed = 0;
      for (std::size_t i = 0; i < truth.size(); ++i) changed += l[i] != truth[i];
      CHECK(changed == static_cast<std::size_t>(std::lround(fraction * 200)));
    }
  }
  // 25% flips in two blocks keeps accuracy at 0.75.
  const auto truth = testing::random_labelling(rng, 1000, 2);
  CHECK(accuracy(truth, perturb_labels(truth, 0.25, 3)) == doctest::Approx(0.75));
}

TEST_CASE("balanced label draw") {
  ModelSpec m;
  m.N = 101;
  m.K = 3;
  m.labels = LabelDraw::kBalanced;
  const auto l = draw_labels(m, 8);
  std::vector<int> sizes(3);
  for (std::size_t i = 0; i < l.size(); ++i) ++sizes[static_cast<std::size_t>(l[i])];
  CHECK(*std::max_element(sizes.begin(), sizes.end()) -
            *std::min_element(sizes.begin(), sizes.end()) <=
        1);
}

TEST_CASE("experiment output is deterministic and independent of the worker count") {
  auto c = small_config();
  c.threads = 1;
  const std::string serial = csv_of(c);
  CHECK(serial == csv_of(c));
  c.threads = 3;
  CHECK(serial == csv_of(c));
  c.seed = 100;
  CHECK(serial != csv_of(c));
}

TEST_CASE("long CSV schema and parameter echo") {
  auto c = small_config();
  const auto records = run_experiment(c);
  REQUIRE(records.size() == 8);  // 4 trials x 2 algorithms
  for (const auto& r : records) {
    if (r.algorithm == "alg2/random") {
      CHECK(r.t.size() == c.model.T);
    } else {
      CHECK(r.t == std::vector<std::size_t>{c.model.T});
    }
    for (double a : r.accuracy) CHECK((a >= 0.0 && a <= 1.0));
  }

  std::ostringstream s;
  write_records_csv(s, records, config_to_json(c), false);
  std::istringstream in(s.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "# tsbm experiment");
  std::getline(in, line);
  REQUIRE(line.rfind("# config: ", 0) == 0);
  // The echo alone rebuilds the experiment.
  const auto echoed = config_from_json(nlohmann::json::parse(line.substr(10)));
  CHECK(csv_of(echoed) == csv_of(c));
  std::getline(in, line);
  CHECK(line.rfind("# generated: ", 0) == 0);
  std::getline(in, line);
  CHECK(line == "trial,t,algorithm,accuracy,ham_star,seconds");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    CHECK(std::count(line.begin(), line.end(), ',') == 5);
    ++rows;
  }
  CHECK(rows == 4 * (c.model.T + 1));

  const std::string det = csv_of(c);
  CHECK(det.find("# generated") == std::string::npos);
  CHECK(det.find(",0.000000\n") != std::string::npos);
}

TEST_CASE("summary reports mean and standard error") {
  std::vector<TrialRecord> records(3);
  const double acc[] = {0.5, 0.7, 0.9};
  for (int k = 0; k < 3; ++k) {
    records[k].trial = k;
    records[k].algorithm = "x";
    records[k].t = {4};
    records[k].accuracy = {acc[k]};
    records[k].ham_star = {0};
    records[k].seconds = {0.0};
  }
  const auto rows = summarize(records);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].n == 3);
  CHECK(rows[0].mean == doctest::Approx(0.7));
  CHECK(rows[0].se == doctest::Approx(0.2 / std::sqrt(3.0)));
}

TEST_CASE("squared adjacency equals sum of A_t^2 - D_t") {
  SplitMix64 rng(31);
  const std::size_t N = 25, T = 4;
  SnapshotArray x(N, T);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t i = 0; i < N; ++i) {
      for (std::size_t j = i + 1; j < N; ++j) x.set(t, i, j, rng.uniform() < 0.2);
    }
  }
  Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(N, N);
  for (std::size_t t = 0; t < T; ++t) {
    const Eigen::MatrixXd a = snapshot_adjacency(x, t).dense();
    Eigen::MatrixXd sq = a * a;
    sq.diagonal() -= a.rowwise().sum();
    expected += sq;
  }
  const Eigen::MatrixXd got = squared_adjacency(x).dense();
  CHECK((got - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("divergence report of identical chains is all zeros") {
  const auto c = chain_from_stationary(0.02, 0.6);
  const auto r = markov_report(c, c, 10, 500, 2);
  CHECK(r.I == 0.0);
  CHECK(r.J == 0.0);
  CHECK(r.hellinger_sq == 0.0);
  CHECK(*r.bhattacharyya == 0.0);
  CHECK(std::abs(r.approx->value) < 1e-15);
  CHECK(!r.beta_half);
  CHECK(!r.t_star_exact);
  CHECK(!r.t_star_itilde);
  CHECK(*r.i_tilde == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("divergence report at the figure-4(a) chains") {
  const double rho = log_n_over_n(500);
  const auto f = chain_from_stationary(1.5 * rho, 0.7);
  const auto g = chain_from_stationary(1.5 * rho, 0.3);
  // Exact D_1/2 crosses 2 log N / N between T = 6 and 7; -log Z between 12
  // and 13, the value printed with the figure.
  CHECK(markov_report(f, g, 7, 500, 2).I >= 2 * rho);
  CHECK(markov_report(f, g, 6, 500, 2).I < 2 * rho);
  CHECK(*markov_report(f, g, 13, 500, 2).bhattacharyya >= 2 * rho);
  CHECK(*markov_report(f, g, 12, 500, 2).bhattacharyya < 2 * rho);

  const auto r = markov_report(f, g, 13, 500, 2);
  CHECK(*r.t_star_exact == 7);
  CHECK(*r.t_star_bhattacharyya == 13);
  CHECK(r.hellinger_sq == doctest::Approx(-std::expm1(-r.I / 2)));

  const auto j = report_to_json(r);
  for (const char* key : {"i21_linear", "i21_quadratic", "lower_linear", "lower_quadratic"}) {
    CHECK(j["bounds"].contains(key));
  }
  CHECK(j["t_star"]["bhattacharyya"] == 13);
  std::ostringstream text;
  write_report_text(text, r);
  CHECK(text.str().find("lower bound (I21 quadratic)") != std::string::npos);
}

TEST_CASE("categorical report") {
  const FiniteDistribution f({0.4, 0.6});
  const FiniteDistribution g({0.8, 0.2});
  const auto r = categorical_report(f, g, 100, 2);
  CHECK(r.I == doctest::Approx(renyi(0.5, f, g)));
  CHECK(r.J == doctest::Approx(j_quantity(f, g)));
  CHECK(*r.beta_half == doctest::Approx(beta_ratio(0.5, f, g)));
  CHECK(!r.T);
  CHECK(report_to_json(r)["model"] == "categorical");
}

TEST_CASE("threshold grid: diagonal cells are infinite with equal densities") {
  const auto axis = grid_points(0.1, 0.9, 0.2);
  CHECK(axis == std::vector<double>{0.1, 0.3, 0.5, 0.7, 0.9});
  const auto cells = threshold_grid(500, 2, 1.5, 1.5, axis, axis, ThresholdConvention::kExact);
  REQUIRE(cells.size() == 25);
  for (const auto& c : cells) CHECK((c.p11 == c.q11) == !c.t_star.has_value());

  std::ostringstream s;
  write_threshold_csv(s, cells);
  CHECK(s.str().find("0.5,0.5,inf,inf") != std::string::npos);
  CHECK_THROWS_AS(grid_points(0.5, 0.1, 0.1), UsageError);
  CHECK_THROWS_AS(threshold_grid(500, 2, 1.5, 1.5, {1.0}, {0.5}, ThresholdConvention::kExact),
                  UsageError);
}

TEST_CASE("threshold grid: moving away from the diagonal never raises T*") {
  for (auto conv : {ThresholdConvention::kExact, ThresholdConvention::kITilde}) {
    for (double q : {0.1, 0.3, 0.5}) {
      std::vector<double> ps;
      for (double p = q + 0.05; p < 0.96; p += 0.05) ps.push_back(p);
      const auto up = threshold_grid(500, 2, 1.5, 1.5, ps, {q}, conv);
      for (std::size_t k = 1; k < up.size(); ++k) {
        REQUIRE(up[k].t_star);
        CHECK(*up[k].t_star <= *up[k - 1].t_star);
      }
    }
  }
}

TEST_CASE("figure bundles have the documented structure") {
  FigureOptions o;
  o.deterministic = true;
  o.trials = 2;
  o.out_dir = scratch("fig2");
  const auto two = replicate_figure(2, o);
  REQUIRE(two.size() == 3);
  for (const auto& p : two) CHECK(line_count(p) == 3 + 19 * 19);

  o.out_dir = scratch("fig4");
  const auto four = replicate_figure(4, o);
  REQUIRE(four.size() == 7);
  std::set<std::string> names;
  for (const auto& p : four) names.insert(p.filename().string());
  for (const char* n : {"fig4a_spectral.csv", "fig4a_random.csv", "fig4b_spectral.csv",
                        "fig4b_random.csv", "fig4c_spectral.csv", "fig4c_random.csv",
                        "fig4_summary.csv"}) {
    CHECK(names.count(n) == 1);
  }
  // 2 trials x T = 20 rows after three header lines.
  CHECK(line_count(o.out_dir / "fig4b_random.csv") == 3 + 2 * 20);

  CHECK_THROWS_AS(replicate_figure(8, o), UsageError);
}

TEST_CASE("figure 4 bundle is byte-identical across runs") {
  FigureOptions o;
  o.deterministic = true;
  o.trials = 2;
  const fs::path a = scratch("det_a");
  const fs::path b = scratch("det_b");
  o.out_dir = a;
  const auto files = replicate_figure(4, o);
  o.out_dir = b;
  replicate_figure(4, o);
  for (const auto& p : files) {
    CHECK(slurp(p) == slurp(b / p.filename()));
  }
}

TEST_CASE("figure 3 hard band lies on the diagonal (mu1 = 2.5 panel)") {
  // Pilot (10 trials per cell): the band is visible for P11 = Q11 >= 0.6;
  // below that the density gap alone separates the blocks.
  const int trials = 10;
  const auto alg = online_algorithm(Algorithm::kAlg2, InitKind::kRandom);
  auto cell_mean = [&](double p, double q, std::uint64_t seed) {
    ExperimentConfig c;
    c.model = fig3_model('b', p, q);
    c.algorithms = {alg};
    c.trials = trials;
    c.seed = seed;
    return mean_at(run_experiment(c), alg.display_name(), 10);
  };
  double diag = 0.0;
  int nd = 0;
  for (double p : {0.6, 0.7, 0.8, 0.9}) {
    diag += cell_mean(p, p, 1000 + nd);
    ++nd;
  }
  double off = 0.0;
  int no = 0;
  for (int a = 1; a <= 9; ++a) {
    for (int b = 1; b <= 9; ++b) {
      if (std::abs(a - b) < 3) continue;
      off += cell_mean(a / 10.0, b / 10.0, 2000 + no);
      ++no;
    }
  }
  MESSAGE("diagonal mean " << diag / nd << ", off-diagonal mean " << off / no);
  CHECK(diag / nd <= 0.7);
  CHECK(off / no >= 0.95);
}

TEST_CASE("figure 5(a): accuracy grows with T and exceeds 0.9 at the last snapshot") {
  ExperimentConfig c;
  c.model = fig5_model('a');
  c.algorithms = {online_algorithm(Algorithm::kAlg2, InitKind::kRandom)};
  c.trials = 20;
  c.seed = 5;
  const auto records = run_experiment(c);
  const auto name = c.algorithms[0].display_name();
  double previous = 0.0;
  for (std::size_t t = 10; t <= c.model.T; t += 10) {
    const double m = mean_at(records, name, t);
    CHECK(m >= previous - 0.005);
    previous = m;
  }
  CHECK(mean_at(records, name, c.model.T) > mean_at(records, name, 10));
  CHECK(mean_at(records, name, c.model.T) > 0.9);
}

TEST_CASE("figure 7(a): the online likelihood dominates every baseline") {
  const auto algs = fig7_algorithms();
  std::uint64_t seed = 70;
  for (double q : fig7_grid('a')) {
    ExperimentConfig c;
    c.model = fig7_model('a', q);
    c.algorithms = algs;
    c.trials = 4;
    c.seed = seed++;
    const auto records = run_experiment(c);
    const double online = mean_at(records, "online-likelihood", 30);
    for (const auto& a : algs) {
      CHECK_MESSAGE(online >= mean_at(records, a.display_name(), 30),
                    "Q11 = " << q << ", " << a.display_name());
    }
  }
}
