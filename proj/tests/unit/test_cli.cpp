#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "tsbm/cli/cli.hpp"
#include "tsbm/harness/experiment.hpp"
#include "tsbm/rng.hpp"
#include "tsbm/sbm.hpp"

using namespace tsbm;

namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::path(TSBM_TEST_TMPDIR) / "cli";
  fs::create_directories(dir);
  const fs::path p = dir / name;
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Value after "key: " on its own line, or empty.
std::string field(const std::string& text, const std::string& key) {
  const auto at = text.find(key + ": ");
  if (at == std::string::npos) return {};
  const auto start = at + key.size() + 2;
  return text.substr(start, text.find('\n', start) - start);
}

const std::vector<std::string> kFig4b = {"--mu1", "2.5", "--p11", "0.7", "--nu1", "1.5",
                                         "--q11", "0.3", "--unit", "logN/N"};

std::vector<std::string> with(std::vector<std::string> head, const std::vector<std::string>& tail) {
  head.insert(head.end(), tail.begin(), tail.end());
  return head;
}

}  // namespace

TEST_CASE("usage errors exit with code 2") {
  CHECK(run({}).code == cli::kExitUsage);
  CHECK(run({"frobnicate"}).code == cli::kExitUsage);
  CHECK(run({"--help"}).code == cli::kExitOk);
  CHECK(run({"generate", "--N", "10"}).code == cli::kExitUsage);  // no --out
  CHECK(run({"replicate-figure", "8"}).code == cli::kExitUsage);
  CHECK(run({"threshold", "--N", "500", "--mu1", "1.5", "--nu1", "1.5", "--unit", "logN/N",
             "--step", "0"})
            .code == cli::kExitUsage);
  CHECK(run({"threshold", "--N", "500", "--mu1", "1", "--nu1", "1", "--convention", "other"})
            .code == cli::kExitUsage);
  CHECK(run(with({"divergence", "--N", "500"}, {"--mu1", "0.1", "--p11", "1.5", "--nu1", "0.1",
                                                "--q11", "0.3", "--T", "5"}))
            .code == cli::kExitUsage);
}

TEST_CASE("generate writes a tsbm file and a labels sidecar") {
  const fs::path path = scratch("gen.tsbm");
  const auto r = run(with({"generate", "--N", "120", "--T", "8", "--seed", "3", "--out",
                           path.string()},
                          kFig4b));
  REQUIRE(r.code == 0);
  const auto file = read_snapshots(path);
  fs::path sidecar = path;
  sidecar += ".labels";
  REQUIRE(file.labels);
  CHECK(read_labels(sidecar).labels == file.labels->labels);
  CHECK(file.array.N() == 120);
  CHECK(file.array.T() == 8);

  // Header, labels line, one line per set bit; no comments are written.
  std::ifstream in(path);
  std::string line;
  std::size_t lines = 0;
  while (std::getline(in, line)) ++lines;
  CHECK(lines == 2 + file.array.nonzero_count());

  // Same seed, same bytes.
  const fs::path again = scratch("gen2.tsbm");
  run(with({"generate", "--N", "120", "--T", "8", "--seed", "3", "--out", again.string()},
           kFig4b));
  CHECK(slurp(path) == slurp(again));
}

TEST_CASE("generated density matches the stationary closed form") {
  // Absolute densities with a single block: every pair is intra-block and
  // each bit is 1 with probability mu1 under the stationary chain.
  const fs::path path = scratch("density.tsbm");
  const double mu1 = 0.08;
  REQUIRE(run({"generate", "--N", "300", "--K", "1", "--T", "5", "--mu1", "0.08", "--p11", "0.6",
               "--nu1", "0.08", "--q11", "0.6", "--seed", "11", "--out", path.string()})
              .code == 0);
  const auto x = read_snapshots(path).array;
  const double bits = static_cast<double>(x.pair_count() * x.T());
  const double observed = static_cast<double>(x.nonzero_count()) / bits;
  // Bits within a pattern are correlated; the variance of the per-pair mean
  // of a stationary two-state chain bounds the standard error.
  const double lambda = 0.6 - (0.08 * 0.4 / 0.92);
  double var_pair = 0.0;
  for (int s = 0; s < 5; ++s) {
    for (int t = 0; t < 5; ++t) var_pair += mu1 * (1 - mu1) * std::pow(lambda, std::abs(s - t));
  }
  const double se = std::sqrt(var_pair / 25.0 / static_cast<double>(x.pair_count()));
  CHECK(std::abs(observed - mu1) <= 3 * se);
}

TEST_CASE("recover prints accuracy to four decimals") {
  const fs::path path = scratch("rec.tsbm");
  REQUIRE(run(with({"generate", "--N", "200", "--T", "10", "--seed", "4", "--out",
                    path.string()},
                   kFig4b))
              .code == 0);
  const auto r = run(with({"recover", path.string(), "--algorithm", "alg2", "--init", "random",
                           "--order", "async", "--seed", "4"},
                          kFig4b));
  REQUIRE(r.code == 0);
  const std::string acc = field(r.out, "accuracy");
  REQUIRE(acc.size() == 6);
  CHECK(acc[1] == '.');
  CHECK(std::stod(acc) >= 0.9);

  const fs::path labels = scratch("rec.labels");
  CHECK(run({"recover", path.string(), "--algorithm", "alg5", "--out", labels.string()}).code ==
        0);
  CHECK(read_labels(labels).size() == 200);
}

TEST_CASE("recover without kernel parameters is a usage error") {
  const fs::path path = scratch("nokernel.tsbm");
  REQUIRE(run(with({"generate", "--N", "30", "--T", "3", "--out", path.string()}, kFig4b)).code ==
          0);
  for (const char* alg : {"alg1", "alg1-loo", "alg2", "alg4", "mle"}) {
    const auto r = run({"recover", path.string(), "--algorithm", alg});
    CHECK_MESSAGE(r.code == cli::kExitUsage, alg);
    CHECK(!r.err.empty());
  }
  CHECK(run({"recover", path.string(), "--algorithm", "alg3"}).code == 0);
  CHECK(run({"recover", path.string(), "--algorithm", "nope"}).code == cli::kExitUsage);
}

TEST_CASE("recover: best friends is exact on a static intra-block instance") {
  const fs::path path = scratch("bff.tsbm");
  const auto sigma = sample_labelling(200, 2, 21);
  const auto x = sample_markov_snapshots(sigma, {1.0, 0.0, 1.0}, {0.3, 0.3, 0.3}, 20, 22);
  write_snapshots(path, x, &sigma);
  const auto r = run({"recover", path.string(), "--algorithm", "alg5"});
  REQUIRE(r.code == 0);
  CHECK(field(r.out, "accuracy") == "1.0000");
  CHECK(field(r.out, "ham_star") == "0");
}

TEST_CASE("malformed input is a runtime failure") {
  const fs::path path = scratch("bad.tsbm");
  std::ofstream(path) << "tsbm 1 3 2\n1 1 1\n";  // self loop
  const auto r = run({"recover", path.string(), "--algorithm", "alg5"});
  CHECK(r.code == cli::kExitRuntime);
  CHECK(r.err.find("line 2") != std::string::npos);
}

TEST_CASE("one-trial experiment reproduces recover on the derived seed") {
  const fs::path config = scratch("one.json");
  std::ofstream(config) << R"({
    // one trial of the figure-4(b) chains
    "model": {"type": "markov", "N": 150, "K": 2, "T": 10, "unit": "logN/N",
              "intra": {"mu1": 2.5, "p11": 0.7}, "inter": {"mu1": 1.5, "p11": 0.3}},
    "algorithms": [{"name": "alg2", "init": "random", "order": "async"}],
    "trials": 1,
    "seed": 77
  })";
  const auto e = run({"experiment", config.string(), "--deterministic"});
  REQUIRE(e.code == 0);
  // Last CSV row is trial 0 at t = T.
  const std::string last = e.out.substr(e.out.rfind('\n', e.out.size() - 2) + 1);
  std::vector<std::string> cols;
  std::stringstream ss(last);
  for (std::string c; std::getline(ss, c, ',');) cols.push_back(c);
  REQUIRE(cols.size() == 6);
  CHECK(cols[1] == "10");

  const std::string seed = std::to_string(harness::trial_seed(77, 0));
  const fs::path data = scratch("one.tsbm");
  REQUIRE(run(with({"generate", "--N", "150", "--T", "10", "--seed", seed, "--out",
                    data.string()},
                   kFig4b))
              .code == 0);
  const auto r = run(with({"recover", data.string(), "--algorithm", "alg2", "--init", "random",
                           "--order", "async", "--seed", seed},
                          kFig4b));
  REQUIRE(r.code == 0);
  CHECK(std::stod(field(r.out, "accuracy")) == doctest::Approx(std::stod(cols[3])).epsilon(1e-4));
  CHECK(field(r.out, "ham_star") == cols[4]);
}

TEST_CASE("experiment output is byte-identical across runs and thread counts") {
  const fs::path config = scratch("det.json");
  std::ofstream(config) << R"({
    "model": {"type": "markov", "N": 80, "T": 5, "unit": "logN/N",
              "intra": {"mu1": 4.0, "p11": 0.7}, "inter": {"mu1": 1.5, "p11": 0.3}},
    "algorithms": ["alg3", "alg5", "aggregate-spectral"],
    "trials": 5
  })";
  const fs::path a = scratch("det_a.csv");
  const fs::path b = scratch("det_b.csv");
  const fs::path summary = scratch("det_summary.csv");
  REQUIRE(run({"experiment", config.string(), "--deterministic", "--threads", "1", "--out",
               a.string(), "--summary", summary.string()})
              .code == 0);
  REQUIRE(run({"experiment", config.string(), "--deterministic", "--threads", "3", "--out",
               b.string()})
              .code == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(a).find("# generated") == std::string::npos);
  CHECK(slurp(summary).rfind("algorithm,t,n,mean_accuracy,se\n", 0) == 0);

  // Without --deterministic the timestamp line appears.
  const auto r = run({"experiment", config.string(), "--trials", "1"});
  CHECK(r.out.find("# generated: ") != std::string::npos);
}

TEST_CASE("divergence: identical chains report zeros") {
  const auto r = run({"divergence", "--json", "--N", "500", "--T", "9", "--mu1", "0.02",
                      "--p11", "0.5", "--nu1", "0.02", "--q11", "0.5"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["I"] == 0.0);
  CHECK(j["J"] == 0.0);
  CHECK(j["hellinger_sq"] == 0.0);
  CHECK(j["t_star"]["exact"].is_null());
  CHECK(j["bounds"].contains("lower_linear"));
  CHECK(j["bounds"].contains("lower_quadratic"));
}

TEST_CASE("divergence: threshold crossings at the figure-4(a) chains") {
  auto report = [](const char* T) {
    const auto r = run({"divergence", "--json", "--N", "500", "--T", T, "--mu1", "1.5", "--p11",
                        "0.7", "--nu1", "1.5", "--q11", "0.3", "--unit", "logN/N"});
    REQUIRE(r.code == 0);
    return nlohmann::json::parse(r.out);
  };
  const double threshold = 2 * std::log(500.0) / 500.0;
  CHECK(report("7")["I"].get<double>() >= threshold);
  CHECK(report("6")["I"].get<double>() < threshold);
  CHECK(report("13")["bhattacharyya"].get<double>() >= threshold);
  CHECK(report("12")["bhattacharyya"].get<double>() < threshold);

  const auto text = run({"divergence", "--N", "500", "--T", "13", "--mu1", "1.5", "--p11", "0.7",
                         "--nu1", "1.5", "--q11", "0.3", "--unit", "logN/N"});
  CHECK(text.out.find("I21 linear") != std::string::npos);
  CHECK(text.out.find("I21 quadratic") != std::string::npos);
  CHECK(text.out.find("D_1/2 sparse approx") != std::string::npos);
}

TEST_CASE("threshold: single values and grid") {
  const std::vector<std::string> base{"threshold", "--N", "500", "--nu1", "1.5", "--q11", "0.3",
                                      "--p11", "0.7", "--unit", "logN/N"};
  auto single = [&](const char* mu1, const char* conv) {
    const auto r = run(with(base, {"--mu1", mu1, "--convention", conv}));
    REQUIRE(r.code == 0);
    return r.out.substr(r.out.find(": ") + 2, r.out.size() - r.out.find(": ") - 3);
  };
  CHECK(single("1.5", "bhattacharyya") == "13");
  CHECK(single("2.5", "bhattacharyya") == "14");
  CHECK(single("4.0", "bhattacharyya") == "11");
  CHECK(single("1.5", "exact") == "7");

  const fs::path out = scratch("grid.csv");
  const auto r = run({"threshold", "--N", "500", "--mu1", "1.5", "--nu1", "1.5", "--unit",
                      "logN/N", "--lo", "0.1", "--hi", "0.9", "--step", "0.4", "--out",
                      out.string()});
  REQUIRE(r.code == 0);
  const std::string csv = slurp(out);
  CHECK(csv.find("p11,q11,t_star,log10_t_star\n") != std::string::npos);
  CHECK(csv.find("0.5,0.5,inf,inf") != std::string::npos);
  CHECK(csv.find("0.1,0.9,inf") == std::string::npos);
}

TEST_CASE("replicate-figure writes its bundle") {
  const fs::path dir = scratch("fig2");
  const auto r = run({"replicate-figure", "2", "--step", "0.25", "--deterministic", "--out",
                      dir.string()});
  REQUIRE(r.code == 0);
  CHECK(fs::exists(dir / "fig2a.csv"));
  CHECK(fs::exists(dir / "fig2b.csv"));
  CHECK(fs::exists(dir / "fig2c.csv"));
}
