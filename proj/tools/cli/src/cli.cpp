#include "tsbm/cli/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>

#include "tsbm/errors.hpp"
#include "tsbm/harness/config.hpp"
#include "tsbm/harness/experiment.hpp"
#include "tsbm/harness/figures.hpp"
#include "tsbm/harness/report.hpp"
#include "tsbm/metrics.hpp"
#include "tsbm/rng.hpp"

namespace tsbm::cli {

namespace {

namespace fs = std::filesystem;
using harness::UsageError;

// Model parameters shared by generate, divergence, recover and threshold.
struct ModelFlags {
  std::optional<std::size_t> N;
  int K = 2;
  std::optional<std::size_t> T;
  std::optional<double> mu1, p11, p01, nu1, q11, q01;
  std::string unit = "abs";
  std::string f, g;
  std::string labels = "iid";

  bool markov() const { return mu1 || p11 || nu1 || q11; }
  bool categorical() const { return !f.empty() || !g.empty(); }
};

void add_chain_flags(CLI::App* app, ModelFlags& m) {
  app->add_option("--mu1", m.mu1, "intra-block P(interaction) (in --unit)");
  app->add_option("--p11", m.p11, "intra-block P(1 -> 1)");
  app->add_option("--p01", m.p01, "intra-block P(0 -> 1) (in --unit); default: stationary");
  app->add_option("--nu1", m.nu1, "inter-block P(interaction) (in --unit)");
  app->add_option("--q11", m.q11, "inter-block P(1 -> 1)");
  app->add_option("--q01", m.q01, "inter-block P(0 -> 1) (in --unit); default: stationary");
  app->add_option("--unit", m.unit, "density unit of mu1, nu1, p01, q01")
      ->check(CLI::IsMember({"abs", "logN/N", "1/N"}));
}

void add_model_flags(CLI::App* app, ModelFlags& m) {
  app->add_option("--N", m.N, "number of nodes");
  app->add_option("--K", m.K, "number of blocks");
  app->add_option("--T", m.T, "number of snapshots");
  add_chain_flags(app, m);
  app->add_option("--f", m.f, "intra-block categorical law, comma separated");
  app->add_option("--g", m.g, "inter-block categorical law, comma separated");
}

harness::ChainSpec chain(double mu1, double p11, std::optional<double> p01,
                         harness::DensityUnit unit) {
  return {mu1, p11, p01, unit};
}

/// Model from the flags. Sizes left empty fall back to `N`, `T`.
harness::ModelSpec model_from_flags(const ModelFlags& m, std::size_t N, std::size_t T) {
  if (m.markov() && m.categorical()) {
    throw UsageError("give either chain parameters or --f/--g, not both");
  }
  harness::ModelSpec model;
  model.N = m.N.value_or(N);
  model.K = m.K;
  model.T = m.T.value_or(T);
  if (m.labels == "balanced") model.labels = harness::LabelDraw::kBalanced;
  if (m.categorical()) {
    if (m.f.empty() || m.g.empty()) throw UsageError("categorical model needs --f and --g");
    model.kind = harness::ModelKind::kCategorical;
    model.f = harness::parse_list(m.f);
    model.g = harness::parse_list(m.g);
  } else {
    if (!(m.mu1 && m.p11 && m.nu1 && m.q11)) {
      throw UsageError("Markov model needs --mu1, --p11, --nu1 and --q11");
    }
    const auto unit = harness::parse_unit(m.unit);
    model.kind = harness::ModelKind::kMarkov;
    model.intra = chain(*m.mu1, *m.p11, m.p01, unit);
    model.inter = chain(*m.nu1, *m.q11, m.q01, unit);
  }
  model.validate();
  return model;
}

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  return out;
}

// ---------------------------------------------------------------- generate

struct GenerateArgs {
  ModelFlags model;
  fs::path config;
  std::uint64_t seed = 1;
  fs::path out;
};

int cmd_generate(const GenerateArgs& a, std::ostream& out) {
  harness::ModelSpec model;
  if (!a.config.empty()) {
    if (a.model.markov() || a.model.categorical()) {
      throw UsageError("--config cannot be combined with model flags");
    }
    model = harness::load_config(a.config).model;
    if (a.model.N) model.N = *a.model.N;
    if (a.model.T) model.T = *a.model.T;
    model.validate();
  } else {
    if (!a.model.N) throw UsageError("generate needs --N (or --config)");
    model = model_from_flags(a.model, 0, 1);
  }
  const Labelling sigma =
      harness::draw_labels(model, derive_seed(a.seed, harness::kLabelStream));
  const SnapshotArray x =
      harness::draw_snapshots(model, sigma, derive_seed(a.seed, harness::kDataStream));
  write_snapshots(a.out, x, &sigma);
  fs::path sidecar = a.out;
  sidecar += ".labels";
  write_labels(sidecar, sigma);
  out << "wrote " << a.out.string() << " (N=" << x.N() << ", T=" << x.T()
      << ", nonzero=" << x.nonzero_count() << ") and " << sidecar.string() << '\n';
  return kExitOk;
}

// -------------------------------------------------------------- divergence

struct DivergenceArgs {
  ModelFlags model;
  bool json = false;
  fs::path out;
};

int cmd_divergence(const DivergenceArgs& a, std::ostream& out) {
  if (!a.model.N) throw UsageError("divergence needs --N");
  const auto model = model_from_flags(a.model, 0, 1);
  harness::DivergenceReport r;
  const auto N = static_cast<std::int64_t>(model.N);
  if (model.kind == harness::ModelKind::kMarkov) {
    if (!a.model.T) throw UsageError("Markov divergence needs --T");
    const auto p = model.markov();
    r = harness::markov_report(p.intra, p.inter, static_cast<std::int64_t>(model.T), N,
                               model.K);
  } else {
    r = harness::categorical_report(FiniteDistribution(model.f), FiniteDistribution(model.g),
                                    N, model.K);
  }
  const auto j = harness::report_to_json(r);
  if (a.json) {
    out << j.dump(2) << '\n';
  } else {
    harness::write_report_text(out, r);
  }
  if (!a.out.empty()) {
    auto file = open_out(a.out);
    file << j.dump(2) << '\n';
  }
  return kExitOk;
}

// --------------------------------------------------------------- threshold

struct ThresholdArgs {
  ModelFlags model;
  std::string convention = "exact";
  double lo = 0.05;
  double hi = 0.95;
  double step = 0.05;
  std::optional<std::int64_t> t_max;
  fs::path out;
};

int cmd_threshold(const ThresholdArgs& a, std::ostream& out) {
  const auto conv = harness::parse_convention(a.convention);
  if (!conv) throw UsageError("unknown convention " + a.convention);
  const auto& m = a.model;
  if (!m.N || !m.mu1 || !m.nu1) throw UsageError("threshold needs --N, --mu1 and --nu1");
  if (m.categorical()) throw UsageError("threshold applies to Markov models only");
  const std::size_t N = *m.N;
  if (N < 2) throw UsageError("N must be >= 2");
  const std::int64_t t_max = a.t_max.value_or(1000000);
  if (t_max < 1) throw UsageError("--t-max must be >= 1");

  if (m.p11 && m.q11) {
    const auto model = model_from_flags(m, N, 1);
    const auto p = model.markov();
    const auto t = t_star(p.intra, p.inter, static_cast<std::int64_t>(N), m.K, *conv, t_max);
    out << "T* (" << harness::convention_name(*conv) << "): "
        << (t ? std::to_string(*t) : std::string("inf")) << '\n';
    return kExitOk;
  }
  if (m.p11 || m.q11 || m.p01 || m.q01) {
    throw UsageError("give both --p11 and --q11 for a single value, or neither for a grid");
  }
  const double n = static_cast<double>(N);
  const double to_log_units =
      harness::unit_scale(harness::parse_unit(m.unit), N) / (std::log(n) / n);
  const auto axis = harness::grid_points(a.lo, a.hi, a.step);
  const auto cells = harness::threshold_grid(static_cast<std::int64_t>(N), m.K,
                                             *m.mu1 * to_log_units, *m.nu1 * to_log_units,
                                             axis, axis, *conv);
  const nlohmann::json echo{{"N", N},     {"K", m.K},   {"mu1", *m.mu1 * to_log_units},
                            {"nu1", *m.nu1 * to_log_units}, {"unit", "logN/N"},
                            {"lo", a.lo}, {"hi", a.hi}, {"step", a.step},
                            {"convention", harness::convention_name(*conv)}};
  auto emit = [&](std::ostream& o) {
    o << "# tsbm threshold grid\n# config: " << echo.dump() << '\n';
    harness::write_threshold_csv(o, cells);
  };
  if (a.out.empty()) {
    emit(out);
  } else {
    auto file = open_out(a.out);
    emit(file);
    out << "wrote " << a.out.string() << " (" << cells.size() << " cells)\n";
  }
  return kExitOk;
}

// ----------------------------------------------------------------- recover

struct RecoverArgs {
  fs::path input;
  ModelFlags model;
  std::string algorithm = "alg2";
  std::string init = "spectral";
  std::string order = "sync";
  double flip_fraction = 0.25;
  fs::path truth;
  std::uint64_t seed = 1;
  fs::path out;
};

int cmd_recover(const RecoverArgs& a, std::ostream& out) {
  const auto alg = harness::parse_algorithm(a.algorithm);
  if (!alg) throw UsageError("unknown algorithm " + a.algorithm);
  if (a.model.N || a.model.T) throw UsageError("N and T are read from the input file");

  SnapshotFile file = read_snapshots(a.input);
  const SnapshotArray& x = file.array;
  std::optional<Labelling> truth;
  fs::path sidecar = a.input;
  sidecar += ".labels";
  if (!a.truth.empty()) {
    truth = read_labels(a.truth);
  } else if (file.labels) {
    truth = file.labels;
  } else if (fs::exists(sidecar)) {
    truth = read_labels(sidecar);
  }
  if (truth && truth->size() != x.N()) {
    throw UsageError("truth has " + std::to_string(truth->size()) + " labels for " +
                     std::to_string(x.N()) + " nodes");
  }

  harness::ModelSpec model;
  model.N = x.N();
  model.T = x.T();
  model.K = a.model.K;
  const bool given = a.model.markov() || a.model.categorical();
  if (harness::needs_parameters(*alg) && !given) {
    throw UsageError(a.algorithm + " needs kernel parameters (--mu1 --p11 --nu1 --q11 or --f --g)");
  }
  if (given) {
    model = model_from_flags(a.model, x.N(), x.T());
    if (model.kind == harness::ModelKind::kMarkov && x.alphabet() != 2) {
      throw UsageError("chain parameters need a binary snapshot file");
    }
    if (model.kind == harness::ModelKind::kCategorical &&
        (x.T() != 1 || model.f.size() < static_cast<std::size_t>(x.alphabet()))) {
      throw UsageError("--f/--g must cover the file's alphabet of a single-snapshot file");
    }
  } else if (x.alphabet() != 2 && (harness::is_online(*alg) || *alg == harness::Algorithm::kAlg4)) {
    throw UsageError(a.algorithm + " needs a binary snapshot file");
  }
  if (*alg == harness::Algorithm::kMle &&
      std::pow(static_cast<double>(model.K), static_cast<double>(model.N)) > 1e6) {
    throw UsageError("mle needs K^N <= 1e6");
  }

  harness::AlgorithmSpec spec;
  spec.algorithm = *alg;
  if (a.init == "spectral") {
    spec.init = harness::InitKind::kSpectral;
  } else if (a.init == "random") {
    spec.init = harness::InitKind::kRandom;
  } else {
    spec.init = harness::InitKind::kPerturbed;
    if (!truth) throw UsageError("perturbed init needs a truth labelling");
  }
  spec.flip_fraction = a.flip_fraction;
  spec.online.order =
      a.order == "async" ? UpdateOrder::kAsynchronous : UpdateOrder::kSynchronous;

  const auto traj =
      harness::run_algorithm(spec, model, x, truth ? &*truth : nullptr, a.seed);
  const Labelling& result = traj.labels.back();
  out << "algorithm: " << spec.display_name() << '\n';
  out << "N: " << x.N() << "  T: " << x.T() << "  K: " << model.K << '\n';
  if (truth) {
    const auto hs = ham_star(*truth, result);
    out << "accuracy: "
        << fixed4(1.0 - static_cast<double>(hs.distance) / static_cast<double>(x.N())) << '\n';
    out << "ham_star: " << hs.distance << '\n';
  }
  if (!a.out.empty()) {
    write_labels(a.out, result);
    out << "wrote " << a.out.string() << '\n';
  }
  return kExitOk;
}

// -------------------------------------------------------------- experiment

struct ExperimentArgs {
  fs::path config;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<unsigned> threads;
  bool deterministic = false;
  fs::path out;
  fs::path summary;
};

int cmd_experiment(const ExperimentArgs& a, std::ostream& out) {
  auto c = harness::load_config(a.config);
  if (a.seed) c.seed = *a.seed;
  if (a.trials) c.trials = *a.trials;
  if (a.threads) c.threads = *a.threads;
  if (!a.out.empty()) c.out = a.out;
  c.deterministic = a.deterministic;
  c.validate();
  const auto records = harness::run_experiment(c);
  const auto echo = harness::config_to_json(c);
  if (c.out.empty()) {
    harness::write_records_csv(out, records, echo, c.deterministic);
  } else {
    harness::write_records_csv(c.out, records, echo, c.deterministic);
    out << "wrote " << c.out.string() << " (" << records.size() << " runs)\n";
  }
  if (!a.summary.empty()) {
    auto file = open_out(a.summary);
    harness::write_summary_csv(file, harness::summarize(records));
  }
  return kExitOk;
}

// -------------------------------------------------------- replicate-figure

struct FigureArgs {
  int figure = 0;
  std::optional<int> trials;
  std::uint64_t seed = 1;
  bool deterministic = false;
  std::string convention = "bhattacharyya";
  std::optional<double> step;
  unsigned threads = 0;
  fs::path out = ".";
};

int cmd_replicate_figure(const FigureArgs& a, std::ostream& out) {
  harness::FigureOptions o;
  const auto conv = harness::parse_convention(a.convention);
  if (!conv) throw UsageError("unknown convention " + a.convention);
  o.convention = *conv;
  o.trials = a.trials;
  o.seed = a.seed;
  o.deterministic = a.deterministic;
  o.grid_step = a.step;
  o.threads = a.threads;
  o.out_dir = a.out;
  for (const auto& p : harness::replicate_figure(a.figure, o)) out << p.string() << '\n';
  return kExitOk;
}

const std::vector<std::string> kConventions{"exact", "itilde", "bhattacharyya"};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Community recovery in temporal stochastic block models", "tsbm"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "expand all subcommand help");

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "sample labels and snapshots to a tsbm file");
  add_model_flags(generate, gen.model);
  generate->add_option("--labels", gen.model.labels, "label draw")
      ->check(CLI::IsMember({"iid", "balanced"}));
  generate->add_option("--config", gen.config, "JSON experiment config (model section used)")
      ->check(CLI::ExistingFile);
  generate->add_option("--seed", gen.seed, "trial seed");
  generate->add_option("--out", gen.out, "output tsbm file")->required();

  DivergenceArgs div;
  auto* divergence = app.add_subcommand("divergence", "divergences, thresholds and bounds");
  add_model_flags(divergence, div.model);
  divergence->add_flag("--json", div.json, "print JSON instead of text");
  divergence->add_option("--out", div.out, "also write the JSON report here");

  ThresholdArgs thr;
  auto* threshold = app.add_subcommand("threshold", "T* for one chain pair or a grid");
  threshold->add_option("--N", thr.model.N, "number of nodes");
  threshold->add_option("--K", thr.model.K, "number of blocks");
  add_chain_flags(threshold, thr.model);
  threshold->add_option("--convention", thr.convention, "threshold definition")
      ->check(CLI::IsMember(kConventions));
  threshold->add_option("--lo", thr.lo, "grid start");
  threshold->add_option("--hi", thr.hi, "grid end");
  threshold->add_option("--step", thr.step, "grid spacing");
  threshold->add_option("--t-max", thr.t_max, "largest T searched");
  threshold->add_option("--out", thr.out, "CSV output (default stdout)");

  RecoverArgs rec;
  auto* recover = app.add_subcommand("recover", "run one algorithm on a snapshot file");
  recover->add_option("input", rec.input, "tsbm file")->required()->check(CLI::ExistingFile);
  add_model_flags(recover, rec.model);
  recover->add_option("--algorithm", rec.algorithm, "alg1, alg1-loo, alg2 ... alg6, mle, "
                                                    "union-spectral, aggregate-spectral, "
                                                    "squared-adjacency");
  recover->add_option("--init", rec.init, "online initialisation")
      ->check(CLI::IsMember({"spectral", "random", "perturbed"}));
  recover->add_option("--order", rec.order, "online sweep order")
      ->check(CLI::IsMember({"sync", "async"}));
  recover->add_option("--flip-fraction", rec.flip_fraction, "labels changed by perturbed init")
      ->check(CLI::Range(0.0, 1.0));
  recover->add_option("--truth", rec.truth, "labels file")->check(CLI::ExistingFile);
  recover->add_option("--seed", rec.seed, "trial seed");
  recover->add_option("--out", rec.out, "write the recovered labels here");

  ExperimentArgs exp;
  auto* experiment = app.add_subcommand("experiment", "seeded trials from a JSON config");
  experiment->add_option("config", exp.config, "JSON config")->required()
      ->check(CLI::ExistingFile);
  experiment->add_option("--seed", exp.seed, "master seed");
  experiment->add_option("--trials", exp.trials, "number of trials");
  experiment->add_option("--threads", exp.threads, "worker threads (0: all cores)");
  experiment->add_flag("--deterministic", exp.deterministic,
                       "omit the timestamp and zero the timings");
  experiment->add_option("--out", exp.out, "CSV output (default: config out, else stdout)");
  experiment->add_option("--summary", exp.summary, "per-snapshot mean and standard error CSV");

  FigureArgs fig;
  auto* figure = app.add_subcommand("replicate-figure", "CSV bundle of a built-in figure");
  figure->add_option("figure", fig.figure, "figure id")->required()->check(CLI::Range(2, 7));
  figure->add_option("--trials", fig.trials, "trials per panel or grid point");
  figure->add_option("--seed", fig.seed, "master seed");
  figure->add_flag("--deterministic", fig.deterministic,
                   "omit the timestamp and zero the timings");
  figure->add_option("--convention", fig.convention, "threshold definition of figure 2")
      ->check(CLI::IsMember(kConventions));
  figure->add_option("--step", fig.step, "grid spacing of figures 2 and 3");
  figure->add_option("--threads", fig.threads, "worker threads (0: all cores)");
  figure->add_option("--out", fig.out, "output directory");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (generate->parsed()) return cmd_generate(gen, out);
    if (divergence->parsed()) return cmd_divergence(div, out);
    if (threshold->parsed()) return cmd_threshold(thr, out);
    if (recover->parsed()) return cmd_recover(rec, out);
    if (experiment->parsed()) return cmd_experiment(exp, out);
    if (figure->parsed()) return cmd_replicate_figure(fig, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace tsbm::cli
