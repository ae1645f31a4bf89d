#include "tsbm/harness/figures.hpp"

#include <cstdio>
#include <fstream>
#include <string>

#include "tsbm/harness/experiment.hpp"
#include "tsbm/harness/report.hpp"
#include "tsbm/rng.hpp"

namespace tsbm::harness {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr std::size_t kGridN = 500;
constexpr double kGridNu1 = 1.5;  // log N / N

void check_panel(int figure, char panel) {
  if (panel < 'a' || panel >= 'a' + panel_count(figure)) {
    throw UsageError("figure " + std::to_string(figure) + " has no panel " + panel);
  }
}

ChainSpec log_chain(double mu1, double p11) {
  return {mu1, p11, std::nullopt, DensityUnit::kLogNOverN};
}

ChainSpec abs_chain(double mu1, double p11) {
  return {mu1, p11, std::nullopt, DensityUnit::kAbsolute};
}

ModelSpec markov_model(std::size_t N, std::size_t T, ChainSpec intra, ChainSpec inter) {
  ModelSpec m;
  m.kind = ModelKind::kMarkov;
  m.N = N;
  m.K = 2;
  m.T = T;
  m.labels = LabelDraw::kBalanced;
  m.intra = intra;
  m.inter = inter;
  return m;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  return out;
}

void finish(std::ofstream& out, const fs::path& path, std::vector<fs::path>& written) {
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path.string());
  written.push_back(path);
}

fs::path panel_file(const FigureOptions& o, int figure, char panel, const std::string& suffix) {
  return o.out_dir / ("fig" + std::to_string(figure) + panel + suffix + ".csv");
}

ExperimentConfig make_config(const ModelSpec& model, std::vector<AlgorithmSpec> algorithms,
                             int trials, std::uint64_t seed, const FigureOptions& o) {
  ExperimentConfig c;
  c.model = model;
  c.algorithms = std::move(algorithms);
  c.trials = trials;
  c.seed = seed;
  c.deterministic = o.deterministic;
  c.threads = o.threads;
  c.validate();
  return c;
}

json echo(int figure, char panel, const ExperimentConfig& c) {
  return {{"figure", figure}, {"panel", std::string(1, panel)}, {"config", config_to_json(c)}};
}

/// Rows keyed by prefix: prefix,algorithm,t,n,mean_accuracy,se.
void write_prefixed_summary(std::ostream& out, const std::string& prefix,
                            const std::vector<SummaryRow>& rows, bool final_only) {
  std::vector<SummaryRow> keep;
  for (const auto& r : rows) {
    if (!final_only) {
      keep.push_back(r);
      continue;
    }
    bool last = true;
    for (const auto& other : rows) {
      if (other.algorithm == r.algorithm && other.t > r.t) last = false;
    }
    if (last) keep.push_back(r);
  }
  char buf[96];
  for (const auto& r : keep) {
    std::snprintf(buf, sizeof buf, "%zu,%d,%.6f,%.6f", r.t, r.n, r.mean, r.se);
    out << prefix << ',' << r.algorithm << ',' << buf << '\n';
  }
}

// Figure 2: log10 T* over the (P11, Q11) grid.
void figure2(const FigureOptions& o, std::vector<fs::path>& written) {
  const double step = o.grid_step.value_or(0.05);
  const auto axis = grid_points(step, 1.0 - step / 2.0, step);
  for (char panel = 'a'; panel < 'a' + panel_count(2); ++panel) {
    const double mu1 = grid_mu1(panel);
    const auto cells = threshold_grid(static_cast<std::int64_t>(kGridN), 2, mu1, kGridNu1,
                                      axis, axis, o.convention);
    const fs::path path = panel_file(o, 2, panel, "");
    auto out = open_out(path);
    out << "# tsbm threshold grid\n";
    out << "# config: "
        << json{{"figure", 2},
                {"panel", std::string(1, panel)},
                {"N", kGridN},
                {"K", 2},
                {"mu1", mu1},
                {"nu1", kGridNu1},
                {"unit", "logN/N"},
                {"step", step},
                {"convention", convention_name(o.convention)}}
               .dump()
        << '\n';
    write_threshold_csv(out, cells);
    finish(out, path, written);
  }
}

// Figure 3: accuracy of Algorithm 2 after T = 10 snapshots over the grid.
void figure3(const FigureOptions& o, std::vector<fs::path>& written) {
  const double step = o.grid_step.value_or(0.1);
  const auto axis = grid_points(step, 1.0 - step / 2.0, step);
  const int trials = o.trials.value_or(default_trials(3));
  const std::vector<AlgorithmSpec> algs{online_algorithm(Algorithm::kAlg2, InitKind::kRandom)};
  for (char panel = 'a'; panel < 'a' + panel_count(3); ++panel) {
    std::vector<SweepBlock> blocks;
    std::vector<std::pair<std::string, std::vector<SummaryRow>>> maps;
    std::uint64_t cell = 0;
    for (double p : axis) {
      for (double q : axis) {
        const auto c = make_config(fig3_model(panel, p, q), algs, trials,
                                   derive_seed(o.seed, 3, static_cast<std::uint64_t>(panel), cell++),
                                   o);
        SweepBlock b{fmt(p) + ',' + fmt(q), run_experiment(c)};
        maps.emplace_back(b.prefix, summarize(b.records));
        blocks.push_back(std::move(b));
      }
    }
    ModelSpec shape = fig3_model(panel, axis.front(), axis.front());
    const json e{{"figure", 3},
                 {"panel", std::string(1, panel)},
                 {"trials", trials},
                 {"seed", o.seed},
                 {"step", step},
                 {"model", config_to_json(make_config(shape, algs, trials, o.seed, o))["model"]}};
    fs::path path = panel_file(o, 3, panel, "");
    auto out = open_out(path);
    write_sweep_csv(out, "p11,q11", blocks, e, o.deterministic);
    finish(out, path, written);

    path = panel_file(o, 3, panel, "_map");
    out = open_out(path);
    out << "p11,q11,algorithm,t,n,mean_accuracy,se\n";
    for (const auto& [prefix, rows] : maps) write_prefixed_summary(out, prefix, rows, true);
    finish(out, path, written);
  }
}

// Figures 4 to 6: accuracy per snapshot, one long CSV per panel and
// algorithm, and a summary across panels.
void curves(int figure, const FigureOptions& o, std::vector<fs::path>& written) {
  const int trials = o.trials.value_or(default_trials(figure));
  const fs::path summary_path = o.out_dir / ("fig" + std::to_string(figure) + "_summary.csv");
  std::ofstream summary = open_out(summary_path);
  summary << "panel,algorithm,t,n,mean_accuracy,se\n";
  for (char panel = 'a'; panel < 'a' + panel_count(figure); ++panel) {
    ModelSpec model;
    std::vector<AlgorithmSpec> algs;
    if (figure == 4) {
      model = fig4_model(panel);
      algs = {online_algorithm(Algorithm::kAlg2, InitKind::kSpectral),
              online_algorithm(Algorithm::kAlg2, InitKind::kRandom)};
    } else if (figure == 5) {
      model = fig5_model(panel);
      algs = {online_algorithm(Algorithm::kAlg2, InitKind::kRandom)};
    } else {
      model = fig6_model(panel);
      algs = {online_algorithm(Algorithm::kAlg2, InitKind::kSpectral),
              online_algorithm(Algorithm::kAlg3, InitKind::kSpectral)};
    }
    // One experiment per panel so that every algorithm sees the same data.
    const auto c = make_config(model, algs, trials,
                               derive_seed(o.seed, static_cast<std::uint64_t>(figure),
                                           static_cast<std::uint64_t>(panel)),
                               o);
    const auto records = run_experiment(c);
    for (const auto& spec : algs) {
      std::vector<TrialRecord> mine;
      for (const auto& r : records) {
        if (r.algorithm == spec.display_name()) mine.push_back(r);
      }
      std::string suffix = "_" + std::string(algorithm_name(spec.algorithm));
      if (figure == 4) suffix = "_" + std::string(init_name(spec.init));
      const fs::path path = panel_file(o, figure, panel, algs.size() > 1 ? suffix : "");
      auto out = open_out(path);
      write_records_csv(out, mine, echo(figure, panel, c), o.deterministic);
      finish(out, path, written);
    }
    write_prefixed_summary(summary, std::string(1, panel), summarize(records), false);
  }
  finish(summary, summary_path, written);
}

// Figure 7: final accuracy of every method along a parameter sweep.
void figure7(const FigureOptions& o, std::vector<fs::path>& written) {
  const int trials = o.trials.value_or(default_trials(7));
  const auto algs = fig7_algorithms();
  for (char panel = 'a'; panel < 'a' + panel_count(7); ++panel) {
    const char* column = panel == 'a' ? "q11" : "p11";
    std::vector<SweepBlock> blocks;
    std::uint64_t point = 0;
    for (double v : fig7_grid(panel)) {
      const auto c = make_config(fig7_model(panel, v), algs, trials,
                                 derive_seed(o.seed, 7, static_cast<std::uint64_t>(panel), point++),
                                 o);
      blocks.push_back({fmt(v), run_experiment(c)});
    }
    const auto shape = make_config(fig7_model(panel, fig7_grid(panel).front()), algs, trials,
                                   o.seed, o);
    json e = echo(7, panel, shape);
    e["sweep"] = {{"column", column}, {"values", fig7_grid(panel)}};
    fs::path path = panel_file(o, 7, panel, "");
    auto out = open_out(path);
    write_sweep_csv(out, column, blocks, e, o.deterministic);
    finish(out, path, written);

    path = panel_file(o, 7, panel, "_summary");
    out = open_out(path);
    out << column << ",algorithm,t,n,mean_accuracy,se\n";
    for (const auto& b : blocks) write_prefixed_summary(out, b.prefix, summarize(b.records), true);
    finish(out, path, written);
  }
}

}  // namespace

int default_trials(int figure) {
  switch (figure) {
    case 2: return 1;
    case 3: return 5;
    case 4:
    case 5: return 50;
    case 6:
    case 7: return 20;
  }
  throw UsageError("figure id must lie in 2..7");
}

int panel_count(int figure) {
  switch (figure) {
    case 2:
    case 3:
    case 4:
    case 6: return 3;
    case 5:
    case 7: return 2;
  }
  throw UsageError("figure id must lie in 2..7");
}

double grid_mu1(char panel) {
  check_panel(2, panel);
  static constexpr double kMu1[] = {1.51, 2.5, 4.0};
  return kMu1[panel - 'a'];
}

AlgorithmSpec online_algorithm(Algorithm a, InitKind init) {
  AlgorithmSpec s;
  s.algorithm = a;
  s.init = init;
  s.online.order = UpdateOrder::kAsynchronous;
  return s;
}

ModelSpec fig3_model(char panel, double p11, double q11) {
  return markov_model(kGridN, 10, log_chain(grid_mu1(panel), p11), log_chain(kGridNu1, q11));
}

ModelSpec fig4_model(char panel) {
  check_panel(4, panel);
  static constexpr double kMu1[] = {1.5, 2.5, 4.0};
  return markov_model(500, 20, log_chain(kMu1[panel - 'a'], 0.7), log_chain(1.5, 0.3));
}

ModelSpec fig5_model(char panel) {
  check_panel(5, panel);
  const auto per_n = [](double mu1, double p11) {
    return ChainSpec{mu1, p11, std::nullopt, DensityUnit::kOneOverN};
  };
  if (panel == 'a') return markov_model(500, 60, per_n(2.5, 0.6), per_n(1.5, 0.3));
  return markov_model(100, 2000, per_n(0.15, 0.4), per_n(0.1, 0.3));
}

ModelSpec fig6_model(char panel) {
  check_panel(6, panel);
  static constexpr double kNu1[] = {0.03, 0.035, 0.04};
  return markov_model(1000, 20, abs_chain(0.05, 0.6), abs_chain(kNu1[panel - 'a'], 0.3));
}

ModelSpec fig7_model(char panel, double value) {
  check_panel(7, panel);
  if (panel == 'a') return markov_model(500, 30, abs_chain(0.05, 1.0), abs_chain(0.04, value));
  return markov_model(500, 30, abs_chain(0.05, value), abs_chain(0.04, 0.04));
}

std::vector<double> fig7_grid(char panel) {
  check_panel(7, panel);
  if (panel == 'a') return {0.04, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  return {0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99, 1.0};
}

std::vector<AlgorithmSpec> fig7_algorithms() {
  auto online = online_algorithm(Algorithm::kAlg2, InitKind::kSpectral);
  online.label = "online-likelihood";
  std::vector<AlgorithmSpec> out{online};
  const std::pair<Algorithm, const char*> rest[] = {
      {Algorithm::kAlg5, "best-friends"},
      {Algorithm::kAlg6, "enemy-of-enemy"},
      {Algorithm::kUnionSpectral, "union-sc"},
      {Algorithm::kAggregateSpectral, "aggregate-sc"},
      {Algorithm::kSquaredAdjacency, "squared-adjacency-sc"},
  };
  for (const auto& [a, name] : rest) {
    AlgorithmSpec s;
    s.algorithm = a;
    s.label = name;
    out.push_back(s);
  }
  return out;
}

std::vector<fs::path> replicate_figure(int figure, const FigureOptions& options) {
  panel_count(figure);
  if (options.trials && *options.trials < 1) throw UsageError("trials must be >= 1");
  std::error_code ec;
  fs::create_directories(options.out_dir, ec);
  if (ec) throw std::runtime_error("cannot create " + options.out_dir.string());
  std::vector<fs::path> written;
  switch (figure) {
    case 2: figure2(options, written); break;
    case 3: figure3(options, written); break;
    case 7: figure7(options, written); break;
    default: curves(figure, options, written); break;
  }
  return written;
}

}  // namespace tsbm::harness
