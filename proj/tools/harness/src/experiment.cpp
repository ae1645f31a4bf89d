#include "tsbm/harness/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <exception>
#include <fstream>
#include <map>
#include <numeric>
#include <ostream>
#include <thread>

#include "tsbm/harness/baselines.hpp"
#include "tsbm/metrics.hpp"
#include "tsbm/rng.hpp"

namespace tsbm::harness {

namespace {

using Clock = std::chrono::steady_clock;

Labelling initial_labelling(const AlgorithmSpec& spec, const ModelSpec& model,
                            const SnapshotArray& x, const Labelling* truth,
                            std::uint64_t seed, const SpectralConfig& sc) {
  switch (spec.init) {
    case InitKind::kSpectral:
      return spectral_cluster(snapshot_adjacency(x, 0), sc);
    case InitKind::kRandom:
      return sample_labelling(x.N(), model.K, derive_seed(seed, kInitStream));
    case InitKind::kPerturbed:
      if (truth == nullptr) throw UsageError("perturbed init needs the true labelling");
      return perturb_labels(*truth, spec.flip_fraction, derive_seed(seed, kInitStream));
  }
  throw UsageError("unknown init");
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace


std::uint64_t trial_seed(std::uint64_t master, int trial) {
  return derive_seed(master, static_cast<std::uint64_t>(trial));
}

Labelling draw_labels(const ModelSpec& model, std::uint64_t seed) {
  if (model.labels == LabelDraw::kIid) return sample_labelling(model.N, model.K, seed);
  std::vector<int> l(model.N);
  for (std::size_t i = 0; i < model.N; ++i) {
    l[i] = static_cast<int>(i % static_cast<std::size_t>(model.K));
  }
  SplitMix64 rng(seed);
  for (std::size_t i = l.size(); i > 1; --i) std::swap(l[i - 1], l[rng.below(i)]);
  return {std::move(l), model.K};
}

SnapshotArray draw_snapshots(const ModelSpec& model, const Labelling& sigma,
                             std::uint64_t seed) {
  if (model.kind == ModelKind::kMarkov) {
    const auto p = model.markov();
    return sample_markov_snapshots(sigma, p.intra, p.inter, model.T, seed);
  }
  return sample_categorical_snapshots(sigma, FiniteDistribution(model.f),
                                      FiniteDistribution(model.g), seed);
}

Labelling perturb_labels(const Labelling& truth, double fraction, std::uint64_t seed) {
  Labelling out = truth;
  const std::size_t N = truth.size();
  if (truth.K < 2 || N == 0) return out;
  const auto flips = static_cast<std::size_t>(std::lround(fraction * static_cast<double>(N)));
  std::vector<std::size_t> order(N);
  std::iota(order.begin(), order.end(), 0);
  SplitMix64 rng(seed);
  for (std::size_t i = N; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  const auto K = static_cast<std::uint64_t>(truth.K);
  for (std::size_t k = 0; k < std::min(flips, N); ++k) {
    const std::size_t i = order[k];
    out[i] = static_cast<int>((static_cast<std::uint64_t>(truth[i]) + 1 + rng.below(K - 1)) % K);
  }
  return out;
}

Trajectory run_algorithm(const AlgorithmSpec& spec, const ModelSpec& model,
                         const SnapshotArray& x, const Labelling* truth,
                         std::uint64_t seed) {
  Trajectory out;
  const auto start = Clock::now();
  auto record = [&](std::size_t t, Labelling l) {
    out.t.push_back(t);
    out.labels.push_back(std::move(l));
    out.seconds.push_back(std::chrono::duration<double>(Clock::now() - start).count());
  };
  SpectralConfig sc = spec.spectral;
  sc.K = model.K;
  sc.seed = derive_seed(seed, kSpectralStream);
  const std::size_t T = x.T();
  const int K = model.K;

  switch (spec.algorithm) {
    case Algorithm::kAlg2:
    case Algorithm::kAlg3: {
      Labelling init = initial_labelling(spec, model, x, truth, seed, sc);
      const OnlineObserver observer = [&](std::size_t t, const Labelling& l) { record(t, l); };
      if (spec.algorithm == Algorithm::kAlg2) {
        alg2_run(x, std::move(init), model.markov(), spec.online, observer);
      } else {
        alg3_run(x, std::move(init), spec.online, observer);
      }
      break;
    }
    case Algorithm::kAlg1:
    case Algorithm::kAlg1LeaveOneOut: {
      Alg1Options o;
      o.spectral = sc;
      o.leave_one_out = spec.algorithm == Algorithm::kAlg1LeaveOneOut;
      record(T, alg1_recover(x, model.kernel(), K, o));
      break;
    }
    case Algorithm::kAlg4:
      record(T, alg4_transition_rates(x, model.markov()).labels);
      break;
    case Algorithm::kAlg5:
      record(T, alg5_best_friends(x).labels);
      break;
    case Algorithm::kAlg6:
      record(T, alg6_enemy(x).labels);
      break;
    case Algorithm::kMle:
      record(T, mle_brute_force(x, K, model.kernel()));
      break;
    case Algorithm::kUnionSpectral:
      record(T, union_spectral(x, sc));
      break;
    case Algorithm::kAggregateSpectral:
      record(T, aggregate_spectral(x, sc));
      break;
    case Algorithm::kSquaredAdjacency:
      record(T, squared_adjacency_spectral(x, sc));
      break;
  }
  return out;
}

void parallel_trials(int trials, unsigned threads, const std::function<void(int)>& fn) {
  if (trials <= 0) return;
  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = std::min(threads, static_cast<unsigned>(trials));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(trials));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int t = next++; t < trials; t = next++) {
      try {
        fn(t);
      } catch (...) {
        errors[static_cast<std::size_t>(t)] = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::vector<TrialRecord> run_experiment(const ExperimentConfig& config) {
  config.validate();
  std::vector<std::vector<TrialRecord>> per_trial(static_cast<std::size_t>(config.trials));
  parallel_trials(config.trials, config.threads, [&](int trial) {
    const std::uint64_t s = trial_seed(config.seed, trial);
    const Labelling sigma = draw_labels(config.model, derive_seed(s, kLabelStream));
    const SnapshotArray x = draw_snapshots(config.model, sigma, derive_seed(s, kDataStream));
    auto& out = per_trial[static_cast<std::size_t>(trial)];
    for (const auto& spec : config.algorithms) {
      const Trajectory traj = run_algorithm(spec, config.model, x, &sigma, s);
      TrialRecord r;
      r.trial = trial;
      r.seed = s;
      r.algorithm = spec.display_name();
      r.t = traj.t;
      r.seconds = traj.seconds;
      for (const auto& l : traj.labels) {
        const auto hs = ham_star(sigma, l);
        r.ham_star.push_back(hs.distance);
        r.accuracy.push_back(1.0 - static_cast<double>(hs.distance) /
                                       static_cast<double>(sigma.size()));
      }
      out.push_back(std::move(r));
    }
  });
  std::vector<TrialRecord> flat;
  for (auto& v : per_trial) {
    for (auto& r : v) flat.push_back(std::move(r));
  }
  return flat;
}

namespace {

void write_rows(std::ostream& out, const std::string& prefix,
                const std::vector<TrialRecord>& records, bool deterministic) {
  char buf[64];
  for (const auto& r : records) {
    for (std::size_t k = 0; k < r.t.size(); ++k) {
      if (!prefix.empty()) out << prefix << ',';
      out << r.trial << ',' << r.t[k] << ',' << r.algorithm << ',';
      std::snprintf(buf, sizeof buf, "%.6f", r.accuracy[k]);
      out << buf << ',' << r.ham_star[k] << ',';
      std::snprintf(buf, sizeof buf, "%.6f", deterministic ? 0.0 : r.seconds[k]);
      out << buf << '\n';
    }
  }
}

void write_header(std::ostream& out, const nlohmann::json& echo, bool deterministic) {
  out << "# tsbm experiment\n";
  out << "# config: " << echo.dump() << '\n';
  if (!deterministic) out << "# generated: " << utc_timestamp() << '\n';
}

}  // namespace

void write_records_csv(std::ostream& out, const std::vector<TrialRecord>& records,
                       const nlohmann::json& echo, bool deterministic) {
  write_header(out, echo, deterministic);
  out << "trial,t,algorithm,accuracy,ham_star,seconds\n";
  write_rows(out, {}, records, deterministic);
}

void write_sweep_csv(std::ostream& out, std::string_view prefix_header,
                     const std::vector<SweepBlock>& blocks, const nlohmann::json& echo,
                     bool deterministic) {
  write_header(out, echo, deterministic);
  out << prefix_header << ",trial,t,algorithm,accuracy,ham_star,seconds\n";
  for (const auto& b : blocks) write_rows(out, b.prefix, b.records, deterministic);
}

void write_records_csv(const std::filesystem::path& path,
                       const std::vector<TrialRecord>& records,
                       const nlohmann::json& echo, bool deterministic) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  write_records_csv(out, records, echo, deterministic);
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& records) {
  std::vector<std::string> order;
  std::map<std::pair<std::string, std::size_t>, std::vector<double>> groups;
  for (const auto& r : records) {
    if (std::find(order.begin(), order.end(), r.algorithm) == order.end()) {
      order.push_back(r.algorithm);
    }
    for (std::size_t k = 0; k < r.t.size(); ++k) {
      groups[{r.algorithm, r.t[k]}].push_back(r.accuracy[k]);
    }
  }
  std::vector<SummaryRow> rows;
  for (const auto& name : order) {
    for (const auto& [key, values] : groups) {
      if (key.first != name) continue;
      SummaryRow row;
      row.algorithm = name;
      row.t = key.second;
      row.n = static_cast<int>(values.size());
      row.mean = std::accumulate(values.begin(), values.end(), 0.0) / row.n;
      if (row.n > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - row.mean) * (v - row.mean);
        row.se = std::sqrt(ss / (row.n - 1) / row.n);
      }
      rows.push_back(row);
    }
  }
  return rows;
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "algorithm,t,n,mean_accuracy,se\n";
  char buf[96];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%zu,%d,%.6f,%.6f", r.t, r.n, r.mean, r.se);
    out << r.algorithm << ',' << buf << '\n';
  }
}

}  // namespace tsbm::harness
