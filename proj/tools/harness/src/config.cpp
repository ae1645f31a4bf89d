#include "tsbm/harness/config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <utility>

namespace tsbm::harness {

namespace {

using nlohmann::json;

constexpr std::array<std::pair<Algorithm, std::string_view>, 11> kAlgorithmNames{{
    {Algorithm::kAlg1, "alg1"},
    {Algorithm::kAlg1LeaveOneOut, "alg1-loo"},
    {Algorithm::kAlg2, "alg2"},
    {Algorithm::kAlg3, "alg3"},
    {Algorithm::kAlg4, "alg4"},
    {Algorithm::kAlg5, "alg5"},
    {Algorithm::kAlg6, "alg6"},
    {Algorithm::kMle, "mle"},
    {Algorithm::kUnionSpectral, "union-spectral"},
    {Algorithm::kAggregateSpectral, "aggregate-spectral"},
    {Algorithm::kSquaredAdjacency, "squared-adjacency"},
}};

void check_keys(const json& j, std::string_view where,
                std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) throw UsageError(std::string(where) + " must be an object");
  for (const auto& item : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
      throw UsageError("unknown key '" + item.key() + "' in " + std::string(where));
    }
  }
}

template <typename T>
T get(const json& j, std::string_view key, T fallback) {
  const auto it = j.find(key);
  if (it == j.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw UsageError("key '" + std::string(key) + "' has the wrong type");
  }
}

std::string unit_name(DensityUnit u) {
  switch (u) {
    case DensityUnit::kAbsolute: return "abs";
    case DensityUnit::kLogNOverN: return "logN/N";
    case DensityUnit::kOneOverN: return "1/N";
  }
  return "abs";
}

ChainSpec chain_from_json(const json& j, std::string_view where, DensityUnit unit) {
  check_keys(j, where, {"mu1", "p11", "p01", "unit"});
  if (!j.contains("mu1") || !j.contains("p11")) {
    throw UsageError(std::string(where) + " needs mu1 and p11");
  }
  ChainSpec c;
  c.mu1 = get<double>(j, "mu1", 0.0);
  c.p11 = get<double>(j, "p11", 0.0);
  if (j.contains("p01")) c.p01 = get<double>(j, "p01", 0.0);
  c.unit = j.contains("unit") ? parse_unit(get<std::string>(j, "unit", "")) : unit;
  return c;
}

json chain_to_json(const ChainSpec& c) {
  json j{{"mu1", c.mu1}, {"p11", c.p11}, {"unit", unit_name(c.unit)}};
  if (c.p01) j["p01"] = *c.p01;
  return j;
}

UpdateOrder parse_order(const std::string& s) {
  if (s == "sync" || s == "synchronous") return UpdateOrder::kSynchronous;
  if (s == "async" || s == "asynchronous") return UpdateOrder::kAsynchronous;
  throw UsageError("order must be sync or async (got '" + s + "')");
}

InitKind parse_init(const std::string& s) {
  if (s == "spectral") return InitKind::kSpectral;
  if (s == "random") return InitKind::kRandom;
  if (s == "perturbed") return InitKind::kPerturbed;
  throw UsageError("init must be spectral, random or perturbed (got '" + s + "')");
}

AlgorithmSpec algorithm_from_json(const json& j) {
  AlgorithmSpec a;
  if (j.is_string()) {
    const auto id = parse_algorithm(j.get<std::string>());
    if (!id) throw UsageError("unknown algorithm '" + j.get<std::string>() + "'");
    a.algorithm = *id;
    return a;
  }
  check_keys(j, "algorithm", {"name", "init", "flip_fraction", "order", "refresh_every",
                              "label", "trim_factor", "kmeans_restarts", "kmeans_iters"});
  const auto name = get<std::string>(j, "name", "");
  const auto id = parse_algorithm(name);
  if (!id) throw UsageError("unknown algorithm '" + name + "'");
  a.algorithm = *id;
  a.init = parse_init(get<std::string>(j, "init", "spectral"));
  a.flip_fraction = get<double>(j, "flip_fraction", a.flip_fraction);
  a.online.order = parse_order(get<std::string>(j, "order", "sync"));
  a.online.refresh_every = get<int>(j, "refresh_every", 1);
  a.label = get<std::string>(j, "label", "");
  a.spectral.trim_factor = get<double>(j, "trim_factor", a.spectral.trim_factor);
  a.spectral.kmeans_restarts = get<int>(j, "kmeans_restarts", a.spectral.kmeans_restarts);
  a.spectral.kmeans_iters = get<int>(j, "kmeans_iters", a.spectral.kmeans_iters);
  return a;
}

json algorithm_to_json(const AlgorithmSpec& a) {
  json j{{"name", algorithm_name(a.algorithm)}};
  if (is_online(a.algorithm)) {
    j["init"] = init_name(a.init);
    if (a.init == InitKind::kPerturbed) j["flip_fraction"] = a.flip_fraction;
    j["order"] = a.online.order == UpdateOrder::kSynchronous ? "sync" : "async";
    if (a.algorithm == Algorithm::kAlg3) j["refresh_every"] = a.online.refresh_every;
  }
  if (!a.label.empty()) j["label"] = a.label;
  j["trim_factor"] = a.spectral.trim_factor;
  j["kmeans_restarts"] = a.spectral.kmeans_restarts;
  j["kmeans_iters"] = a.spectral.kmeans_iters;
  return j;
}

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

}  // namespace

DensityUnit parse_unit(std::string_view s) {
  if (s == "abs") return DensityUnit::kAbsolute;
  if (s == "logN/N") return DensityUnit::kLogNOverN;
  if (s == "1/N") return DensityUnit::kOneOverN;
  throw UsageError("unit must be one of abs, logN/N, 1/N (got '" + std::string(s) + "')");
}

double unit_scale(DensityUnit unit, std::size_t N) {
  const auto n = static_cast<double>(N);
  switch (unit) {
    case DensityUnit::kAbsolute: return 1.0;
    case DensityUnit::kLogNOverN: return std::log(n) / n;
    case DensityUnit::kOneOverN: return 1.0 / n;
  }
  return 1.0;
}

BinaryMarkovChain ChainSpec::resolve(std::size_t N) const {
  const double s = unit_scale(unit, N);
  BinaryMarkovChain c;
  try {
    if (p01) {
      c = {mu1 * s, *p01 * s, p11};
      c.validate();
    } else if (mu1 * s == 0.0) {
      // All-off start: the stationary law only pins p01 = 0.
      c = {0.0, 0.0, p11};
      c.validate();
    } else if (p11 == 1.0) {
      c = {mu1 * s, 0.0, 1.0};
      c.validate();
    } else {
      c = chain_from_stationary(mu1 * s, p11);
    }
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("invalid chain: ") + e.what());
  }
  return c;
}

void ModelSpec::validate() const {
  if (N < 1) throw UsageError("N must be >= 1");
  if (K < 1 || static_cast<std::size_t>(K) > N) throw UsageError("K must lie in [1, N]");
  if (kind == ModelKind::kMarkov) {
    if (T < 1 || T > 100000) throw UsageError("T must lie in [1, 100000]");
    intra.resolve(N);
    inter.resolve(N);
  } else {
    if (f.empty() || f.size() != g.size()) {
      throw UsageError("categorical model needs f and g of equal length");
    }
    if (f.size() > 255) throw UsageError("alphabet larger than 255 symbols");
    if (!std::all_of(f.begin(), f.end(), is_probability) ||
        !std::all_of(g.begin(), g.end(), is_probability)) {
      throw UsageError("f and g entries must lie in [0, 1]");
    }
    try {
      FiniteDistribution{f};
      FiniteDistribution{g};
    } catch (const std::invalid_argument& e) {
      throw UsageError(std::string("invalid distribution: ") + e.what());
    }
  }
}

MarkovParams ModelSpec::markov() const {
  if (kind != ModelKind::kMarkov) throw UsageError("model is not a Markov model");
  return {intra.resolve(N), inter.resolve(N)};
}

InteractionKernel ModelSpec::kernel() const {
  if (kind == ModelKind::kMarkov) {
    const auto p = markov();
    return markov_kernel(p.intra, p.inter, T);
  }
  return categorical_kernel(FiniteDistribution(f), FiniteDistribution(g));
}

std::string_view algorithm_name(Algorithm a) {
  for (const auto& [id, name] : kAlgorithmNames) {
    if (id == a) return name;
  }
  return "unknown";
}

std::optional<Algorithm> parse_algorithm(std::string_view name) {
  for (const auto& [id, n] : kAlgorithmNames) {
    if (n == name) return id;
  }
  return std::nullopt;
}

bool is_online(Algorithm a) { return a == Algorithm::kAlg2 || a == Algorithm::kAlg3; }

bool needs_parameters(Algorithm a) {
  switch (a) {
    case Algorithm::kAlg1:
    case Algorithm::kAlg1LeaveOneOut:
    case Algorithm::kAlg2:
    case Algorithm::kAlg4:
    case Algorithm::kMle:
      return true;
    default:
      return false;
  }
}

std::string_view init_name(InitKind k) {
  switch (k) {
    case InitKind::kSpectral: return "spectral";
    case InitKind::kRandom: return "random";
    case InitKind::kPerturbed: return "perturbed";
  }
  return "spectral";
}

std::string AlgorithmSpec::display_name() const {
  if (!label.empty()) return label;
  std::string s(algorithm_name(algorithm));
  if (is_online(algorithm)) {
    s += '/';
    s += init_name(init);
  }
  return s;
}

void ExperimentConfig::validate() const {
  model.validate();
  if (trials < 1) throw UsageError("trials must be >= 1");
  if (algorithms.empty()) throw UsageError("no algorithm selected");
  for (const auto& a : algorithms) {
    const bool markov = model.kind == ModelKind::kMarkov;
    if ((is_online(a.algorithm) || a.algorithm == Algorithm::kAlg4) && !markov) {
      throw UsageError(std::string(algorithm_name(a.algorithm)) + " needs a Markov model");
    }
    if (a.algorithm == Algorithm::kAlg4 && model.T < 2) throw UsageError("alg4 needs T >= 2");
    if (a.algorithm == Algorithm::kMle &&
        std::pow(static_cast<double>(model.K), static_cast<double>(model.N)) > 1e6) {
      throw UsageError("mle needs K^N <= 1e6");
    }
    if (a.algorithm == Algorithm::kAlg3 && a.online.refresh_every < 1) {
      throw UsageError("refresh_every must be >= 1");
    }
    if (a.init == InitKind::kPerturbed && !(a.flip_fraction >= 0.0 && a.flip_fraction <= 1.0)) {
      throw UsageError("flip_fraction must lie in [0, 1]");
    }
    SpectralConfig s = a.spectral;
    s.K = model.K;
    try {
      s.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    if (s.kmeans_restarts < 1 || s.kmeans_iters < 1) {
      throw UsageError("kmeans_restarts and kmeans_iters must be >= 1");
    }
  }
}

ExperimentConfig config_from_json(const json& j) {
  check_keys(j, "config", {"model", "algorithms", "trials", "seed", "out", "threads"});
  ExperimentConfig c;
  if (!j.contains("model")) throw UsageError("config needs a model");
  const json& m = j.at("model");
  check_keys(m, "model", {"type", "N", "K", "T", "labels", "unit", "intra", "inter", "f", "g"});
  const auto type = get<std::string>(m, "type", "markov");
  if (type == "markov") {
    c.model.kind = ModelKind::kMarkov;
  } else if (type == "categorical") {
    c.model.kind = ModelKind::kCategorical;
  } else {
    throw UsageError("model type must be markov or categorical");
  }
  const auto N = get<std::int64_t>(m, "N", 100);
  const auto T = get<std::int64_t>(m, "T", 10);
  if (N < 1) throw UsageError("N must be >= 1");
  if (T < 1) throw UsageError("T must be >= 1");
  c.model.N = static_cast<std::size_t>(N);
  c.model.T = static_cast<std::size_t>(T);
  c.model.K = get<int>(m, "K", 2);
  const auto labels = get<std::string>(m, "labels", "iid");
  if (labels == "iid") {
    c.model.labels = LabelDraw::kIid;
  } else if (labels == "balanced") {
    c.model.labels = LabelDraw::kBalanced;
  } else {
    throw UsageError("labels must be iid or balanced");
  }
  const DensityUnit unit = parse_unit(get<std::string>(m, "unit", "abs"));
  if (c.model.kind == ModelKind::kMarkov) {
    if (!m.contains("intra") || !m.contains("inter")) {
      throw UsageError("Markov model needs intra and inter chains");
    }
    c.model.intra = chain_from_json(m.at("intra"), "intra", unit);
    c.model.inter = chain_from_json(m.at("inter"), "inter", unit);
  } else {
    c.model.f = get<std::vector<double>>(m, "f", {});
    c.model.g = get<std::vector<double>>(m, "g", {});
  }

  if (j.contains("algorithms")) {
    const json& algs = j.at("algorithms");
    if (!algs.is_array()) throw UsageError("algorithms must be an array");
    for (const auto& a : algs) c.algorithms.push_back(algorithm_from_json(a));
  }
  c.trials = get<int>(j, "trials", 1);
  c.seed = get<std::uint64_t>(j, "seed", 1);
  c.out = get<std::string>(j, "out", "");
  c.threads = get<unsigned>(j, "threads", 0);
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json model{{"N", c.model.N}, {"K", c.model.K}};
  model["labels"] = c.model.labels == LabelDraw::kIid ? "iid" : "balanced";
  if (c.model.kind == ModelKind::kMarkov) {
    model["type"] = "markov";
    model["T"] = c.model.T;
    model["intra"] = chain_to_json(c.model.intra);
    model["inter"] = chain_to_json(c.model.inter);
  } else {
    model["type"] = "categorical";
    model["f"] = c.model.f;
    model["g"] = c.model.g;
  }
  json algs = json::array();
  for (const auto& a : c.algorithms) algs.push_back(algorithm_to_json(a));
  return {{"model", model}, {"algorithms", algs}, {"trials", c.trials}, {"seed", c.seed}};
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw UsageError("config " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

std::vector<double> parse_list(std::string_view text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find(',', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view tok = text.substr(pos, end - pos);
    while (!tok.empty() && tok.front() == ' ') tok.remove_prefix(1);
    while (!tok.empty() && tok.back() == ' ') tok.remove_suffix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size()) {
      throw UsageError("expected a comma-separated list of numbers, got '" +
                       std::string(text) + "'");
    }
    out.push_back(v);
    pos = end + 1;
  }
  return out;
}

}  // namespace tsbm::harness
