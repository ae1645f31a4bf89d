#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tsbm/recovery.hpp"

namespace tsbm {

namespace {

int bit(std::uint8_t s) { return s != 0 ? 1 : 0; }

// argmax over k of row[k]; ties prefer `current`, then the lowest index.
int stable_argmax(const double* row, int K, int current) {
  int best = current;
  double best_v = row[current];
  for (int k = 0; k < K; ++k) {
    if (row[k] > best_v) {
      best_v = row[k];
      best = k;
    }
  }
  return best;
}

void relabel_all(LikelihoodState& state, UpdateOrder order) {
  const int K = state.sigma_hat.K;
  const std::size_t N = state.N;
  if (K == 1) return;
  if (order == UpdateOrder::kSynchronous) {
    const std::vector<double> L = block_scores(state);
    std::vector<int> next(N);
    for (std::size_t i = 0; i < N; ++i) {
      next[i] = stable_argmax(L.data() + i * static_cast<std::size_t>(K), K,
                              state.sigma_hat[i]);
    }
    state.sigma_hat.labels = std::move(next);
    return;
  }
  std::vector<double> row(static_cast<std::size_t>(K));
  for (std::size_t i = 0; i < N; ++i) {
    std::fill(row.begin(), row.end(), 0.0);
    for (std::size_t j = 0; j < N; ++j) {
      if (j != i) row[static_cast<std::size_t>(state.sigma_hat[j])] += state.m(i, j);
    }
    state.sigma_hat[i] = stable_argmax(row.data(), K, state.sigma_hat[i]);
  }
}

void check_step(const LikelihoodState& state, const SnapshotArray& x) {
  if (x.N() != state.N) throw std::invalid_argument("snapshot size differs from state");
  if (state.t < 1) throw std::logic_error("online state not initialised");
  if (state.t >= x.T()) throw std::out_of_range("no snapshot left to consume");
}

MarkovParams memoryless(double mu, double nu) {
  return {{mu, mu, mu}, {nu, nu, nu}};
}

}  // namespace

double saturated_log_ratio(double num, double den) {
  if (num == 0.0 && den == 0.0) return 0.0;
  if (num == 0.0) return -kLogRatioCap;
  if (den == 0.0) return kLogRatioCap;
  return std::clamp(std::log(num / den), -kLogRatioCap, kLogRatioCap);
}

LogRatioTable LogRatioTable::from(const MarkovParams& params) {
  params.intra.validate();
  params.inter.validate();
  LogRatioTable t;
  for (int a = 0; a < 2; ++a) {
    t.initial[a] = saturated_log_ratio(params.intra.mu(a), params.inter.mu(a));
    for (int b = 0; b < 2; ++b) {
      t.transition[a][b] = saturated_log_ratio(params.intra.P(a, b), params.inter.P(a, b));
    }
  }
  return t;
}

double LikelihoodState::m(std::size_t i, std::size_t j) const {
  if (i == j) return 0.0;
  if (i > j) std::swap(i, j);
  return M[i * N - i * (i + 1) / 2 + (j - i - 1)];
}

std::vector<double> block_scores(const LikelihoodState& state) {
  const auto K = static_cast<std::size_t>(state.sigma_hat.K);
  std::vector<double> L(state.N * K, 0.0);
  std::size_t p = 0;
  for (std::size_t i = 0; i < state.N; ++i) {
    const auto ki = static_cast<std::size_t>(state.sigma_hat[i]);
    for (std::size_t j = i + 1; j < state.N; ++j, ++p) {
      L[i * K + static_cast<std::size_t>(state.sigma_hat[j])] += state.M[p];
      L[j * K + ki] += state.M[p];
    }
  }
  return L;
}

LikelihoodState alg2_init(const SnapshotArray& x, Labelling initial,
                          const MarkovParams& params) {
  if (x.T() < 1) throw std::invalid_argument("need at least one snapshot");
  if (initial.size() != x.N()) throw std::invalid_argument("initial labelling length != N");
  initial.validate();
  const LogRatioTable table = LogRatioTable::from(params);
  LikelihoodState s;
  s.N = x.N();
  s.sigma_hat = std::move(initial);
  s.t = 1;
  s.estimates = params;
  s.M.resize(x.pair_count());
  for (std::size_t p = 0; p < s.M.size(); ++p) {
    s.M[p] = table.initial[bit(x.pattern_by_index(p)[0])];
  }
  return s;
}

void alg2_step(LikelihoodState& state, const SnapshotArray& x,
               const LogRatioTable& table, const OnlineOptions& options) {
  check_step(state, x);
  const std::size_t t = state.t;
  for (std::size_t p = 0; p < state.M.size(); ++p) {
    const auto pat = x.pattern_by_index(p);
    state.M[p] += table.transition[bit(pat[t - 1])][bit(pat[t])];
  }
  relabel_all(state, options.order);
  state.t = t + 1;
}

LikelihoodState alg3_init(const SnapshotArray& x, Labelling initial) {
  if (x.T() < 1) throw std::invalid_argument("need at least one snapshot");
  if (initial.size() != x.N()) throw std::invalid_argument("initial labelling length != N");
  initial.validate();
  double sum[2] = {0.0, 0.0};  // [inter, intra]
  double cnt[2] = {0.0, 0.0};
  std::size_t p = 0;
  for (std::size_t i = 0; i < x.N(); ++i) {
    for (std::size_t j = i + 1; j < x.N(); ++j, ++p) {
      const int same = initial[i] == initial[j] ? 1 : 0;
      sum[same] += bit(x.pattern_by_index(p)[0]);
      cnt[same] += 1.0;
    }
  }
  const double overall = (cnt[0] + cnt[1]) > 0.0 ? (sum[0] + sum[1]) / (cnt[0] + cnt[1]) : 0.0;
  const double mu = cnt[1] > 0.0 ? sum[1] / cnt[1] : overall;
  const double nu = cnt[0] > 0.0 ? sum[0] / cnt[0] : overall;

  LikelihoodState s;
  s.N = x.N();
  s.sigma_hat = std::move(initial);
  s.t = 1;
  s.estimates = memoryless(mu, nu);
  s.counts.assign(x.pair_count(), {0, 0, 0, 0});
  const LogRatioTable table = LogRatioTable::from(s.estimates);
  s.M.resize(x.pair_count());
  for (std::size_t q = 0; q < s.M.size(); ++q) {
    s.M[q] = table.initial[bit(x.pattern_by_index(q)[0])];
  }
  return s;
}

std::array<bool, 2> reestimate_transitions(LikelihoodState& state) {
  // [side][a]: side 1 = same predicted block.
  double sum[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
  double cnt[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
  std::size_t pairs[2] = {0, 0};
  std::size_t p = 0;
  for (std::size_t i = 0; i < state.N; ++i) {
    for (std::size_t j = i + 1; j < state.N; ++j, ++p) {
      const int same = state.sigma_hat[i] == state.sigma_hat[j] ? 1 : 0;
      ++pairs[same];
      const auto& n = state.counts[p];
      for (int a = 0; a < 2; ++a) {
        const double na = static_cast<double>(n[2 * a] + n[2 * a + 1]);
        if (na == 0.0) continue;
        sum[same][a] += static_cast<double>(n[2 * a + 1]) / na;
        cnt[same][a] += 1.0;
      }
    }
  }
  std::array<bool, 2> updated{false, false};
  BinaryMarkovChain* chains[2] = {&state.estimates.inter, &state.estimates.intra};
  for (int side = 0; side < 2; ++side) {
    if (pairs[side] == 0) continue;
    if (cnt[side][0] > 0.0) {
      chains[side]->p01 = sum[side][0] / cnt[side][0];
      updated[side] = true;
    }
    if (cnt[side][1] > 0.0) {
      chains[side]->p11 = sum[side][1] / cnt[side][1];
      updated[side] = true;
    }
  }
  return {updated[1], updated[0]};
}

void alg3_step(LikelihoodState& state, const SnapshotArray& x,
               const OnlineOptions& options) {
  check_step(state, x);
  if (state.counts.size() != x.pair_count()) {
    throw std::logic_error("state lacks transition counters");
  }
  if (options.refresh_every < 1) throw std::invalid_argument("refresh_every must be >= 1");
  const std::size_t t = state.t;
  const LogRatioTable table = LogRatioTable::from(state.estimates);
  for (std::size_t p = 0; p < state.M.size(); ++p) {
    const auto pat = x.pattern_by_index(p);
    const int a = bit(pat[t - 1]);
    const int b = bit(pat[t]);
    state.M[p] += table.transition[a][b];
    ++state.counts[p][static_cast<std::size_t>(2 * a + b)];
  }
  relabel_all(state, options.order);
  state.t = t + 1;
  if ((state.t - 1) % static_cast<std::size_t>(options.refresh_every) == 0) {
    reestimate_transitions(state);
  }
}

Labelling alg2_run(const SnapshotArray& x, Labelling initial,
                   const MarkovParams& params, const OnlineOptions& options,
                   const OnlineObserver& observer) {
  LikelihoodState s = alg2_init(x, std::move(initial), params);
  const LogRatioTable table = LogRatioTable::from(params);
  if (observer) observer(s.t, s.sigma_hat);
  while (s.t < x.T()) {
    alg2_step(s, x, table, options);
    if (observer) observer(s.t, s.sigma_hat);
  }
  return s.sigma_hat;
}

Labelling alg3_run(const SnapshotArray& x, Labelling initial,
                   const OnlineOptions& options, const OnlineObserver& observer) {
  LikelihoodState s = alg3_init(x, std::move(initial));
  if (observer) observer(s.t, s.sigma_hat);
  while (s.t < x.T()) {
    alg3_step(s, x, options);
    if (observer) observer(s.t, s.sigma_hat);
  }
  return s.sigma_hat;
}

}  // namespace tsbm
