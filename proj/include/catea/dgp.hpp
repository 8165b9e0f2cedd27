#pragma once

// Synthetic data generation: the two benchmark processes (dataset A varies
// the assignment-on-intake effect via a non-adherence rate, dataset B varies
// the intake-on-outcome effect via a log-odds shift) plus the single-stratum
// population sampler used by the Monte Carlo harness.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include "catea/core.hpp"
#include "catea/rng.hpp"
#include "catea/stratum.hpp"

namespace catea::dgp {

struct InsufficientEligible : DataError {
  using DataError::DataError;
};

struct SyntheticConfig {
  std::size_t n = 1000;
  std::size_t d = 30;
  double weight_amplitude = 10.0;  // weights drawn from U(-amplitude, amplitude)
  double gamma = 0.1;              // non-adherence rate (dataset A)
  double eta = 0.0;                // intake-effect log-odds shift (dataset B)
  NonAdherenceMode mode = NonAdherenceMode::OneSided;
  std::uint64_t seed = 0;

  void validate() const {
    if (n < 1 || d < 1) throw ConfigError("synthetic config requires n >= 1 and d >= 1");
    if (!(weight_amplitude > 0.0))
      throw ConfigError("synthetic config requires weight_amplitude > 0");
    if (!(gamma >= 0.0 && gamma <= 1.0))
      throw ConfigError("synthetic config requires gamma in [0,1]");
  }
};

// Sampled weight vectors, kept so a generated dataset can be replayed exactly.
struct DatasetWeights {
  std::vector<double> w;     // assignment logits
  std::vector<double> w_t0;  // non-adherence / intake logits, t = 0
  std::vector<double> w_t1;  // non-adherence / intake logits, t = 1
  std::vector<double> w_a0;  // outcome logits, a = 0 (dataset A only)
  std::vector<double> w_a1;  // outcome logits, a = 1
};

struct GeneratedDataset {
  Dataset dataset;
  DatasetWeights weights;
};

namespace detail {

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

inline double dot(const std::vector<double>& w, const std::vector<double>& x) {
  double s = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * x[j];
  return s;
}

inline std::vector<double> draw_weights(SplitMix64& rng, std::size_t d, double amp) {
  std::vector<double> w(d);
  for (double& v : w) v = rng.next_uniform(-amp, amp);
  return w;
}

// Weighted sampling of m items without replacement, exponential-keys method:
// item i gets key -ln(u_i)/p_i and the m smallest keys win. Ties broken by
// index so the selection is fully determined by the RNG stream.
inline std::vector<std::size_t> weighted_sample_without_replacement(
    const std::vector<std::size_t>& pool, const std::vector<double>& weights,
    std::size_t m, SplitMix64& rng) {
  std::vector<std::pair<double, std::size_t>> keyed;
  keyed.reserve(pool.size());
  for (std::size_t k = 0; k < pool.size(); ++k) {
    const double u = rng.next_unit_open();
    const double w = weights[k];
    const double key = w > 0.0 ? -std::log(u) / w : std::numeric_limits<double>::infinity();
    keyed.emplace_back(key, pool[k]);
  }
  std::sort(keyed.begin(), keyed.end());
  std::vector<std::size_t> chosen(m);
  for (std::size_t k = 0; k < m; ++k) chosen[k] = keyed[k].second;
  return chosen;
}

}  // namespace detail

// Dataset A. Features are standard normal, assignment follows a logistic
// model in x, and outcomes are Bernoulli in the intake-selected logits.
// Non-adherence is induced by selecting a fixed count of non-adherers by
// weighted sampling without replacement, weight sigma(w_{t} . x) at the
// realized assignment; a selected individual's intake is flipped to 1 - t.
// Under one-sided non-adherence only assigned individuals are eligible and
// the count is round(gamma * |eligible|); under two-sided it is round(gamma * n).
//
// The ground-truth effect uses the first-order inclusion approximation
// q_i(t) = min(1, m * p_i(t) / Z) for the probability of being selected, with
// Z the realized total weight of the eligible pool, giving
// Delta_A = (1 - q(1)) - q(0) (two-sided) or 1 - q(1) (one-sided) and
// Phi = Delta_A * Delta_Y under full mediation.
inline GeneratedDataset generate_dataset_a(const SyntheticConfig& cfg) {
  cfg.validate();
  SplitMix64 rng(cfg.seed);
  const double dd = static_cast<double>(cfg.d);
  const bool one_sided = cfg.mode == NonAdherenceMode::OneSided;

  DatasetWeights wt;
  wt.w = detail::draw_weights(rng, cfg.d, cfg.weight_amplitude);
  wt.w_t0 = detail::draw_weights(rng, cfg.d, cfg.weight_amplitude);
  wt.w_t1 = detail::draw_weights(rng, cfg.d, cfg.weight_amplitude);
  wt.w_a0 = detail::draw_weights(rng, cfg.d, cfg.weight_amplitude);
  wt.w_a1 = detail::draw_weights(rng, cfg.d, cfg.weight_amplitude);

  Dataset ds;
  ds.feature_dim = cfg.d;
  ds.mode = cfg.mode;
  ds.outcome_kind = OutcomeKind::Binary;
  ds.samples.resize(cfg.n);
  for (Sample& s : ds.samples) {
    s.x.resize(cfg.d);
    for (double& v : s.x) v = rng.next_gaussian();
    s.t = rng.next_bernoulli(detail::sigmoid(detail::dot(wt.w, s.x) / dd)) ? 1 : 0;
  }

  // Non-adherence weights at the realized assignment (no 1/d scaling here).
  std::vector<std::size_t> pool;
  std::vector<double> pool_weights;
  for (std::size_t i = 0; i < cfg.n; ++i) {
    const Sample& s = ds.samples[i];
    if (one_sided && s.t == 0) continue;
    pool.push_back(i);
    pool_weights.push_back(
        detail::sigmoid(detail::dot(s.t == 1 ? wt.w_t1 : wt.w_t0, s.x)));
  }
  const std::size_t m = static_cast<std::size_t>(std::llround(
      cfg.gamma * static_cast<double>(one_sided ? pool.size() : cfg.n)));
  if (m > pool.size())
    throw InsufficientEligible("need " + std::to_string(m) + " non-adherers but only " +
                               std::to_string(pool.size()) + " eligible");

  std::vector<bool> flipped(cfg.n, false);
  for (std::size_t i : detail::weighted_sample_without_replacement(pool, pool_weights,
                                                                   m, rng))
    flipped[i] = true;

  for (std::size_t i = 0; i < cfg.n; ++i) {
    Sample& s = ds.samples[i];
    s.a = flipped[i] ? 1 - s.t : s.t;
    const double logit =
        detail::dot(s.a == 1 ? wt.w_a1 : wt.w_a0, s.x) / dd;
    s.y = rng.next_bernoulli(detail::sigmoid(logit)) ? 1.0 : 0.0;
  }

  const double z = std::accumulate(pool_weights.begin(), pool_weights.end(), 0.0);
  const double md = static_cast<double>(m);
  auto inclusion = [&](const std::vector<double>& w_t, const Sample& s) {
    if (z <= 0.0) return 0.0;
    return std::min(1.0, md * detail::sigmoid(detail::dot(w_t, s.x)) / z);
  };
  std::vector<double> truth(cfg.n);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    const Sample& s = ds.samples[i];
    const double q1 = inclusion(wt.w_t1, s);
    const double delta_a = one_sided ? 1.0 - q1 : (1.0 - q1) - inclusion(wt.w_t0, s);
    const double delta_y = detail::sigmoid(detail::dot(wt.w_a1, s.x) / dd) -
                           detail::sigmoid(detail::dot(wt.w_a0, s.x) / dd);
    truth[i] = delta_a * delta_y;
  }
  ds.true_catea = std::move(truth);
  return {std::move(ds), std::move(wt)};
}

// Dataset B. Features and assignment follow dataset A; intake is logistic in
// x per assignment arm, and the outcome mixes a fixed control rate 0.1 with a
// shifted logistic intake response:
//   a | t, x ~ Bern(sigma((1-t) w_t0 . x / d + t w_t1 . x / d))
//   y | a, x ~ Bern((1-a) 0.1 + a sigma(w_a1 . x / d + eta))
// Under one-sided non-adherence w_t0 is zeroed and the t=0 intake probability
// is pinned to exactly 0 so the mode's defining constraint holds. The
// generative model is fully known, so the ground truth is exact:
//   Phi(x) = [P(a=1|t=1,x) - P(a=1|t=0,x)] * [sigma(w_a1 . x / d + eta) - 0.1].
inline GeneratedDataset generate_dataset_b(const SyntheticConfig& cfg) {
  cfg.validate();
  SplitMix64 rng(cfg.seed);
  const double dd = static_cast<double>(cfg.d);
  const bool one_sided = cfg.mode == NonAdherenceMode::OneSided;

  DatasetWeights wt;
  wt.w = detail::draw_weights(rng, cfg.d, cfg.weight_amplitude);
  wt.w_t0 = detail::draw_weights(rng, cfg.d, cfg.weight_amplitude);
  wt.w_t1 = detail::draw_weights(rng, cfg.d, cfg.weight_amplitude);
  wt.w_a1 = detail::draw_weights(rng, cfg.d, cfg.weight_amplitude);
  if (one_sided) std::fill(wt.w_t0.begin(), wt.w_t0.end(), 0.0);

  Dataset ds;
  ds.feature_dim = cfg.d;
  ds.mode = cfg.mode;
  ds.outcome_kind = OutcomeKind::Binary;
  ds.samples.resize(cfg.n);
  std::vector<double> truth(cfg.n);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    Sample& s = ds.samples[i];
    s.x.resize(cfg.d);
    for (double& v : s.x) v = rng.next_gaussian();
    s.t = rng.next_bernoulli(detail::sigmoid(detail::dot(wt.w, s.x) / dd)) ? 1 : 0;

    const double p_a1_t0 =
        one_sided ? 0.0 : detail::sigmoid(detail::dot(wt.w_t0, s.x) / dd);
    const double p_a1_t1 = detail::sigmoid(detail::dot(wt.w_t1, s.x) / dd);
    const double p_a = s.t == 1 ? p_a1_t1 : p_a1_t0;
    s.a = rng.next_bernoulli(p_a) ? 1 : 0;

    const double p_y_a1 = detail::sigmoid(detail::dot(wt.w_a1, s.x) / dd + cfg.eta);
    s.y = rng.next_bernoulli(s.a == 1 ? p_y_a1 : 0.1) ? 1.0 : 0.0;
    truth[i] = (p_a1_t1 - p_a1_t0) * (p_y_a1 - 0.1);
  }
  ds.true_catea = std::move(truth);
  return {std::move(ds), std::move(wt)};
}

// n i.i.d. draws from a known single-stratum population.
inline stratum::StratumData sample_stratum(const stratum::TruePopulation& pop,
                                           NonAdherenceMode mode, std::size_t n,
                                           std::uint64_t seed) {
  if (!(pop.pi > 0.0 && pop.pi < 1.0))
    throw ConfigError("stratum population requires pi strictly inside (0,1)");
  SplitMix64 rng(seed);
  return stratum::detail::draw_stratum(pop, mode, n, rng);
}

}  // namespace catea::dgp
