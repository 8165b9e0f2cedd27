#pragma once

// Single-stratum (fixed covariate value) maximum-likelihood estimators, the
// plug-in SBD/CFD estimators built on them, and a Monte Carlo harness that
// measures their sampling variance.

#include <cmath>
#include <cstdint>
#include <future>
#include <optional>
#include <thread>
#include <vector>

#include "catea/adjustment.hpp"
#include "catea/core.hpp"
#include "catea/rng.hpp"

namespace catea::stratum {

struct StratumRecord {
  int t = 0;
  int a = 0;
  double y = 0.0;
};

struct StratumData {
  std::vector<StratumRecord> records;
  NonAdherenceMode mode = NonAdherenceMode::TwoSided;
};

// Empirical frequencies and cell means over one stratum. y_mean_at[a][t] is
// absent exactly when the (a,t) cell is empty.
struct StratumSummary {
  std::size_t n = 0;
  double pi_hat = 0.0;
  double omega_hat[2][2] = {{0.0, 0.0}, {0.0, 0.0}};  // [a][t]
  std::size_t cell_count[2][2] = {{0, 0}, {0, 0}};
  double a_mean[2] = {0.0, 0.0};                         // indexed by t
  double y_mean_t[2] = {0.0, 0.0};                       // indexed by t
  std::optional<double> y_mean_at[2][2];                 // [a][t]
};

struct EmptyStratum : DataError {
  using DataError::DataError;
};
struct MissingAssignmentArm : DataError {
  using DataError::DataError;
};
struct EmptyCell : DataError {
  int a, t;
  EmptyCell(int a_, int t_)
      : DataError("required stratum cell (a=" + std::to_string(a_) + ",t=" +
                  std::to_string(t_) + ") is empty"),
        a(a_),
        t(t_) {}
};
struct DegeneratePopulation : DataError {
  using DataError::DataError;
};

inline StratumSummary mle_summary(const StratumData& sd) {
  if (sd.records.empty()) throw EmptyStratum("cannot summarize an empty stratum");
  StratumSummary s;
  s.n = sd.records.size();
  std::size_t t_count[2] = {0, 0};
  double a_sum[2] = {0.0, 0.0};
  double y_sum_t[2] = {0.0, 0.0};
  double y_sum_at[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
  for (const StratumRecord& r : sd.records) {
    ++t_count[r.t];
    ++s.cell_count[r.a][r.t];
    a_sum[r.t] += r.a;
    y_sum_t[r.t] += r.y;
    y_sum_at[r.a][r.t] += r.y;
  }
  if (t_count[0] == 0 || t_count[1] == 0)
    throw MissingAssignmentArm("all records share the same assignment arm");
  s.pi_hat = static_cast<double>(t_count[1]) / static_cast<double>(s.n);
  for (int t = 0; t < 2; ++t) {
    s.a_mean[t] = a_sum[t] / static_cast<double>(t_count[t]);
    s.y_mean_t[t] = y_sum_t[t] / static_cast<double>(t_count[t]);
  }
  for (int a = 0; a < 2; ++a)
    for (int t = 0; t < 2; ++t) {
      s.omega_hat[a][t] =
          static_cast<double>(s.cell_count[a][t]) / static_cast<double>(s.n);
      if (s.cell_count[a][t] > 0)
        s.y_mean_at[a][t] = y_sum_at[a][t] / static_cast<double>(s.cell_count[a][t]);
    }
  return s;
}

inline adjustment::CateaValue sbd_plugin(const StratumSummary& s) {
  return adjustment::sbd_catea(s.y_mean_t[1], s.y_mean_t[0]);
}

inline adjustment::CateaValue sbd_plugin(const StratumData& sd) {
  return sbd_plugin(mle_summary(sd));
}

// Plug-in CFD estimator: substitutes the stratum MLE cell means into the
// mode-appropriate adjustment formula. The required cells are (0,0), (0,1),
// (1,1) under one-sided non-adherence and all four under two-sided; an empty
// required cell signals insufficient data for that intake/assignment
// combination.
inline adjustment::CateaValue cfd_plugin(const StratumSummary& s,
                                         NonAdherenceMode mode) {
  for (int a = 0; a < 2; ++a)
    for (int t = 0; t < 2; ++t) {
      if (mode == NonAdherenceMode::OneSided && a == 1 && t == 0) continue;
      if (s.cell_count[a][t] == 0) throw EmptyCell(a, t);
    }
  NuisanceValues nv;
  nv.pi = s.pi_hat;
  nv.a_given_t[0] = s.a_mean[0];
  nv.a_given_t[1] = s.a_mean[1];
  for (int a = 0; a < 2; ++a)
    for (int t = 0; t < 2; ++t)
      nv.y_given_at[a][t] = s.y_mean_at[a][t].value_or(0.0);
  return adjustment::cfd_catea(nv, mode);
}

inline adjustment::CateaValue cfd_plugin(const StratumData& sd) {
  return cfd_plugin(mle_summary(sd), sd.mode);
}

// Outcome distribution of one intake arm: Bernoulli(p) or Gaussian(mu, sigma2).
struct OutcomeDist {
  enum class Kind { Bernoulli, Gaussian } kind = Kind::Bernoulli;
  double p = 0.5;        // Bernoulli success probability
  double mu = 0.0;       // Gaussian mean
  double sigma2 = 1.0;   // Gaussian variance

  static OutcomeDist bernoulli(double p) { return {Kind::Bernoulli, p, 0.0, 0.0}; }
  static OutcomeDist gaussian(double mu, double sigma2) {
    return {Kind::Gaussian, 0.0, mu, sigma2};
  }

  double mean() const { return kind == Kind::Bernoulli ? p : mu; }
  double variance() const { return kind == Kind::Bernoulli ? p * (1.0 - p) : sigma2; }
  double sample(SplitMix64& rng) const {
    if (kind == Kind::Bernoulli) return rng.next_bernoulli(p) ? 1.0 : 0.0;
    return mu + std::sqrt(sigma2) * rng.next_gaussian();
  }
};

// Known single-stratum population: t ~ Bern(pi), a|t ~ Bern(p_a_given_t[t]),
// y|a ~ outcome_dist[a]. Outcomes depend on intake only (full mediation).
struct TruePopulation {
  double pi = 0.5;
  double p_a_given_t[2] = {0.0, 1.0};
  OutcomeDist outcome_dist[2] = {OutcomeDist::bernoulli(0.5),
                                 OutcomeDist::bernoulli(0.5)};

  double cell_probability(int a, int t) const {
    const double pt = t == 1 ? pi : 1.0 - pi;
    const double pa = a == 1 ? p_a_given_t[t] : 1.0 - p_a_given_t[t];
    return pt * pa;
  }
  // Smallest probability among the cells that are possible under `mode`.
  double positivity_margin(NonAdherenceMode mode) const {
    double m = 1.0;
    for (int a = 0; a < 2; ++a)
      for (int t = 0; t < 2; ++t) {
        if (mode == NonAdherenceMode::OneSided && a == 1 && t == 0) continue;
        m = std::min(m, cell_probability(a, t));
      }
    return m;
  }
  double delta_a() const { return p_a_given_t[1] - p_a_given_t[0]; }
  double delta_y() const { return outcome_dist[1].mean() - outcome_dist[0].mean(); }
  double true_catea() const { return delta_a() * delta_y(); }
};

struct MonteCarloResult {
  double mean_sbd = 0.0;
  double mean_cfd = 0.0;
  double nvar_sbd = 0.0;  // n * unbiased sample variance over kept replicates
  double nvar_cfd = 0.0;
  std::size_t reject_count = 0;
  std::size_t kept_count = 0;
  // Plain standard errors: of the replicate mean, and of n*Var via the
  // fourth-moment formula Var(s^2) = (m4 - s^4 (m-3)/(m-1)) / m.
  double se_mean_sbd = 0.0;
  double se_mean_cfd = 0.0;
  double se_nvar_sbd = 0.0;
  double se_nvar_cfd = 0.0;
};

namespace detail {

struct MomentStats {
  double mean = 0.0, var = 0.0, m4 = 0.0;
};

// Two-pass moments in replicate order; deterministic regardless of how the
// replicates were produced.
inline MomentStats moments(const std::vector<double>& v) {
  MomentStats s;
  const std::size_t m = v.size();
  if (m == 0) return s;
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(m);
  double s2 = 0.0, s4 = 0.0;
  for (double x : v) {
    const double d = x - s.mean;
    const double d2 = d * d;
    s2 += d2;
    s4 += d2 * d2;
  }
  if (m > 1) s.var = s2 / static_cast<double>(m - 1);
  s.m4 = s4 / static_cast<double>(m);
  return s;
}

inline double se_of_variance(const MomentStats& s, std::size_t m) {
  if (m < 2) return 0.0;
  const double md = static_cast<double>(m);
  const double v = (s.m4 - s.var * s.var * (md - 3.0) / (md - 1.0)) / md;
  return v > 0.0 ? std::sqrt(v) : 0.0;
}

inline StratumData draw_stratum(const TruePopulation& pop, NonAdherenceMode mode,
                                std::size_t n, SplitMix64& rng) {
  StratumData sd;
  sd.mode = mode;
  sd.records.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int t = rng.next_bernoulli(pop.pi) ? 1 : 0;
    const int a = rng.next_bernoulli(pop.p_a_given_t[t]) ? 1 : 0;
    const double y = pop.outcome_dist[a].sample(rng);
    sd.records[i] = {t, a, y};
  }
  return sd;
}

}  // namespace detail

// Draws `replicates` i.i.d. stratum datasets of size n, computes both plug-in
// estimators on each, and reports replicate means and n*variance. Replicates
// on which either estimator is undefined (missing arm / empty required cell)
// are rejected and counted rather than imputed, so both estimators are
// aggregated over the same replicate set. Replicate r draws from its own
// substream derive_seed(seed, r); the result is bitwise identical for a given
// seed regardless of thread count.
inline MonteCarloResult monte_carlo_variance(const TruePopulation& pop,
                                             NonAdherenceMode mode, std::size_t n,
                                             std::size_t replicates,
                                             std::uint64_t seed,
                                             unsigned num_threads = 0) {
  if (n < 2) throw ConfigError("monte_carlo_variance requires n >= 2");
  if (replicates < 1) throw ConfigError("monte_carlo_variance requires replicates >= 1");
  if (mode == NonAdherenceMode::OneSided && pop.p_a_given_t[0] != 0.0)
    throw DegeneratePopulation("one-sided population must have P(a=1|t=0) = 0");
  if (!(pop.positivity_margin(mode) > 0.0))
    throw DegeneratePopulation("population has a zero-probability required cell");

  struct Rep {
    double sbd = 0.0, cfd = 0.0;
    bool rejected = false;
  };
  std::vector<Rep> reps(replicates);

  auto run_range = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t r = lo; r < hi; ++r) {
      SplitMix64 rng(derive_seed(seed, r));
      const StratumData sd = detail::draw_stratum(pop, mode, n, rng);
      try {
        const StratumSummary s = mle_summary(sd);
        reps[r].sbd = sbd_plugin(s).value;
        reps[r].cfd = cfd_plugin(s, mode).value;
      } catch (const DataError&) {
        reps[r].rejected = true;
      }
    }
  };

  if (num_threads == 0) num_threads = std::thread::hardware_concurrency();
  if (num_threads <= 1 || replicates < 64) {
    run_range(0, replicates);
  } else {
    const std::size_t chunk = (replicates + num_threads - 1) / num_threads;
    std::vector<std::thread> workers;
    for (unsigned w = 0; w < num_threads; ++w) {
      const std::size_t lo = std::min<std::size_t>(w * chunk, replicates);
      const std::size_t hi = std::min<std::size_t>(lo + chunk, replicates);
      if (lo < hi) workers.emplace_back(run_range, lo, hi);
    }
    for (auto& t : workers) t.join();
  }

  std::vector<double> sbd_vals, cfd_vals;
  sbd_vals.reserve(replicates);
  cfd_vals.reserve(replicates);
  MonteCarloResult res;
  for (const Rep& r : reps) {
    if (r.rejected) {
      ++res.reject_count;
    } else {
      sbd_vals.push_back(r.sbd);
      cfd_vals.push_back(r.cfd);
    }
  }
  res.kept_count = sbd_vals.size();
  if (res.kept_count == 0) return res;

  const auto ms = detail::moments(sbd_vals);
  const auto mc = detail::moments(cfd_vals);
  const double nd = static_cast<double>(n);
  const double kept = static_cast<double>(res.kept_count);
  res.mean_sbd = ms.mean;
  res.mean_cfd = mc.mean;
  res.nvar_sbd = nd * ms.var;
  res.nvar_cfd = nd * mc.var;
  res.se_mean_sbd = std::sqrt(ms.var / kept);
  res.se_mean_cfd = std::sqrt(mc.var / kept);
  res.se_nvar_sbd = nd * detail::se_of_variance(ms, res.kept_count);
  res.se_nvar_cfd = nd * detail::se_of_variance(mc, res.kept_count);
  return res;
}

}  // namespace catea::stratum
