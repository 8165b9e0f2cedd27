#pragma once

// Experiment orchestration: deterministic splits, replications, PEHE
// aggregation, and the bound-verification campaign that pits the Monte Carlo
// harness against the closed-form variance theory.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "catea/core.hpp"
#include "catea/dgp.hpp"
#include "catea/learners.hpp"
#include "catea/stratum.hpp"
#include "catea/theory.hpp"

namespace catea::harness {

struct LengthMismatch : DataError {
  using DataError::DataError;
};
struct EmptyInput : DataError {
  using DataError::DataError;
};

// Precision in the estimation of heterogeneous effects: root mean squared
// error between per-individual estimates and ground truth.
inline double pehe(const std::vector<double>& estimates, const std::vector<double>& truth) {
  if (estimates.empty()) throw EmptyInput("pehe needs at least one pair");
  if (estimates.size() != truth.size())
    throw LengthMismatch("pehe inputs differ in length");
  double sq = 0.0;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    const double d = estimates[i] - truth[i];
    sq += d * d;
  }
  return std::sqrt(sq / static_cast<double>(estimates.size()));
}

// Inclusive linear-interpolation quantile on sorted data: the p-quantile sits
// at rank (n-1)p, interpolating between the neighbouring order statistics.
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw EmptyInput("quantile of empty data");
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = static_cast<std::size_t>(std::ceil(pos));
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

inline double quantile(std::vector<double> values, double p) {
  std::sort(values.begin(), values.end());
  return quantile_sorted(values, p);
}

struct SplitIndices {
  std::vector<std::size_t> train, val, test;
};

// Shuffles indices with the seed's own stream, then carves off the test
// fraction and a validation fraction of the remaining training block.
// The three parts are disjoint and exhaustive.
inline SplitIndices split_indices(std::size_t n, double test_fraction,
                                  double val_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0) ||
      !(val_fraction > 0.0 && val_fraction < 1.0))
    throw ConfigError("split fractions must lie in (0,1)");
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  SplitMix64 rng(derive_seed(seed, 0x517ull));
  for (std::size_t i = n; i > 1; --i)
    std::swap(idx[i - 1], idx[rng.next_u64() % static_cast<std::uint64_t>(i)]);
  const std::size_t n_test =
      static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
  const std::size_t n_rest = n - n_test;
  const std::size_t n_val =
      static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(n_rest)));
  SplitIndices s;
  s.test.assign(idx.begin(), idx.begin() + n_test);
  s.val.assign(idx.begin() + n_test, idx.begin() + n_test + n_val);
  s.train.assign(idx.begin() + n_test + n_val, idx.end());
  return s;
}

inline Dataset subset_dataset(const Dataset& ds, const std::vector<std::size_t>& idx) {
  Dataset out;
  out.feature_dim = ds.feature_dim;
  out.mode = ds.mode;
  out.outcome_kind = ds.outcome_kind;
  out.samples.reserve(idx.size());
  if (ds.true_catea) out.true_catea.emplace();
  for (std::size_t i : idx) {
    out.samples.push_back(ds.samples[i]);
    if (ds.true_catea) out.true_catea->push_back((*ds.true_catea)[i]);
  }
  return out;
}

// --------------------------------------------------------------------------
// PEHE experiments
// --------------------------------------------------------------------------

enum class DgpKind { A, B };
enum class LearnerKind { TLearnerSbd, TLearnerCfd, LobsterNet };

inline const char* to_string(LearnerKind k) {
  switch (k) {
    case LearnerKind::TLearnerSbd:
      return "tlearner_sbd";
    case LearnerKind::TLearnerCfd:
      return "tlearner_cfd";
    case LearnerKind::LobsterNet:
      return "lobsternet";
  }
  return "?";
}

inline LearnerKind learner_from_string(const std::string& s) {
  if (s == "tlearner_sbd") return LearnerKind::TLearnerSbd;
  if (s == "tlearner_cfd") return LearnerKind::TLearnerCfd;
  if (s == "lobsternet") return LearnerKind::LobsterNet;
  throw ConfigError("unknown learner: " + s);
}

struct ExperimentConfig {
  DgpKind dgp = DgpKind::A;
  // Sweep values: gamma grid for dataset A, eta grid for dataset B.
  std::vector<double> sweep_values = {0.1, 0.3, 0.5, 0.7, 0.9};
  std::size_t n = 1000;
  std::size_t d = 30;
  double weight_amplitude = 10.0;
  NonAdherenceMode mode = NonAdherenceMode::OneSided;
  std::vector<LearnerKind> learners = {LearnerKind::TLearnerSbd, LearnerKind::TLearnerCfd};
  std::size_t replications = 20;
  double test_fraction = 0.2;
  double val_fraction = 0.2;
  std::uint64_t base_seed = 0;
  std::size_t hidden_width = 300;  // T-learner nets and LobsterNet shared modules
  std::size_t head_width = 100;    // LobsterNet task heads
  net::TrainConfig train;
  unsigned num_threads = 0;  // 0 = hardware concurrency

  void validate() const {
    if (replications < 1) throw ConfigError("replications must be >= 1");
    if (sweep_values.empty()) throw ConfigError("sweep_values must not be empty");
    if (learners.empty()) throw ConfigError("learners must not be empty");
    if (!(test_fraction > 0.0 && test_fraction < 1.0) ||
        !(val_fraction > 0.0 && val_fraction < 1.0))
      throw ConfigError("split fractions must lie in (0,1)");
    train.validate();
  }
};

struct CellResult {
  double sweep_value = 0.0;
  LearnerKind learner = LearnerKind::TLearnerSbd;
  std::size_t replication = 0;
  bool failed = false;
  std::string failure;
  double pehe = 0.0;
};

struct ReplicationMeta {
  double sweep_value = 0.0;
  std::size_t replication = 0;
  double mean_delta_a = 0.0;  // empirical E[Delta_A] of the generated data
  double mean_delta_y = 0.0;  // empirical E[Delta_Y]
};

struct PeheResult {
  std::vector<double> values;  // per successful replication
  std::size_t failed = 0;
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
};

struct ExperimentResult {
  std::vector<CellResult> cells;           // every (sweep, learner, replication)
  std::vector<ReplicationMeta> meta;       // per (sweep, replication)
  // Aggregates keyed by (sweep index, learner index in cfg order).
  std::vector<std::vector<PeheResult>> summary;
};

namespace detail {

inline std::unique_ptr<learners::CateaLearner> make_learner(LearnerKind kind,
                                                            const ExperimentConfig& cfg) {
  switch (kind) {
    case LearnerKind::TLearnerSbd:
      return std::make_unique<learners::TLearnerSbd>(cfg.hidden_width);
    case LearnerKind::TLearnerCfd:
      return std::make_unique<learners::TLearnerCfd>(cfg.hidden_width);
    case LearnerKind::LobsterNet:
      return std::make_unique<learners::LobsterNet>(cfg.hidden_width, cfg.head_width);
  }
  throw ConfigError("unknown learner kind");
}

// Mean effect decomposition of a generated dataset, reported next to the
// sweep value; E[Delta_A] / E[Delta_Y] are the natural comparison axes.
inline std::pair<double, double> mean_deltas(const dgp::GeneratedDataset& g,
                                             DgpKind kind, double eta) {
  const Dataset& ds = g.dataset;
  const double dd = static_cast<double>(ds.feature_dim);
  const bool one_sided = ds.mode == NonAdherenceMode::OneSided;
  double sum_da = 0.0, sum_dy = 0.0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const Sample& s = ds.samples[i];
    double da = 0.0, dy = 0.0;
    if (kind == DgpKind::B) {
      const double p1 = dgp::detail::sigmoid(dgp::detail::dot(g.weights.w_t1, s.x) / dd);
      const double p0 =
          one_sided ? 0.0 : dgp::detail::sigmoid(dgp::detail::dot(g.weights.w_t0, s.x) / dd);
      da = p1 - p0;
      dy = dgp::detail::sigmoid(dgp::detail::dot(g.weights.w_a1, s.x) / dd + eta) - 0.1;
    } else {
      dy = dgp::detail::sigmoid(dgp::detail::dot(g.weights.w_a1, s.x) / dd) -
           dgp::detail::sigmoid(dgp::detail::dot(g.weights.w_a0, s.x) / dd);
      // Delta_A = Phi / Delta_Y under full mediation; recovered from the
      // stored ground truth to avoid duplicating the inclusion computation.
      da = std::abs(dy) > 1e-12 ? (*ds.true_catea)[i] / dy : 0.0;
    }
    sum_da += da;
    sum_dy += dy;
  }
  const double n = static_cast<double>(ds.size());
  return {sum_da / n, sum_dy / n};
}

}  // namespace detail

inline PeheResult aggregate_pehe(const std::vector<double>& values, std::size_t failed) {
  PeheResult r;
  r.values = values;
  r.failed = failed;
  if (!values.empty()) {
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    r.median = quantile_sorted(sorted, 0.5);
    r.q25 = quantile_sorted(sorted, 0.25);
    r.q75 = quantile_sorted(sorted, 0.75);
  }
  return r;
}

// Runs the full (sweep value x learner x replication) grid. Each replication
// regenerates weights and data from seed(base, sweep, replication), splits,
// fits every requested learner, and scores PEHE on the held-out test split.
// Learner failures (e.g. an empty conditioning cell at extreme sweep values)
// are recorded per cell rather than aborting the sweep. Replications run in
// parallel; results depend only on the seeds.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  struct Job {
    std::size_t sweep_idx, rep;
  };
  std::vector<Job> jobs;
  for (std::size_t si = 0; si < cfg.sweep_values.size(); ++si)
    for (std::size_t r = 0; r < cfg.replications; ++r) jobs.push_back({si, r});

  struct JobOutput {
    std::vector<CellResult> cells;
    ReplicationMeta meta;
  };
  std::vector<JobOutput> outputs(jobs.size());

  auto run_job = [&](std::size_t j) {
    const auto [si, rep] = jobs[j];
    const double sweep = cfg.sweep_values[si];
    dgp::SyntheticConfig scfg;
    scfg.n = cfg.n;
    scfg.d = cfg.d;
    scfg.weight_amplitude = cfg.weight_amplitude;
    scfg.mode = cfg.mode;
    scfg.seed = derive_seed(derive_seed(cfg.base_seed, si), rep);
    if (cfg.dgp == DgpKind::A)
      scfg.gamma = sweep;
    else
      scfg.eta = sweep;
    const dgp::GeneratedDataset gen = cfg.dgp == DgpKind::A
                                          ? dgp::generate_dataset_a(scfg)
                                          : dgp::generate_dataset_b(scfg);
    const Dataset& ds = gen.dataset;

    const SplitIndices split =
        split_indices(ds.size(), cfg.test_fraction, cfg.val_fraction, scfg.seed);
    const Dataset train = subset_dataset(ds, split.train);
    const Dataset val = subset_dataset(ds, split.val);
    const Dataset test = subset_dataset(ds, split.test);

    JobOutput& out = outputs[j];
    const auto [mda, mdy] = detail::mean_deltas(gen, cfg.dgp, scfg.eta);
    out.meta = {sweep, rep, mda, mdy};

    for (LearnerKind kind : cfg.learners) {
      CellResult cell;
      cell.sweep_value = sweep;
      cell.learner = kind;
      cell.replication = rep;
      try {
        auto learner = detail::make_learner(kind, cfg);
        net::TrainConfig tc = cfg.train;
        tc.seed = derive_seed(scfg.seed, 0xF17u);
        learner->fit(train, val, tc);
        std::vector<double> est;
        est.reserve(test.size());
        for (const Sample& s : test.samples)
          est.push_back(learner->predict_catea(s.x).value);
        cell.pehe = pehe(est, *test.true_catea);
      } catch (const std::exception& e) {
        cell.failed = true;
        cell.failure = e.what();
      }
      out.cells.push_back(std::move(cell));
    }
  };

  unsigned threads = cfg.num_threads ? cfg.num_threads : std::thread::hardware_concurrency();
  threads = std::max(1u, std::min<unsigned>(threads, jobs.size()));
  if (threads <= 1) {
    for (std::size_t j = 0; j < jobs.size(); ++j) run_job(j);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w)
      pool.emplace_back([&] {
        for (std::size_t j = next.fetch_add(1); j < jobs.size(); j = next.fetch_add(1))
          run_job(j);
      });
    for (auto& t : pool) t.join();
  }

  ExperimentResult result;
  result.summary.assign(cfg.sweep_values.size(),
                        std::vector<PeheResult>(cfg.learners.size()));
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    result.meta.push_back(outputs[j].meta);
    for (CellResult& c : outputs[j].cells) result.cells.push_back(std::move(c));
  }
  for (std::size_t si = 0; si < cfg.sweep_values.size(); ++si)
    for (std::size_t li = 0; li < cfg.learners.size(); ++li) {
      std::vector<double> vals;
      std::size_t failed = 0;
      for (const CellResult& c : result.cells)
        if (c.sweep_value == cfg.sweep_values[si] && c.learner == cfg.learners[li]) {
          if (c.failed)
            ++failed;
          else
            vals.push_back(c.pehe);
        }
      result.summary[si][li] = aggregate_pehe(vals, failed);
    }
  return result;
}

// --------------------------------------------------------------------------
// Bound verification
// --------------------------------------------------------------------------

inline theory::VarianceParams variance_params_from_population(
    const stratum::TruePopulation& pop, NonAdherenceMode mode) {
  theory::VarianceParams vp;
  vp.mode = mode;
  vp.pi = pop.pi;
  vp.e_a0 = pop.p_a_given_t[0];
  vp.e_a1 = pop.p_a_given_t[1];
  vp.v_a0 = vp.e_a0 * (1.0 - vp.e_a0);
  vp.v_a1 = vp.e_a1 * (1.0 - vp.e_a1);
  vp.e_y0 = pop.outcome_dist[0].mean();
  vp.e_y1 = pop.outcome_dist[1].mean();
  vp.v_y0 = pop.outcome_dist[0].variance();
  vp.v_y1 = pop.outcome_dist[1].variance();
  return vp;
}

inline theory::CellProbabilities cell_probabilities_from_population(
    const stratum::TruePopulation& pop) {
  theory::CellProbabilities cells;
  for (int a = 0; a < 2; ++a)
    for (int t = 0; t < 2; ++t) cells.omega[a][t] = pop.cell_probability(a, t);
  return cells;
}

struct BoundsCampaignConfig {
  std::size_t num_configs = 20;
  std::size_t n = 2000;
  std::size_t replicates = 20000;
  std::uint64_t seed = 0;
  NonAdherenceMode mode = NonAdherenceMode::TwoSided;
  double min_margin = 0.05;  // required positivity margin of sampled populations
  unsigned num_threads = 0;
};

struct BoundsConfigReport {
  stratum::TruePopulation pop;
  double rho = 0.0;
  double sbd_lower_bound = 0.0;
  double cfd_upper_bound = 0.0;
  double sbd_closed_form_nvar = 0.0;
  double cfd_asymptotic_nvar = 0.0;
  stratum::MonteCarloResult mc;
  bool sbd_violation = false;  // empirical nVar below the lower bound (3 SE slack)
  bool cfd_violation = false;  // empirical nVar above the upper bound (3 SE slack)
};

struct BoundsReport {
  std::vector<BoundsConfigReport> configs;
  std::size_t violation_count = 0;
};

// Draws a random Bernoulli-outcome population whose mode-possible cells all
// have probability >= min_margin.
inline stratum::TruePopulation random_population(SplitMix64& rng, NonAdherenceMode mode,
                                                 double min_margin) {
  for (int attempt = 0; attempt < 10000; ++attempt) {
    stratum::TruePopulation pop;
    pop.pi = rng.next_uniform(0.2, 0.8);
    pop.p_a_given_t[0] =
        mode == NonAdherenceMode::OneSided ? 0.0 : rng.next_uniform(0.1, 0.9);
    pop.p_a_given_t[1] = rng.next_uniform(0.1, 0.9);
    pop.outcome_dist[0] = stratum::OutcomeDist::bernoulli(rng.next_uniform(0.1, 0.9));
    pop.outcome_dist[1] = stratum::OutcomeDist::bernoulli(rng.next_uniform(0.1, 0.9));
    if (pop.positivity_margin(mode) >= min_margin) return pop;
  }
  throw ConfigError("could not sample a population with the requested margin");
}

// Samples random populations, runs the Monte Carlo harness on each, and
// checks the empirical n*Var of both plug-ins against the closed-form theory:
// the SBD lower bound must sit below the empirical SBD variance and the CFD
// upper bound above the empirical CFD variance, each with a 3-standard-error
// tolerance band. Violations are reported as data, not errors.
inline BoundsReport verify_bounds(const BoundsCampaignConfig& cfg) {
  if (cfg.num_configs < 1) throw ConfigError("verify_bounds requires num_configs >= 1");
  BoundsReport report;
  SplitMix64 rng(derive_seed(cfg.seed, 0xB0BDull));
  for (std::size_t k = 0; k < cfg.num_configs; ++k) {
    BoundsConfigReport r;
    r.pop = random_population(rng, cfg.mode, cfg.min_margin);
    const theory::VarianceParams vp = variance_params_from_population(r.pop, cfg.mode);
    const theory::CellProbabilities cells = cell_probabilities_from_population(r.pop);
    r.rho = theory::rho(cells, cfg.mode);
    r.sbd_lower_bound = theory::sbd_variance_lower_bound(vp);
    r.cfd_upper_bound = theory::cfd_variance_upper_bound(vp, r.rho);
    r.sbd_closed_form_nvar =
        static_cast<double>(cfg.n) * theory::sbd_variance_closed_form(vp, cfg.n);
    r.cfd_asymptotic_nvar = theory::cfd_asymptotic_variance(vp, cells);
    r.mc = stratum::monte_carlo_variance(r.pop, cfg.mode, cfg.n, cfg.replicates,
                                         derive_seed(cfg.seed, k), cfg.num_threads);
    r.sbd_violation = r.mc.nvar_sbd + 3.0 * r.mc.se_nvar_sbd < r.sbd_lower_bound;
    r.cfd_violation = r.mc.nvar_cfd - 3.0 * r.mc.se_nvar_cfd > r.cfd_upper_bound;
    if (r.sbd_violation || r.cfd_violation) ++report.violation_count;
    report.configs.push_back(r);
  }
  return report;
}

}  // namespace catea::harness
