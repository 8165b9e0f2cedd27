#include "catea/harness.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"

using namespace catea;
using namespace catea::harness;

TEST_SUITE_BEGIN("harness");

TEST_CASE("pehe hand values") {
  CHECK(pehe({1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}) == 0.0);
  CHECK(pehe({1.3, 2.3}, {1.0, 2.0}) == doctest::Approx(0.3));
  CHECK(pehe({0.1, 0.5}, {0.0, 0.3}) == doctest::Approx(std::sqrt(0.025)));
  CHECK_THROWS_AS(pehe({}, {}), EmptyInput);
  CHECK_THROWS_AS(pehe({1.0}, {1.0, 2.0}), LengthMismatch);
}

TEST_CASE("pehe is invariant under pair permutations") {
  SplitMix64 rng(1);
  std::vector<double> est, truth;
  for (int i = 0; i < 40; ++i) {
    est.push_back(rng.next_gaussian());
    truth.push_back(rng.next_gaussian());
  }
  const double base = pehe(est, truth);
  std::vector<std::size_t> perm(est.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  for (std::size_t i = perm.size(); i > 1; --i)
    std::swap(perm[i - 1], perm[rng.next_u64() % i]);
  std::vector<double> est_p, truth_p;
  for (std::size_t i : perm) {
    est_p.push_back(est[i]);
    truth_p.push_back(truth[i]);
  }
  CHECK(pehe(est_p, truth_p) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("quantiles follow the inclusive linear-interpolation definition") {
  CHECK(quantile({1, 2, 3, 4}, 0.5) == doctest::Approx(2.5));
  CHECK(quantile({1, 2, 3, 4}, 0.25) == doctest::Approx(1.75));
  CHECK(quantile({1, 2, 3, 4}, 0.75) == doctest::Approx(3.25));
  CHECK(quantile({5}, 0.25) == 5.0);
  CHECK(quantile({3, 1}, 0.0) == 1.0);
  CHECK(quantile({3, 1}, 1.0) == 3.0);

  // Sorted-list oracle on random data: rank r = (n-1)p, linear interpolation.
  SplitMix64 rng(2);
  std::vector<double> data;
  for (int i = 0; i < 17; ++i) data.push_back(rng.next_gaussian());
  std::vector<double> sorted = data;
  std::sort(sorted.begin(), sorted.end());
  for (double p : {0.1, 0.25, 0.5, 0.8, 0.95}) {
    const double pos = p * 16.0;
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const double expect = sorted[lo] + (sorted[std::min<std::size_t>(lo + 1, 16)] -
                                        sorted[lo]) *
                                           (pos - std::floor(pos));
    CHECK(quantile(data, p) == doctest::Approx(expect));
  }
}

TEST_CASE("aggregate_pehe keeps the median inside the IQR") {
  SplitMix64 rng(3);
  std::vector<double> values;
  for (int i = 0; i < 15; ++i) values.push_back(std::abs(rng.next_gaussian()));
  const PeheResult r = aggregate_pehe(values, 2);
  CHECK(r.failed == 2);
  CHECK(r.q25 <= r.median);
  CHECK(r.median <= r.q75);
}

TEST_CASE("split_indices is deterministic, disjoint, and exhaustive") {
  const SplitIndices a = split_indices(103, 0.2, 0.2, 42);
  const SplitIndices b = split_indices(103, 0.2, 0.2, 42);
  CHECK(a.train == b.train);
  CHECK(a.val == b.val);
  CHECK(a.test == b.test);

  const SplitIndices c = split_indices(103, 0.2, 0.2, 43);
  CHECK(a.test != c.test);

  std::set<std::size_t> seen;
  for (const auto* part : {&a.train, &a.val, &a.test})
    for (std::size_t i : *part) CHECK(seen.insert(i).second);
  CHECK(seen.size() == 103);

  // 20% test = 21 of 103; 20% of the remaining 82 = 16 validation.
  CHECK(a.test.size() == 21);
  CHECK(a.val.size() == 16);
  CHECK(a.train.size() == 66);
}

TEST_CASE("variance_params_from_population maps moments correctly") {
  stratum::TruePopulation pop;
  pop.pi = 0.3;
  pop.p_a_given_t[0] = 0.2;
  pop.p_a_given_t[1] = 0.9;
  pop.outcome_dist[0] = stratum::OutcomeDist::bernoulli(0.25);
  pop.outcome_dist[1] = stratum::OutcomeDist::gaussian(1.5, 0.7);
  const auto vp = variance_params_from_population(pop, NonAdherenceMode::TwoSided);
  CHECK(vp.pi == 0.3);
  CHECK(vp.e_a0 == 0.2);
  CHECK(vp.v_a0 == doctest::Approx(0.16));
  CHECK(vp.e_y0 == 0.25);
  CHECK(vp.v_y0 == doctest::Approx(0.1875));
  CHECK(vp.e_y1 == 1.5);
  CHECK(vp.v_y1 == 0.7);
  CHECK(vp.delta_a() == doctest::Approx(0.7));

  const auto cells = cell_probabilities_from_population(pop);
  CHECK(cells.omega[1][1] == doctest::Approx(0.3 * 0.9));
  CHECK(cells.omega[0][0] == doctest::Approx(0.7 * 0.8));
  double total = 0.0;
  for (int a = 0; a < 2; ++a)
    for (int t = 0; t < 2; ++t) total += cells.omega[a][t];
  CHECK(total == doctest::Approx(1.0));
}

namespace {
ExperimentConfig tiny_experiment() {
  ExperimentConfig cfg;
  cfg.dgp = DgpKind::A;
  cfg.sweep_values = {0.2};
  cfg.n = 80;
  cfg.d = 4;
  cfg.mode = NonAdherenceMode::TwoSided;
  cfg.learners = {LearnerKind::TLearnerSbd, LearnerKind::TLearnerCfd};
  cfg.replications = 2;
  cfg.base_seed = 5;
  cfg.hidden_width = 6;
  cfg.head_width = 3;
  cfg.train.learning_rate = 1e-2;
  cfg.train.max_epochs = 15;
  cfg.train.l2_grid = {1e-4};
  return cfg;
}
}  // namespace

TEST_CASE("run_experiment produces a deterministic, fully populated table") {
  const ExperimentConfig cfg = tiny_experiment();
  const ExperimentResult r1 = run_experiment(cfg);
  const ExperimentResult r2 = run_experiment(cfg);
  REQUIRE(r1.cells.size() == 4);  // 1 sweep x 2 learners x 2 replications
  REQUIRE(r2.cells.size() == 4);
  for (std::size_t i = 0; i < r1.cells.size(); ++i) {
    CHECK(r1.cells[i].failed == r2.cells[i].failed);
    if (!r1.cells[i].failed) CHECK(r1.cells[i].pehe == r2.cells[i].pehe);
  }
  REQUIRE(r1.meta.size() == 2);
  CHECK(r1.summary.size() == 1);
  CHECK(r1.summary[0].size() == 2);
  for (const auto& per_learner : r1.summary[0])
    CHECK(per_learner.values.size() + per_learner.failed == 2);
}

TEST_CASE("run_experiment records learner failures instead of aborting") {
  ExperimentConfig cfg = tiny_experiment();
  cfg.mode = NonAdherenceMode::OneSided;
  cfg.sweep_values = {0.0};  // perfect adherence: cell (0,1) is empty
  cfg.learners = {LearnerKind::TLearnerCfd, LearnerKind::TLearnerSbd};
  const ExperimentResult r = run_experiment(cfg);
  for (const CellResult& c : r.cells) {
    if (c.learner == LearnerKind::TLearnerCfd) {
      CHECK(c.failed);
      CHECK(!c.failure.empty());
    } else {
      CHECK_FALSE(c.failed);
    }
  }
}

TEST_CASE("verify_bounds samples populations above the margin and reports containment") {
  BoundsCampaignConfig cfg;
  cfg.num_configs = 3;
  cfg.n = 300;
  cfg.replicates = 800;
  cfg.seed = 9;
  cfg.mode = NonAdherenceMode::TwoSided;
  const BoundsReport report = verify_bounds(cfg);
  REQUIRE(report.configs.size() == 3);
  for (const BoundsConfigReport& r : report.configs) {
    CHECK(r.pop.positivity_margin(cfg.mode) >= cfg.min_margin);
    CHECK(r.rho >= cfg.min_margin);
    CHECK(r.sbd_lower_bound > 0.0);
    CHECK(r.cfd_upper_bound > 0.0);
    CHECK(r.sbd_closed_form_nvar > r.sbd_lower_bound);
  }
  const BoundsReport again = verify_bounds(cfg);
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(report.configs[i].mc.nvar_sbd == again.configs[i].mc.nvar_sbd);
}

TEST_CASE("verify_bounds one-sided campaign respects the one-sided population form") {
  BoundsCampaignConfig cfg;
  cfg.num_configs = 2;
  cfg.n = 300;
  cfg.replicates = 500;
  cfg.seed = 10;
  cfg.mode = NonAdherenceMode::OneSided;
  const BoundsReport report = verify_bounds(cfg);
  for (const BoundsConfigReport& r : report.configs) CHECK(r.pop.p_a_given_t[0] == 0.0);
}

TEST_SUITE_END();
