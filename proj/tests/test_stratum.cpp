#include "catea/stratum.hpp"

#include "catea/harness.hpp"
#include "doctest.h"

using namespace catea;
using namespace catea::stratum;

TEST_SUITE_BEGIN("stratum");

namespace {
StratumData make_stratum(std::vector<StratumRecord> records,
                         NonAdherenceMode mode = NonAdherenceMode::TwoSided) {
  StratumData sd;
  sd.records = std::move(records);
  sd.mode = mode;
  return sd;
}
}  // namespace

TEST_CASE("mle_summary counts a hand-checkable stratum") {
  // records are (t, a, y)
  const StratumData sd =
      make_stratum({{0, 0, 0.0}, {0, 0, 1.0}, {1, 1, 1.0}, {1, 1, 1.0}});
  const StratumSummary s = mle_summary(sd);
  CHECK(s.n == 4);
  CHECK(s.pi_hat == doctest::Approx(0.5));
  CHECK(s.a_mean[1] == doctest::Approx(1.0));
  CHECK(s.a_mean[0] == doctest::Approx(0.0));
  CHECK(s.y_mean_at[0][0].value() == doctest::Approx(0.5));
  CHECK(s.y_mean_at[1][1].value() == doctest::Approx(1.0));
  CHECK(s.omega_hat[1][1] == doctest::Approx(0.5));
  CHECK(s.omega_hat[0][0] == doctest::Approx(0.5));
}

TEST_CASE("mle_summary marks empty cells as undefined") {
  const StratumData sd = make_stratum({{0, 0, 0.0}, {1, 1, 1.0}});
  const StratumSummary s = mle_summary(sd);
  CHECK(s.omega_hat[0][0] == doctest::Approx(0.5));
  CHECK(s.omega_hat[1][1] == doctest::Approx(0.5));
  CHECK(s.omega_hat[0][1] == 0.0);
  CHECK(s.omega_hat[1][0] == 0.0);
  CHECK_FALSE(s.y_mean_at[0][1].has_value());
  CHECK_FALSE(s.y_mean_at[1][0].has_value());
}

TEST_CASE("mle_summary constant outcomes give constant means") {
  const StratumData sd =
      make_stratum({{0, 0, 3.0}, {0, 1, 3.0}, {1, 0, 3.0}, {1, 1, 3.0}});
  const StratumSummary s = mle_summary(sd);
  for (int t = 0; t < 2; ++t) CHECK(s.y_mean_t[t] == doctest::Approx(3.0));
  for (int a = 0; a < 2; ++a)
    for (int t = 0; t < 2; ++t) CHECK(s.y_mean_at[a][t].value() == doctest::Approx(3.0));
}

TEST_CASE("mle_summary cell frequencies are integer multiples of 1/n") {
  SplitMix64 rng(41);
  for (int rep = 0; rep < 20; ++rep) {
    StratumData sd;
    const std::size_t n = 10 + rng.next_u64() % 50;
    bool seen[2] = {false, false};
    for (std::size_t i = 0; i < n; ++i) {
      const int t = rng.next_bernoulli(0.5);
      seen[t] = true;
      sd.records.push_back({t, static_cast<int>(rng.next_bernoulli(0.5)), rng.next_unit()});
    }
    if (!seen[0] || !seen[1]) continue;
    const StratumSummary s = mle_summary(sd);
    double omega_total = 0.0;
    std::size_t count_total = 0;
    for (int a = 0; a < 2; ++a)
      for (int t = 0; t < 2; ++t) {
        omega_total += s.omega_hat[a][t];
        count_total += s.cell_count[a][t];
        const double scaled = s.omega_hat[a][t] * static_cast<double>(n);
        CHECK(scaled == doctest::Approx(std::round(scaled)));
      }
    CHECK(count_total == n);
    CHECK(omega_total == doctest::Approx(1.0));
    CHECK(s.pi_hat == doctest::Approx(s.omega_hat[0][1] + s.omega_hat[1][1]));
  }
}

TEST_CASE("mle_summary error paths") {
  CHECK_THROWS_AS(mle_summary(make_stratum({})), EmptyStratum);
  CHECK_THROWS_AS(mle_summary(make_stratum({{1, 1, 0.0}, {1, 0, 1.0}})),
                  MissingAssignmentArm);
}

TEST_CASE("sbd_plugin hand counts") {
  CHECK(sbd_plugin(make_stratum({{0, 0, 0.0}, {0, 0, 1.0}, {1, 1, 1.0}, {1, 1, 1.0}}))
            .value == doctest::Approx(0.5));
  CHECK(sbd_plugin(make_stratum({{0, 0, 0.0}, {1, 1, 1.0}})).value == doctest::Approx(1.0));
}

TEST_CASE("sbd_plugin equals the adjustment formula applied to the summary") {
  SplitMix64 rng(43);
  for (int rep = 0; rep < 50; ++rep) {
    StratumData sd;
    sd.records.push_back({0, 0, rng.next_unit()});
    sd.records.push_back({1, 1, rng.next_unit()});
    for (int i = 0; i < 30; ++i)
      sd.records.push_back({static_cast<int>(rng.next_bernoulli(0.5)),
                            static_cast<int>(rng.next_bernoulli(0.5)), rng.next_unit()});
    const StratumSummary s = mle_summary(sd);
    CHECK(sbd_plugin(sd).value ==
          adjustment::sbd_catea(s.y_mean_t[1], s.y_mean_t[0]).value);
  }
}

TEST_CASE("cfd_plugin one-sided hand count") {
  // pi=0.5, A(1)=0.5, Y(1,1)=1, Y(0,0)=0, Y(0,1)=0 -> [(1)(0.5)+(1)(0.5)] * 0.5
  const StratumData sd = make_stratum(
      {{0, 0, 0.0}, {0, 0, 0.0}, {1, 0, 0.0}, {1, 1, 1.0}}, NonAdherenceMode::OneSided);
  CHECK(cfd_plugin(sd).value == doctest::Approx(0.5));
}

TEST_CASE("cfd_plugin two-sided constant outcomes give zero") {
  const StratumData sd =
      make_stratum({{0, 0, 0.7}, {0, 1, 0.7}, {1, 0, 0.7}, {1, 1, 0.7}});
  CHECK(cfd_plugin(sd).value == doctest::Approx(0.0));
}

TEST_CASE("cfd_plugin reports the missing cell") {
  // One-sided with every treated individual adhering: cell (0,1) is empty.
  const StratumData sd = make_stratum(
      {{0, 0, 0.5}, {0, 0, 1.0}, {1, 1, 1.0}, {1, 1, 1.0}}, NonAdherenceMode::OneSided);
  try {
    cfd_plugin(sd);
    FAIL("expected EmptyCell");
  } catch (const EmptyCell& e) {
    CHECK(e.a == 0);
    CHECK(e.t == 1);
  }
}

TEST_CASE("monte_carlo_variance is bitwise deterministic and thread-invariant") {
  TruePopulation pop;
  pop.pi = 0.4;
  pop.p_a_given_t[0] = 0.2;
  pop.p_a_given_t[1] = 0.8;
  pop.outcome_dist[0] = OutcomeDist::bernoulli(0.3);
  pop.outcome_dist[1] = OutcomeDist::bernoulli(0.7);
  const auto r1 = monte_carlo_variance(pop, NonAdherenceMode::TwoSided, 200, 500, 99, 1);
  const auto r2 = monte_carlo_variance(pop, NonAdherenceMode::TwoSided, 200, 500, 99, 2);
  CHECK(r1.mean_sbd == r2.mean_sbd);
  CHECK(r1.mean_cfd == r2.mean_cfd);
  CHECK(r1.nvar_sbd == r2.nvar_sbd);
  CHECK(r1.nvar_cfd == r2.nvar_cfd);
  CHECK(r1.reject_count == r2.reject_count);
}

TEST_CASE("monte_carlo_variance null effect centers both estimators at zero") {
  TruePopulation pop;
  pop.pi = 0.5;
  pop.p_a_given_t[0] = 0.3;
  pop.p_a_given_t[1] = 0.7;
  pop.outcome_dist[0] = OutcomeDist::bernoulli(0.5);
  pop.outcome_dist[1] = OutcomeDist::bernoulli(0.5);
  const auto r = monte_carlo_variance(pop, NonAdherenceMode::TwoSided, 400, 4000, 7);
  CHECK(std::abs(r.mean_sbd) < 4.0 * r.se_mean_sbd + 1e-12);
  CHECK(std::abs(r.mean_cfd) < 4.0 * r.se_mean_cfd + 1e-12);
}

TEST_CASE("monte_carlo_variance recovers a strong-intake effect") {
  // Both means sit at the brute-force expectation Delta_A * Delta_Y. A fully
  // deterministic intake (P(a|t=1)=1) would leave the (0,1) cell empty in
  // every replicate, so the strongest admissible population is used instead:
  // P(a|t=1)=0.9, outcomes Bern(0.8)/Bern(0.2), effect 0.9 * 0.6 = 0.54.
  TruePopulation pop;
  pop.pi = 0.5;
  pop.p_a_given_t[0] = 0.0;
  pop.p_a_given_t[1] = 0.9;
  pop.outcome_dist[0] = OutcomeDist::bernoulli(0.2);
  pop.outcome_dist[1] = OutcomeDist::bernoulli(0.8);
  const auto r = monte_carlo_variance(pop, NonAdherenceMode::OneSided, 400, 4000, 11);
  CHECK(r.reject_count == 0);
  CHECK(std::abs(r.mean_sbd - 0.54) < 4.0 * r.se_mean_sbd);
  CHECK(std::abs(r.mean_cfd - 0.54) < 4.0 * r.se_mean_cfd);
}

TEST_CASE("monte_carlo_variance matches the closed-form SBD variance") {
  TruePopulation pop;
  pop.pi = 0.5;
  pop.p_a_given_t[0] = 0.25;
  pop.p_a_given_t[1] = 0.75;
  pop.outcome_dist[0] = OutcomeDist::bernoulli(0.3);
  pop.outcome_dist[1] = OutcomeDist::bernoulli(0.8);
  const auto mode = NonAdherenceMode::TwoSided;
  const auto vp = harness::variance_params_from_population(pop, mode);
  const auto cells = harness::cell_probabilities_from_population(pop);
  const std::size_t n = 500;
  const auto r = monte_carlo_variance(pop, mode, n, 6000, 123);
  const double closed = static_cast<double>(n) * theory::sbd_variance_closed_form(vp, n);
  CHECK(r.nvar_sbd == doctest::Approx(closed).epsilon(0.10));
  const double cfd_limit = theory::cfd_asymptotic_variance(vp, cells);
  CHECK(r.nvar_cfd == doctest::Approx(cfd_limit).epsilon(0.15));
}

TEST_CASE("monte_carlo_variance unbiasedness z-test") {
  TruePopulation pop;
  pop.pi = 0.4;
  pop.p_a_given_t[0] = 0.2;
  pop.p_a_given_t[1] = 0.9;
  pop.outcome_dist[0] = OutcomeDist::bernoulli(0.25);
  pop.outcome_dist[1] = OutcomeDist::bernoulli(0.75);
  const double truth = pop.true_catea();
  const auto r = monte_carlo_variance(pop, NonAdherenceMode::TwoSided, 800, 20000, 2024);
  CHECK(r.reject_count == 0);
  CHECK(std::abs(r.mean_sbd - truth) < 3.0 * r.se_mean_sbd);
  CHECK(std::abs(r.mean_cfd - truth) < 3.0 * r.se_mean_cfd);
}

TEST_CASE("monte_carlo_variance rejects degenerate populations") {
  TruePopulation pop;
  pop.pi = 0.5;
  pop.p_a_given_t[0] = 0.0;
  pop.p_a_given_t[1] = 1.0;  // cell (0,1) impossible
  CHECK_THROWS_AS(
      monte_carlo_variance(pop, NonAdherenceMode::TwoSided, 100, 10, 1),
      DegeneratePopulation);
  TruePopulation bad;
  bad.pi = 0.5;
  bad.p_a_given_t[0] = 0.5;  // one-sided requires zero
  bad.p_a_given_t[1] = 0.5;
  CHECK_THROWS_AS(monte_carlo_variance(bad, NonAdherenceMode::OneSided, 100, 10, 1),
                  DegeneratePopulation);
}

TEST_SUITE_END();
