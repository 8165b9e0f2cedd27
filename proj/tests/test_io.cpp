#include "catea/io.hpp"

#include <sstream>

#include "doctest.h"

using namespace catea;
using json = nlohmann::json;

TEST_SUITE_BEGIN("io");

TEST_CASE("mlp checkpoints round-trip exactly") {
  SplitMix64 rng(1);
  net::Mlp mlp = net::Mlp::build({{3, 5, net::Activation::Elu},
                                  {5, 4, net::Activation::Sigmoid},
                                  {4, 1, net::Activation::Identity}},
                                 rng);
  const json j = io::mlp_to_json(mlp);
  net::Mlp back = io::mlp_from_json(j);
  REQUIRE(back.layers().size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(back.layers()[k].w.a == mlp.layers()[k].w.a);
    CHECK(back.layers()[k].b == mlp.layers()[k].b);
    CHECK(back.layers()[k].act == mlp.layers()[k].act);
  }
  net::Matrix x(1, 3);
  x(0, 0) = 0.3;
  x(0, 1) = -1.2;
  x(0, 2) = 2.0;
  CHECK(back.forward(x)(0, 0) == mlp.forward(x)(0, 0));
}

TEST_CASE("synthetic config parsing applies defaults and validates") {
  const json j = {{"n", 50}, {"d", 4}, {"gamma", 0.25}, {"mode", "two_sided"}, {"seed", 7}};
  const dgp::SyntheticConfig cfg = io::synthetic_config_from_json(j);
  CHECK(cfg.n == 50);
  CHECK(cfg.d == 4);
  CHECK(cfg.gamma == 0.25);
  CHECK(cfg.weight_amplitude == 10.0);
  CHECK(cfg.mode == NonAdherenceMode::TwoSided);

  CHECK_THROWS_AS(io::synthetic_config_from_json(json{{"n", 0}}), ConfigError);
  CHECK_THROWS_AS(io::synthetic_config_from_json(json{{"mode", "sideways"}}), ConfigError);
  CHECK_THROWS_AS(io::synthetic_config_from_json(json{{"n", "many"}}), ConfigError);
}

TEST_CASE("population JSON round trip") {
  stratum::TruePopulation pop;
  pop.pi = 0.35;
  pop.p_a_given_t[0] = 0.1;
  pop.p_a_given_t[1] = 0.8;
  pop.outcome_dist[0] = stratum::OutcomeDist::bernoulli(0.3);
  pop.outcome_dist[1] = stratum::OutcomeDist::gaussian(1.25, 0.5);
  const stratum::TruePopulation back = io::population_from_json(io::population_to_json(pop));
  CHECK(back.pi == pop.pi);
  CHECK(back.p_a_given_t[0] == pop.p_a_given_t[0]);
  CHECK(back.p_a_given_t[1] == pop.p_a_given_t[1]);
  CHECK(back.outcome_dist[0].kind == stratum::OutcomeDist::Kind::Bernoulli);
  CHECK(back.outcome_dist[0].p == 0.3);
  CHECK(back.outcome_dist[1].kind == stratum::OutcomeDist::Kind::Gaussian);
  CHECK(back.outcome_dist[1].mu == 1.25);
  CHECK(back.outcome_dist[1].sigma2 == 0.5);
}

TEST_CASE("monte carlo result JSON echoes the run parameters") {
  io::MonteCarloRun run;
  run.pop.pi = 0.5;
  run.pop.p_a_given_t[0] = 0.2;
  run.pop.p_a_given_t[1] = 0.8;
  run.n = 123;
  run.replicates = 45;
  run.seed = 6;
  stratum::MonteCarloResult r;
  r.mean_sbd = 0.5;
  r.nvar_cfd = 1.25;
  r.reject_count = 3;
  const json j = io::monte_carlo_result_json(run, r);
  CHECK(j.at("mean_sbd") == 0.5);
  CHECK(j.at("nvar_cfd") == 1.25);
  CHECK(j.at("reject_count") == 3);
  CHECK(j.at("n") == 123);
  CHECK(j.at("replicates") == 45);
  CHECK(j.at("seed") == 6);
  CHECK(j.at("pop").at("pi") == 0.5);
  CHECK(j.at("mode") == "two_sided");
}

TEST_CASE("grid CSV leaves the bound empty on infeasible cells") {
  theory::GridConfig cfg;
  cfg.rho = 0.1;
  cfg.e_y0_values = {0.9};
  cfg.e_a0 = 0.0;
  cfg.mode = NonAdherenceMode::OneSided;
  cfg.delta_a = {0.0, 1.0, 2};
  cfg.delta_y = {0.0, 1.0, 2};
  std::stringstream ss;
  io::write_grid_csv(theory::reduction_grid(cfg), ss);
  std::string line;
  std::getline(ss, line);
  CHECK(line == "e_y0,delta_a,delta_y,bound,feasible");
  std::vector<std::string> rows;
  while (std::getline(ss, line)) rows.push_back(line);
  REQUIRE(rows.size() == 4);
  // delta_y = 1 with e_y0 = 0.9 exceeds the unit interval: infeasible rows
  // end with ",,0".
  CHECK(rows[1].substr(rows[1].size() - 3) == ",,0");
  CHECK(rows[0].back() == '1');
}

TEST_CASE("experiment CSV writers emit the documented headers") {
  harness::ExperimentConfig cfg;
  cfg.sweep_values = {0.3};
  cfg.learners = {harness::LearnerKind::TLearnerSbd};
  harness::ExperimentResult result;
  harness::CellResult cell;
  cell.sweep_value = 0.3;
  cell.learner = harness::LearnerKind::TLearnerSbd;
  cell.replication = 0;
  cell.pehe = 0.25;
  result.cells.push_back(cell);
  harness::CellResult failed = cell;
  failed.replication = 1;
  failed.failed = true;
  result.cells.push_back(failed);
  result.meta.push_back({0.3, 0, 0.5, 0.2});
  result.summary = {{harness::aggregate_pehe({0.25}, 1)}};

  std::stringstream results;
  io::write_experiment_results_csv(result, results);
  std::string line;
  std::getline(results, line);
  CHECK(line == "sweep_value,learner,replication,pehe");
  std::getline(results, line);
  CHECK(line == "0.29999999999999999,tlearner_sbd,0,0.25");
  std::getline(results, line);
  CHECK(line == "0.29999999999999999,tlearner_sbd,1,");

  std::stringstream summary;
  io::write_experiment_summary_csv(cfg, result, summary);
  std::getline(summary, line);
  CHECK(line == "sweep_value,learner,median,q25,q75");

  std::stringstream meta;
  io::write_experiment_meta_csv(result, meta);
  std::getline(meta, line);
  CHECK(line == "sweep_value,replication,mean_delta_a,mean_delta_y");
}

TEST_CASE("training history CSV") {
  std::vector<net::HistoryRow> history = {{1, 0.5, 0.6, 1e-4}, {2, 0.4, 0.55, 1e-4}};
  std::stringstream ss;
  io::write_history_csv(history, ss);
  std::string line;
  std::getline(ss, line);
  CHECK(line == "epoch,train_loss,val_loss,lr");
  std::getline(ss, line);
  CHECK(line.substr(0, 6) == "1,0.5,");
}

TEST_CASE("fitted learners round-trip through their checkpoints") {
  SplitMix64 rng(3);
  const std::vector<double> x = {0.4, -0.7, 1.1};

  SUBCASE("T-learner SBD") {
    SplitMix64 init(4);
    net::ScalarNet n0, n1;
    n0.mlp = net::Mlp::build(net::scalar_head_specs(3, 4), init);
    n0.loss = net::LossKind::SigmoidCrossEntropy;
    n1.mlp = net::Mlp::build(net::scalar_head_specs(3, 4), init);
    n1.loss = net::LossKind::SigmoidCrossEntropy;
    learners::TLearnerSbd l;
    l.restore(std::move(n0), std::move(n1), true, 1e-3);
    const learners::TLearnerSbd back = io::tlearner_sbd_from_json(io::learner_to_json(l));
    CHECK(back.predict_catea(x).value == l.predict_catea(x).value);
    CHECK(back.selected_l2() == 1e-3);
  }

  SUBCASE("T-learner CFD one-sided omits the impossible nets") {
    learners::TLearnerCfd::Parts parts;
    parts.mode = NonAdherenceMode::OneSided;
    parts.binary = true;
    parts.l2 = 5e-4;
    int stream = 10;
    auto make_net = [&] {
      SplitMix64 init(stream++);
      net::ScalarNet n;
      n.mlp = net::Mlp::build(net::scalar_head_specs(3, 4), init);
      n.loss = net::LossKind::SigmoidCrossEntropy;
      return n;
    };
    parts.propensity = make_net();
    parts.intake[1] = make_net();
    parts.outcome[0][0] = make_net();
    parts.outcome[0][1] = make_net();
    parts.outcome[1][1] = make_net();
    learners::TLearnerCfd l;
    l.restore(std::move(parts));
    const json j = io::learner_to_json(l);
    CHECK_FALSE(j.at("nets").contains("intake_t0"));
    CHECK_FALSE(j.at("nets").contains("outcome_a1_t0"));
    const learners::TLearnerCfd back = io::tlearner_cfd_from_json(j);
    CHECK(back.predict_catea(x).value == l.predict_catea(x).value);
  }

  SUBCASE("LobsterNet") {
    learners::LobsterParams p = learners::LobsterParams::build(
        3, 5, 4, net::LossKind::SigmoidCrossEntropy, 1.0, 1.0, 20);
    learners::LobsterNet l(5, 4);
    l.restore(std::move(p), NonAdherenceMode::TwoSided, true, 1e-4);
    const json j = io::learner_to_json(l);
    CHECK(j.at("architecture") == "lobsternet");
    CHECK(j.at("mode") == "two_sided");
    CHECK(j.at("l2") == 1e-4);
    const learners::LobsterNet back = io::lobsternet_from_json(j);
    CHECK(back.predict_catea(x).value == l.predict_catea(x).value);
  }
}

TEST_SUITE_END();
