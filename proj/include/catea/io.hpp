#pragma once

// File formats: JSON configs mirroring the config types field-for-field,
// result serialization for the Monte Carlo and bound-verification reports,
// plot-ready CSV for experiment tables and bound grids, network checkpoints,
// and training-history CSV.

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "catea/core.hpp"
#include "catea/dgp.hpp"
#include "catea/harness.hpp"
#include "catea/learners.hpp"
#include "catea/net.hpp"
#include "catea/stratum.hpp"
#include "catea/theory.hpp"

namespace catea::io {

using nlohmann::json;

inline json read_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw ConfigError("invalid JSON in " + path + ": " + e.what());
  }
  return j;
}

inline void write_json_file(const json& j, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open for writing: " + path);
  f << j.dump(2) << '\n';
}

namespace detail {
template <class T>
T get_or(const json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("config field '" + key + "': " + e.what());
  }
}

template <class T>
T require(const json& j, const std::string& key) {
  if (!j.contains(key)) throw ConfigError("missing config field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("config field '" + key + "': " + e.what());
  }
}
}  // namespace detail

// --------------------------------------------------------------------------
// Synthetic dataset configs and sidecars
// --------------------------------------------------------------------------

inline dgp::SyntheticConfig synthetic_config_from_json(const json& j) {
  dgp::SyntheticConfig cfg;
  cfg.n = detail::get_or<std::size_t>(j, "n", cfg.n);
  cfg.d = detail::get_or<std::size_t>(j, "d", cfg.d);
  cfg.weight_amplitude = detail::get_or<double>(j, "weight_amplitude", cfg.weight_amplitude);
  cfg.gamma = detail::get_or<double>(j, "gamma", cfg.gamma);
  cfg.eta = detail::get_or<double>(j, "eta", cfg.eta);
  cfg.mode = mode_from_string(detail::get_or<std::string>(j, "mode", "one_sided"));
  cfg.seed = detail::get_or<std::uint64_t>(j, "seed", cfg.seed);
  cfg.validate();
  return cfg;
}

inline json synthetic_config_to_json(const dgp::SyntheticConfig& cfg) {
  return json{{"n", cfg.n},
              {"d", cfg.d},
              {"weight_amplitude", cfg.weight_amplitude},
              {"gamma", cfg.gamma},
              {"eta", cfg.eta},
              {"mode", to_string(cfg.mode)},
              {"seed", cfg.seed}};
}

// Companion metadata written next to a generated CSV so the draw can be
// replayed exactly.
inline json dataset_sidecar_json(const dgp::SyntheticConfig& cfg,
                                 const dgp::DatasetWeights& weights,
                                 const std::string& dgp_name) {
  json j;
  j["dgp"] = dgp_name;
  j["config"] = synthetic_config_to_json(cfg);
  j["weights"] = {{"w", weights.w},
                  {"w_t0", weights.w_t0},
                  {"w_t1", weights.w_t1},
                  {"w_a0", weights.w_a0},
                  {"w_a1", weights.w_a1}};
  return j;
}

// --------------------------------------------------------------------------
// Stratum populations and Monte Carlo results
// --------------------------------------------------------------------------

inline stratum::OutcomeDist outcome_dist_from_json(const json& j) {
  const std::string kind = detail::require<std::string>(j, "kind");
  if (kind == "bernoulli")
    return stratum::OutcomeDist::bernoulli(detail::require<double>(j, "p"));
  if (kind == "gaussian")
    return stratum::OutcomeDist::gaussian(detail::require<double>(j, "mu"),
                                          detail::require<double>(j, "sigma2"));
  throw ConfigError("unknown outcome distribution kind: " + kind);
}

inline json outcome_dist_to_json(const stratum::OutcomeDist& d) {
  if (d.kind == stratum::OutcomeDist::Kind::Bernoulli)
    return json{{"kind", "bernoulli"}, {"p", d.p}};
  return json{{"kind", "gaussian"}, {"mu", d.mu}, {"sigma2", d.sigma2}};
}

inline stratum::TruePopulation population_from_json(const json& j) {
  stratum::TruePopulation pop;
  pop.pi = detail::require<double>(j, "pi");
  const auto pa = detail::require<std::vector<double>>(j, "p_a_given_t");
  if (pa.size() != 2) throw ConfigError("p_a_given_t must have two entries");
  pop.p_a_given_t[0] = pa[0];
  pop.p_a_given_t[1] = pa[1];
  const json& dists = j.contains("outcome_dist") ? j.at("outcome_dist") : json();
  if (!dists.is_array() || dists.size() != 2)
    throw ConfigError("outcome_dist must be an array of two distributions");
  pop.outcome_dist[0] = outcome_dist_from_json(dists[0]);
  pop.outcome_dist[1] = outcome_dist_from_json(dists[1]);
  return pop;
}

inline json population_to_json(const stratum::TruePopulation& pop) {
  return json{{"pi", pop.pi},
              {"p_a_given_t", {pop.p_a_given_t[0], pop.p_a_given_t[1]}},
              {"outcome_dist",
               {outcome_dist_to_json(pop.outcome_dist[0]),
                outcome_dist_to_json(pop.outcome_dist[1])}}};
}

struct MonteCarloRun {
  stratum::TruePopulation pop;
  NonAdherenceMode mode = NonAdherenceMode::TwoSided;
  std::size_t n = 2000;
  std::size_t replicates = 20000;
  std::uint64_t seed = 0;
  unsigned num_threads = 0;
};

inline MonteCarloRun monte_carlo_run_from_json(const json& j) {
  MonteCarloRun run;
  if (!j.contains("pop")) throw ConfigError("missing config field 'pop'");
  run.pop = population_from_json(j.at("pop"));
  run.mode = mode_from_string(detail::get_or<std::string>(j, "mode", "two_sided"));
  run.n = detail::get_or<std::size_t>(j, "n", run.n);
  run.replicates = detail::get_or<std::size_t>(j, "replicates", run.replicates);
  run.seed = detail::get_or<std::uint64_t>(j, "seed", run.seed);
  run.num_threads = detail::get_or<unsigned>(j, "num_threads", 0);
  return run;
}

inline json monte_carlo_result_json(const MonteCarloRun& run,
                                    const stratum::MonteCarloResult& r) {
  return json{{"mean_sbd", r.mean_sbd},
              {"mean_cfd", r.mean_cfd},
              {"nvar_sbd", r.nvar_sbd},
              {"nvar_cfd", r.nvar_cfd},
              {"reject_count", r.reject_count},
              {"kept_count", r.kept_count},
              {"se_mean_sbd", r.se_mean_sbd},
              {"se_mean_cfd", r.se_mean_cfd},
              {"se_nvar_sbd", r.se_nvar_sbd},
              {"se_nvar_cfd", r.se_nvar_cfd},
              {"pop", population_to_json(run.pop)},
              {"mode", to_string(run.mode)},
              {"n", run.n},
              {"replicates", run.replicates},
              {"seed", run.seed}};
}

// --------------------------------------------------------------------------
// Bound grid CSV
// --------------------------------------------------------------------------

inline theory::GridConfig grid_config_from_json(const json& j) {
  theory::GridConfig cfg;
  cfg.rho = detail::get_or<double>(j, "rho", cfg.rho);
  cfg.e_y0_values = detail::get_or<std::vector<double>>(j, "e_y0_values", cfg.e_y0_values);
  cfg.e_a0 = detail::get_or<double>(j, "e_a0", cfg.e_a0);
  cfg.mode = mode_from_string(detail::get_or<std::string>(j, "mode", "one_sided"));
  auto axis = [&](const char* key, theory::AxisSpec fallback) {
    if (!j.contains(key)) return fallback;
    const json& a = j.at(key);
    theory::AxisSpec spec;
    spec.min = detail::get_or<double>(a, "min", fallback.min);
    spec.max = detail::get_or<double>(a, "max", fallback.max);
    spec.steps = detail::get_or<std::size_t>(a, "steps", fallback.steps);
    return spec;
  };
  cfg.delta_a = axis("delta_a", cfg.delta_a);
  cfg.delta_y = axis("delta_y", cfg.delta_y);
  return cfg;
}

inline void write_grid_csv(const std::vector<theory::GridCell>& grid, std::ostream& out) {
  out << "e_y0,delta_a,delta_y,bound,feasible\n";
  for (const theory::GridCell& c : grid) {
    out << catea::detail::format_g17(c.e_y0) << ',' << catea::detail::format_g17(c.delta_a)
        << ',' << catea::detail::format_g17(c.delta_y) << ',';
    if (c.feasible) out << catea::detail::format_g17(c.bound);
    out << ',' << (c.feasible ? 1 : 0) << '\n';
  }
}

inline void write_grid_csv(const std::vector<theory::GridCell>& grid,
                           const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open for writing: " + path);
  write_grid_csv(grid, f);
}

// --------------------------------------------------------------------------
// Experiments
// --------------------------------------------------------------------------

inline net::TrainConfig train_config_from_json(const json& j) {
  net::TrainConfig cfg;
  cfg.learning_rate = detail::get_or<double>(j, "learning_rate", cfg.learning_rate);
  cfg.max_epochs = detail::get_or<std::size_t>(j, "max_epochs", cfg.max_epochs);
  cfg.l2_grid = detail::get_or<std::vector<double>>(j, "l2_grid", cfg.l2_grid);
  cfg.patience = detail::get_or<std::size_t>(j, "patience", cfg.patience);
  cfg.lr_decay_factor = detail::get_or<double>(j, "lr_decay_factor", cfg.lr_decay_factor);
  cfg.lr_decay_patience =
      detail::get_or<std::size_t>(j, "lr_decay_patience", cfg.lr_decay_patience);
  cfg.batch_size = detail::get_or<std::size_t>(j, "batch_size", cfg.batch_size);
  cfg.seed = detail::get_or<std::uint64_t>(j, "seed", cfg.seed);
  cfg.validate();
  return cfg;
}

inline harness::ExperimentConfig experiment_config_from_json(const json& j) {
  harness::ExperimentConfig cfg;
  const std::string dgp = detail::get_or<std::string>(j, "dgp", "a");
  if (dgp == "a" || dgp == "A")
    cfg.dgp = harness::DgpKind::A;
  else if (dgp == "b" || dgp == "B")
    cfg.dgp = harness::DgpKind::B;
  else
    throw ConfigError("dgp must be 'a' or 'b'");
  cfg.sweep_values = detail::get_or<std::vector<double>>(j, "sweep_values",
                                                         cfg.sweep_values);
  cfg.n = detail::get_or<std::size_t>(j, "n", cfg.n);
  cfg.d = detail::get_or<std::size_t>(j, "d", cfg.d);
  cfg.weight_amplitude = detail::get_or<double>(j, "weight_amplitude", cfg.weight_amplitude);
  cfg.mode = mode_from_string(detail::get_or<std::string>(j, "mode", "one_sided"));
  if (j.contains("learners")) {
    cfg.learners.clear();
    for (const auto& name : detail::require<std::vector<std::string>>(j, "learners"))
      cfg.learners.push_back(harness::learner_from_string(name));
  }
  cfg.replications = detail::get_or<std::size_t>(j, "replications", cfg.replications);
  cfg.test_fraction = detail::get_or<double>(j, "test_fraction", cfg.test_fraction);
  cfg.val_fraction = detail::get_or<double>(j, "val_fraction", cfg.val_fraction);
  cfg.base_seed = detail::get_or<std::uint64_t>(j, "base_seed", cfg.base_seed);
  cfg.hidden_width = detail::get_or<std::size_t>(j, "hidden_width", cfg.hidden_width);
  cfg.head_width = detail::get_or<std::size_t>(j, "head_width", cfg.head_width);
  cfg.num_threads = detail::get_or<unsigned>(j, "num_threads", 0);
  if (j.contains("train")) cfg.train = train_config_from_json(j.at("train"));
  cfg.validate();
  return cfg;
}

inline void write_experiment_results_csv(const harness::ExperimentResult& result,
                                         std::ostream& out) {
  out << "sweep_value,learner,replication,pehe\n";
  for (const harness::CellResult& c : result.cells) {
    out << catea::detail::format_g17(c.sweep_value) << ',' << to_string(c.learner) << ','
        << c.replication << ',';
    if (!c.failed) out << catea::detail::format_g17(c.pehe);
    out << '\n';
  }
}

inline void write_experiment_summary_csv(const harness::ExperimentConfig& cfg,
                                         const harness::ExperimentResult& result,
                                         std::ostream& out) {
  out << "sweep_value,learner,median,q25,q75\n";
  for (std::size_t si = 0; si < cfg.sweep_values.size(); ++si)
    for (std::size_t li = 0; li < cfg.learners.size(); ++li) {
      const harness::PeheResult& r = result.summary[si][li];
      out << catea::detail::format_g17(cfg.sweep_values[si]) << ','
          << to_string(cfg.learners[li]) << ',';
      if (!r.values.empty())
        out << catea::detail::format_g17(r.median) << ','
            << catea::detail::format_g17(r.q25) << ','
            << catea::detail::format_g17(r.q75);
      else
        out << ",,";
      out << '\n';
    }
}

// Empirical effect decompositions per replication, reported because the
// figures of interest put E[Delta_A] / E[Delta_Y] on the x axis rather than
// the sweep parameter itself.
inline void write_experiment_meta_csv(const harness::ExperimentResult& result,
                                      std::ostream& out) {
  out << "sweep_value,replication,mean_delta_a,mean_delta_y\n";
  for (const harness::ReplicationMeta& m : result.meta)
    out << catea::detail::format_g17(m.sweep_value) << ',' << m.replication << ','
        << catea::detail::format_g17(m.mean_delta_a) << ','
        << catea::detail::format_g17(m.mean_delta_y) << '\n';
}

// --------------------------------------------------------------------------
// Bound verification report
// --------------------------------------------------------------------------

inline harness::BoundsCampaignConfig bounds_campaign_from_json(const json& j) {
  harness::BoundsCampaignConfig cfg;
  cfg.num_configs = detail::get_or<std::size_t>(j, "num_configs", cfg.num_configs);
  cfg.n = detail::get_or<std::size_t>(j, "n", cfg.n);
  cfg.replicates = detail::get_or<std::size_t>(j, "replicates", cfg.replicates);
  cfg.seed = detail::get_or<std::uint64_t>(j, "seed", cfg.seed);
  cfg.mode = mode_from_string(detail::get_or<std::string>(j, "mode", "two_sided"));
  cfg.min_margin = detail::get_or<double>(j, "min_margin", cfg.min_margin);
  cfg.num_threads = detail::get_or<unsigned>(j, "num_threads", 0);
  return cfg;
}

inline json bounds_report_json(const harness::BoundsCampaignConfig& cfg,
                               const harness::BoundsReport& report) {
  json configs = json::array();
  for (const harness::BoundsConfigReport& r : report.configs) {
    configs.push_back(json{{"pop", population_to_json(r.pop)},
                           {"rho", r.rho},
                           {"sbd_lower_bound", r.sbd_lower_bound},
                           {"cfd_upper_bound", r.cfd_upper_bound},
                           {"sbd_closed_form_nvar", r.sbd_closed_form_nvar},
                           {"cfd_asymptotic_nvar", r.cfd_asymptotic_nvar},
                           {"nvar_sbd", r.mc.nvar_sbd},
                           {"nvar_cfd", r.mc.nvar_cfd},
                           {"se_nvar_sbd", r.mc.se_nvar_sbd},
                           {"se_nvar_cfd", r.mc.se_nvar_cfd},
                           {"reject_count", r.mc.reject_count},
                           {"sbd_violation", r.sbd_violation},
                           {"cfd_violation", r.cfd_violation}});
  }
  return json{{"num_configs", cfg.num_configs},
              {"n", cfg.n},
              {"replicates", cfg.replicates},
              {"seed", cfg.seed},
              {"mode", to_string(cfg.mode)},
              {"min_margin", cfg.min_margin},
              {"violation_count", report.violation_count},
              {"configs", configs}};
}

// --------------------------------------------------------------------------
// Network checkpoints and training history
// --------------------------------------------------------------------------

inline const char* to_string(net::Activation a) {
  switch (a) {
    case net::Activation::Elu:
      return "elu";
    case net::Activation::Identity:
      return "identity";
    case net::Activation::Sigmoid:
      return "sigmoid";
  }
  return "?";
}

inline net::Activation activation_from_string(const std::string& s) {
  if (s == "elu") return net::Activation::Elu;
  if (s == "identity") return net::Activation::Identity;
  if (s == "sigmoid") return net::Activation::Sigmoid;
  throw ConfigError("unknown activation: " + s);
}

// Layer shapes plus row-major weights; enough to rebuild the network exactly.
inline json mlp_to_json(const net::Mlp& mlp) {
  json layers = json::array();
  for (const net::Layer& l : mlp.layers())
    layers.push_back(json{{"in", l.w.rows},
                          {"out", l.w.cols},
                          {"activation", to_string(l.act)},
                          {"w", l.w.a},
                          {"b", l.b}});
  return json{{"layers", layers}};
}

inline net::Mlp mlp_from_json(const json& j) {
  std::vector<net::LayerSpec> specs;
  for (const json& l : j.at("layers"))
    specs.push_back({detail::require<std::size_t>(l, "in"),
                     detail::require<std::size_t>(l, "out"),
                     activation_from_string(detail::require<std::string>(l, "activation"))});
  SplitMix64 rng(0);
  net::Mlp mlp = net::Mlp::build(specs, rng);
  std::size_t k = 0;
  for (const json& l : j.at("layers")) {
    net::Layer& layer = mlp.layers()[k++];
    const auto w = detail::require<std::vector<double>>(l, "w");
    const auto b = detail::require<std::vector<double>>(l, "b");
    if (w.size() != layer.w.a.size() || b.size() != layer.b.size())
      throw ConfigError("checkpoint tensor size mismatch");
    layer.w.a = w;
    layer.b = b;
  }
  return mlp;
}

inline json scalar_net_to_json(const net::ScalarNet& n) {
  return json{{"loss", n.loss == net::LossKind::SquaredError ? "squared_error"
                                                             : "sigmoid_cross_entropy"},
              {"mlp", mlp_to_json(n.mlp)}};
}

inline net::ScalarNet scalar_net_from_json(const json& j) {
  net::ScalarNet n;
  n.loss = detail::require<std::string>(j, "loss") == "squared_error"
               ? net::LossKind::SquaredError
               : net::LossKind::SigmoidCrossEntropy;
  n.mlp = mlp_from_json(j.at("mlp"));
  return n;
}

inline void write_history_csv(const std::vector<net::HistoryRow>& history,
                              std::ostream& out) {
  out << "epoch,train_loss,val_loss,lr\n";
  for (const net::HistoryRow& h : history)
    out << h.epoch << ',' << catea::detail::format_g17(h.train_loss) << ','
        << catea::detail::format_g17(h.val_loss) << ',' << catea::detail::format_g17(h.lr)
        << '\n';
}

// --------------------------------------------------------------------------
// Fitted learner checkpoints (manifest naming architecture, mode, lambda)
// --------------------------------------------------------------------------

inline json learner_to_json(const learners::TLearnerSbd& l) {
  return json{{"architecture", l.name()},
              {"binary", l.is_binary()},
              {"l2", l.selected_l2()},
              {"nets",
               {{"outcome_t0", scalar_net_to_json(l.outcome_net(0))},
                {"outcome_t1", scalar_net_to_json(l.outcome_net(1))}}}};
}

inline learners::TLearnerSbd tlearner_sbd_from_json(const json& j) {
  learners::TLearnerSbd l;
  l.restore(scalar_net_from_json(j.at("nets").at("outcome_t0")),
            scalar_net_from_json(j.at("nets").at("outcome_t1")),
            detail::require<bool>(j, "binary"), detail::require<double>(j, "l2"));
  return l;
}

inline json learner_to_json(const learners::TLearnerCfd& l) {
  const bool one_sided = l.mode() == NonAdherenceMode::OneSided;
  json nets{{"propensity", scalar_net_to_json(l.propensity_net())},
            {"intake_t1", scalar_net_to_json(l.intake_net(1))}};
  if (!one_sided) nets["intake_t0"] = scalar_net_to_json(l.intake_net(0));
  for (int a = 0; a < 2; ++a)
    for (int t = 0; t < 2; ++t) {
      if (one_sided && a == 1 && t == 0) continue;
      nets["outcome_a" + std::to_string(a) + "_t" + std::to_string(t)] =
          scalar_net_to_json(l.outcome_net(a, t));
    }
  return json{{"architecture", l.name()},
              {"mode", to_string(l.mode())},
              {"binary", l.is_binary()},
              {"l2", l.selected_l2()},
              {"nets", nets}};
}

inline learners::TLearnerCfd tlearner_cfd_from_json(const json& j) {
  learners::TLearnerCfd::Parts parts;
  parts.mode = mode_from_string(detail::require<std::string>(j, "mode"));
  parts.binary = detail::require<bool>(j, "binary");
  parts.l2 = detail::require<double>(j, "l2");
  const json& nets = j.at("nets");
  const bool one_sided = parts.mode == NonAdherenceMode::OneSided;
  parts.propensity = scalar_net_from_json(nets.at("propensity"));
  parts.intake[1] = scalar_net_from_json(nets.at("intake_t1"));
  if (!one_sided) parts.intake[0] = scalar_net_from_json(nets.at("intake_t0"));
  for (int a = 0; a < 2; ++a)
    for (int t = 0; t < 2; ++t) {
      if (one_sided && a == 1 && t == 0) continue;
      parts.outcome[a][t] = scalar_net_from_json(
          nets.at("outcome_a" + std::to_string(a) + "_t" + std::to_string(t)));
    }
  learners::TLearnerCfd l;
  l.restore(std::move(parts));
  return l;
}

inline json learner_to_json(const learners::LobsterNet& l) {
  const learners::LobsterParams& p = l.params();
  return json{{"architecture", l.name()},
              {"mode", to_string(l.mode())},
              {"binary", l.is_binary()},
              {"l2", l.selected_l2()},
              {"alpha", p.alpha},
              {"beta", p.beta},
              {"nets",
               {{"omega", mlp_to_json(p.omega)},
                {"f_t", mlp_to_json(p.f_t)},
                {"z_t0", mlp_to_json(p.z[0])},
                {"z_t1", mlp_to_json(p.z[1])},
                {"f_a0", mlp_to_json(p.f_a[0])},
                {"f_a1", mlp_to_json(p.f_a[1])},
                {"f_y0", mlp_to_json(p.f_y[0])},
                {"f_y1", mlp_to_json(p.f_y[1])}}}};
}

inline learners::LobsterNet lobsternet_from_json(const json& j) {
  learners::LobsterParams p;
  const json& nets = j.at("nets");
  p.omega = mlp_from_json(nets.at("omega"));
  p.f_t = mlp_from_json(nets.at("f_t"));
  p.z[0] = mlp_from_json(nets.at("z_t0"));
  p.z[1] = mlp_from_json(nets.at("z_t1"));
  p.f_a[0] = mlp_from_json(nets.at("f_a0"));
  p.f_a[1] = mlp_from_json(nets.at("f_a1"));
  p.f_y[0] = mlp_from_json(nets.at("f_y0"));
  p.f_y[1] = mlp_from_json(nets.at("f_y1"));
  p.alpha = detail::require<double>(j, "alpha");
  p.beta = detail::require<double>(j, "beta");
  const bool binary = detail::require<bool>(j, "binary");
  p.outcome_loss =
      binary ? net::LossKind::SigmoidCrossEntropy : net::LossKind::SquaredError;
  learners::LobsterNet l;
  l.restore(std::move(p), mode_from_string(detail::require<std::string>(j, "mode")),
            binary, detail::require<double>(j, "l2"));
  return l;
}

}  // namespace catea::io
