// Command-line front end: dataset generation, PEHE experiments, Monte Carlo
// variance runs, bound grids, and bound-verification campaigns. Config files
// are JSON documents mirroring the library's config types field-for-field;
// --seed overrides the seed in the file. Exit codes: 0 success, 2 config
// error, 3 data error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "catea/io.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

struct CommonArgs {
  std::string config_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON config file")->required();
  cmd->add_option("--out", args.out_path, "output path")->required();
  cmd->add_option("--seed", args.seed, "override the seed in the config file");
}

int run_generate(const CommonArgs& args, const std::string& dgp_name) {
  catea::dgp::SyntheticConfig cfg =
      catea::io::synthetic_config_from_json(catea::io::read_json_file(args.config_path));
  if (args.seed) cfg.seed = *args.seed;
  const catea::dgp::GeneratedDataset gen = dgp_name == "a"
                                               ? catea::dgp::generate_dataset_a(cfg)
                                               : catea::dgp::generate_dataset_b(cfg);
  catea::write_dataset_csv(gen.dataset, args.out_path);
  catea::io::write_json_file(catea::io::dataset_sidecar_json(cfg, gen.weights, dgp_name),
                             args.out_path + ".meta.json");
  std::cout << "wrote " << gen.dataset.size() << " samples to " << args.out_path << "\n";
  return 0;
}

int run_experiment(const CommonArgs& args) {
  catea::harness::ExperimentConfig cfg =
      catea::io::experiment_config_from_json(catea::io::read_json_file(args.config_path));
  if (args.seed) cfg.base_seed = *args.seed;
  std::filesystem::create_directories(args.out_path);
  const catea::harness::ExperimentResult result = catea::harness::run_experiment(cfg);
  {
    std::ofstream f(args.out_path + "/results.csv");
    catea::io::write_experiment_results_csv(result, f);
  }
  {
    std::ofstream f(args.out_path + "/summary.csv");
    catea::io::write_experiment_summary_csv(cfg, result, f);
  }
  {
    std::ofstream f(args.out_path + "/sweep_meta.csv");
    catea::io::write_experiment_meta_csv(result, f);
  }
  std::size_t failed = 0;
  for (const auto& c : result.cells) failed += c.failed ? 1 : 0;
  std::cout << "wrote " << result.cells.size() << " cells (" << failed << " failed) to "
            << args.out_path << "\n";
  return 0;
}

int run_montecarlo(const CommonArgs& args) {
  catea::io::MonteCarloRun run =
      catea::io::monte_carlo_run_from_json(catea::io::read_json_file(args.config_path));
  if (args.seed) run.seed = *args.seed;
  const catea::stratum::MonteCarloResult r = catea::stratum::monte_carlo_variance(
      run.pop, run.mode, run.n, run.replicates, run.seed, run.num_threads);
  catea::io::write_json_file(catea::io::monte_carlo_result_json(run, r), args.out_path);
  std::cout << "nvar_sbd=" << r.nvar_sbd << " nvar_cfd=" << r.nvar_cfd
            << " rejects=" << r.reject_count << "\n";
  return 0;
}

int run_bounds_grid(const CommonArgs& args) {
  const catea::theory::GridConfig cfg =
      catea::io::grid_config_from_json(catea::io::read_json_file(args.config_path));
  catea::io::write_grid_csv(catea::theory::reduction_grid(cfg), args.out_path);
  std::cout << "wrote grid to " << args.out_path << "\n";
  return 0;
}

int run_verify_bounds(const CommonArgs& args) {
  catea::harness::BoundsCampaignConfig cfg =
      catea::io::bounds_campaign_from_json(catea::io::read_json_file(args.config_path));
  if (args.seed) cfg.seed = *args.seed;
  const catea::harness::BoundsReport report = catea::harness::verify_bounds(cfg);
  catea::io::write_json_file(catea::io::bounds_report_json(cfg, report), args.out_path);
  std::cout << report.violation_count << " violations across " << cfg.num_configs
            << " configs\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CATEA estimation toolkit"};
  app.require_subcommand(1);

  CommonArgs gen_args;
  std::string dgp_name;
  CLI::App* gen = app.add_subcommand("generate", "generate a synthetic dataset CSV");
  gen->add_option("--dgp", dgp_name, "which process: a or b")
      ->required()
      ->check(CLI::IsMember({"a", "b"}));
  add_common(gen, gen_args);

  CommonArgs exp_args;
  CLI::App* exp = app.add_subcommand("experiment", "run a PEHE sweep into a directory");
  add_common(exp, exp_args);

  CommonArgs mc_args;
  CLI::App* mc = app.add_subcommand("montecarlo", "single-stratum Monte Carlo variance");
  add_common(mc, mc_args);

  CommonArgs grid_args;
  CLI::App* grid = app.add_subcommand("bounds-grid", "variance-reduction bound grid CSV");
  add_common(grid, grid_args);

  CommonArgs vb_args;
  CLI::App* vb = app.add_subcommand("verify-bounds", "Monte Carlo bound containment report");
  add_common(vb, vb_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (gen->parsed()) return run_generate(gen_args, dgp_name);
    if (exp->parsed()) return run_experiment(exp_args);
    if (mc->parsed()) return run_montecarlo(mc_args);
    if (grid->parsed()) return run_bounds_grid(grid_args);
    if (vb->parsed()) return run_verify_bounds(vb_args);
  } catch (const catea::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const catea::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
