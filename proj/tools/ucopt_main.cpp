#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "ucopt/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitSimulation = 4;

struct CommonArgs {
  std::string config_path;
  std::string weights_path;
  std::string controller = "optimal";
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
};

ucopt::ExperimentConfig load_config(const CommonArgs& args) {
  ucopt::ExperimentConfig config =
      args.config_path.empty() ? ucopt::default_config()
                               : ucopt::parse_config_file(args.config_path);
  if (args.seed) config.run.seed = *args.seed;
  if (!args.out_dir.empty()) config.output.dir = args.out_dir;
  return config;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ucopt::ConfigError("cannot write " + path.string());
  return out;
}

std::filesystem::path prepare_out_dir(const ucopt::ExperimentConfig& config) {
  std::filesystem::path dir(config.output.dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ucopt::ConfigError("cannot create output directory " + dir.string());
  return dir;
}

int cmd_solve(const CommonArgs& args) {
  ucopt::ExperimentConfig config = load_config(args);
  std::filesystem::path dir = prepare_out_dir(config);
  ucopt::Problem problem = ucopt::build_problem(config);

  std::optional<ucopt::SolveResult> solved;
  try {
    solved.emplace(ucopt::solve_experiment(config, problem));
  } catch (const ucopt::Error& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kExitSolver;
  }
  const ucopt::SolveResult& result = *solved;

  ucopt::save_weights((dir / "weights.txt").string(), result.final.va.weights());
  if (config.output.csv) {
    auto out = open_out(dir / "iterations.csv");
    ucopt::write_iteration_csv(out, result.log);
  }
  std::cout << "iterations = " << result.final.k << '\n'
            << "converged = " << (result.converged ? "yes" : "no") << '\n'
            << "probe_cost = " << ucopt::format_full(result.final.perf) << '\n'
            << "weights = " << (dir / "weights.txt").string() << '\n';
  return kExitOk;
}

int cmd_simulate(const CommonArgs& args) {
  ucopt::ExperimentConfig config = load_config(args);
  std::filesystem::path dir = prepare_out_dir(config);
  ucopt::Problem problem = ucopt::build_problem(config);

  ucopt::ControllerKind controller;
  if (args.controller == "vf") {
    controller = ucopt::ControllerKind::Vf;
  } else if (args.controller == "optimal") {
    controller = ucopt::ControllerKind::Optimal;
  } else {
    throw ucopt::ConfigError("unknown controller: " + args.controller);
  }

  std::optional<ucopt::ValueApproximator> va;
  if (controller == ucopt::ControllerKind::Optimal) {
    if (args.weights_path.empty()) {
      throw ucopt::ConfigError("--weights is required for the optimal controller");
    }
    va.emplace(problem.basis, ucopt::load_weights(args.weights_path));
  }

  ucopt::RunResult result;
  try {
    result = ucopt::simulate_run(config, problem, controller, va ? &*va : nullptr);
  } catch (const ucopt::ConfigError&) {
    throw;
  } catch (const ucopt::Error& e) {
    std::cerr << "simulation error: " << e.what() << '\n';
    return kExitSimulation;
  }

  if (config.output.csv) {
    auto out = open_out(dir / ("trajectory_" + args.controller + ".csv"));
    ucopt::write_trajectory_csv(out, result.rows);
  }
  ucopt::write_summary(std::cout, result.summary);
  return kExitOk;
}

int cmd_compare(const CommonArgs& args) {
  ucopt::ExperimentConfig config = load_config(args);
  std::filesystem::path dir = prepare_out_dir(config);
  ucopt::Problem problem = ucopt::build_problem(config);

  if (args.weights_path.empty()) {
    throw ucopt::ConfigError("--weights is required for compare");
  }
  ucopt::ValueApproximator va(problem.basis, ucopt::load_weights(args.weights_path));

  ucopt::CompareResult result;
  try {
    result = ucopt::compare_run(config, problem, va);
  } catch (const ucopt::ConfigError&) {
    throw;
  } catch (const ucopt::Error& e) {
    std::cerr << "simulation error: " << e.what() << '\n';
    return kExitSimulation;
  }

  if (config.output.csv) {
    auto opt = open_out(dir / "trajectory_optimal.csv");
    ucopt::write_trajectory_csv(opt, result.optimal.rows);
    auto vf = open_out(dir / "trajectory_vf.csv");
    ucopt::write_trajectory_csv(vf, result.vf.rows);
    auto cmp = open_out(dir / "compare.csv");
    ucopt::write_compare_csv(cmp, result, config.solver.dt);
  }
  std::cout << "[optimal]\n";
  ucopt::write_summary(std::cout, result.optimal.summary);
  std::cout << "[vf]\n";
  ucopt::write_summary(std::cout, result.vf.summary);
  std::cout << "D_gain = "
            << ucopt::format_full(result.optimal.summary.d_accum - result.vf.summary.d_accum)
            << '\n';
  return kExitOk;
}

int cmd_kappa(const CommonArgs& args) {
  ucopt::ExperimentConfig config = load_config(args);
  ucopt::ShapingParams shaping = ucopt::solve_kappa(config.scenario);
  std::cout << "kappa = " << ucopt::format_full(shaping.kappa) << '\n'
            << "q_max = " << ucopt::format_full(shaping.q_max) << '\n'
            << "c1 = " << ucopt::format_full(1.0 / shaping.q_max) << '\n'
            << "residual = "
            << ucopt::format_full(ucopt::kappa_residual(config.scenario, shaping.kappa)) << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constrained IRL circumnavigation toolkit"};
  app.require_subcommand(1);

  CommonArgs args;
  std::uint64_t seed_value = 0;

  auto add_common = [&](CLI::App* sub, bool with_controller) {
    sub->add_option("--config", args.config_path, "experiment config file");
    sub->add_option("--weights", args.weights_path, "value-function weights file");
    sub->add_option("--out", args.out_dir, "output directory");
    sub->add_option("--seed", seed_value, "RNG seed override")
        ->each([&](const std::string&) { args.seed = seed_value; });
    if (with_controller) {
      sub->add_option("--controller", args.controller, "controller: vf | optimal")
          ->check(CLI::IsMember({"vf", "optimal"}));
    }
  };

  CLI::App* solve = app.add_subcommand("solve", "train the value-function weights");
  CLI::App* simulate = app.add_subcommand("simulate", "closed-loop rollout");
  CLI::App* compare = app.add_subcommand("compare", "optimal vs vector-field rollouts");
  CLI::App* kappa = app.add_subcommand("kappa", "reward-shaping constants");
  add_common(solve, false);
  add_common(simulate, true);
  add_common(compare, false);
  add_common(kappa, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return cmd_solve(args);
    if (simulate->parsed()) return cmd_simulate(args);
    if (compare->parsed()) return cmd_compare(args);
    return cmd_kappa(args);
  } catch (const ucopt::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ucopt::RankDeficient& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kExitSolver;
  } catch (const ucopt::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitSimulation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}
