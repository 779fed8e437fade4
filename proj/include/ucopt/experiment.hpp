#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ucopt/circumnav.hpp"
#include "ucopt/policy_iteration.hpp"

namespace ucopt {

enum class SystemKind { Circumnav, Lqr };
enum class ControllerKind { Vf, Optimal };

/// Value basis for the circumnavigation problem: the reduced set spans the
/// 15 (e_r, eta) monomials only, the full set crosses them with the 10
/// (theta, theta_t) monomials (150 terms).
enum class BasisKind { Reduced, Full };

struct SolverSettings {
  double T = 1.0;
  double dt = 0.005;
  int samples = 800;
  double ridge = 1e-8;
  double eps = 1e-4;
  int max_iterations = 60;
  SamplingMode mode = SamplingMode::Mesh;
  BasisKind basis = BasisKind::Reduced;
  std::vector<double> omega_lo;
  std::vector<double> omega_hi;
  double probe_horizon = 60.0;
};

struct RunSettings {
  double duration = 60.0;
  double r_h0 = 110.0;
  double eta0 = 0.5;
  double phi0 = 0.0;
  double theta_t0 = 0.0;
  double lqr_x0 = 1.0;
  std::uint64_t seed = 0;
};

struct OutputSettings {
  std::string dir = ".";
  bool csv = true;
};

struct ExperimentConfig {
  SystemKind system = SystemKind::Circumnav;
  CircumnavScenario scenario;
  double lqr_lambda = 100.0;  // symmetric input bound of the scalar preset
  SolverSettings solver;
  RunSettings run;
  OutputSettings output;
};

/// Reference preset: circumnavigation scenario at 200 Hz, mesh-mode training
/// with 800 one-second reinforcement windows per iteration.
ExperimentConfig default_config();

/// Flat `key = value` sections: [scenario], [solver], [run], [output].
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

/// One logged simulation step at the 200 Hz sample grid.
struct SimRow {
  double t = 0.0;
  double x = 0.0, y = 0.0, theta = 0.0;
  double x_t = 0.0, y_t = 0.0, theta_t = 0.0;
  double r_h = 0.0, e_r = 0.0, eta = 0.0;
  double u_s = 0.0, u_hat = 0.0, u_theta = 0.0;
  double q_hat = 0.0, sqrt_l = 0.0;
  double d_accum = 0.0, j_accum = 0.0;
};

struct RunSummary {
  double final_r_h = 0.0;
  /// First time |eta| < 0.05 rad holds for 2 s; negative when never reached.
  double eta_convergence_time = -1.0;
  double d_accum = 0.0;
  double j_accum = 0.0;
  double max_abs_u_theta = 0.0;
  int iterations = 0;
};

struct RunResult {
  std::vector<SimRow> rows;
  RunSummary summary;
};

/// Everything needed to train or evaluate a configured problem.
struct Problem {
  SystemModel model;
  CostConfig cost;
  BasisSet basis;
  SamplingConfig sampling;
  ShapingParams shaping;  // circumnavigation only
};

Problem build_problem(const ExperimentConfig& config);

/// Trains the value weights with the IRL policy-iteration loop.
SolveResult solve_experiment(const ExperimentConfig& config, const Problem& problem);

/// 60-second-style closed-loop rollout of the circumnavigation scenario.
/// `va` is required for the optimal controller and ignored for the VF one.
RunResult simulate_run(const ExperimentConfig& config, const Problem& problem,
                       ControllerKind controller, const ValueApproximator* va);

struct CompareResult {
  RunResult optimal;
  RunResult vf;
};

CompareResult compare_run(const ExperimentConfig& config, const Problem& problem,
                          const ValueApproximator& va);

void write_trajectory_csv(std::ostream& out, const std::vector<SimRow>& rows);
void write_iteration_csv(std::ostream& out, const std::vector<IterationRecord>& log);
void write_compare_csv(std::ostream& out, const CompareResult& result, double dt);
void write_summary(std::ostream& out, const RunSummary& summary);

/// Full-precision decimal formatting used for all CSV output.
std::string format_full(double v);

}  // namespace ucopt
