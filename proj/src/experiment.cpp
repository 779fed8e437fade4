#include "ucopt/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

namespace ucopt {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEtaConvergedBand = 0.05;  // rad
constexpr double kEtaSustainTime = 2.0;     // s

}  // namespace

std::string format_full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

ExperimentConfig default_config() {
  ExperimentConfig config;
  config.scenario = reference_scenario();
  return config;
}

namespace {

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("invalid number for '" + key + "': " + value);
  }
}

int parse_int(const std::string& key, const std::string& value) {
  const double v = parse_double(key, value);
  if (v != std::floor(v)) throw ConfigError("expected integer for '" + key + "': " + value);
  return static_cast<int>(v);
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "on" || value == "true" || value == "1") return true;
  if (value == "off" || value == "false" || value == "0") return false;
  throw ConfigError("invalid boolean for '" + key + "': " + value);
}

std::vector<double> parse_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto begin = item.find_first_not_of(" \t");
    const auto end = item.find_last_not_of(" \t");
    if (begin == std::string::npos) throw ConfigError("empty element in list '" + key + "'");
    out.push_back(parse_double(key, item.substr(begin, end - begin + 1)));
  }
  if (out.empty()) throw ConfigError("empty list for '" + key + "'");
  return out;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig config = default_config();
  bool c1_set = false;

  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("malformed section header: " + line);
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      std::ostringstream os;
      os << "expected 'key = value' on line " << lineno << ": " << line;
      throw ConfigError(os.str());
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError("empty key or value on line " + std::to_string(lineno));
    }

    if (section == "scenario") {
      if (key == "system") {
        if (value == "circumnav") {
          config.system = SystemKind::Circumnav;
        } else if (value == "lqr") {
          config.system = SystemKind::Lqr;
        } else {
          throw ConfigError("unknown system: " + value);
        }
      } else if (key == "v_t") {
        config.scenario.v_t = parse_double(key, value);
      } else if (key == "v_r") {
        config.scenario.v_r = parse_double(key, value);
      } else if (key == "h_alt") {
        config.scenario.h_alt = parse_double(key, value);
      } else if (key == "r_d") {
        config.scenario.r_d = parse_double(key, value);
      } else if (key == "omega_max") {
        config.scenario.omega_max = parse_double(key, value);
      } else if (key == "sigma_r") {
        config.scenario.sigma_r = parse_double(key, value);
      } else if (key == "sigma_phi") {
        config.scenario.sigma_phi = parse_double(key, value);
      } else if (key == "c1") {
        config.scenario.c1 = parse_double(key, value);
        c1_set = true;
      } else if (key == "k_vf") {
        config.scenario.k_vf = parse_double(key, value);
      } else if (key == "r_weight") {
        config.scenario.r_weight = parse_double(key, value);
      } else if (key == "lambda") {
        config.lqr_lambda = parse_double(key, value);
      } else {
        throw ConfigError("unknown scenario key: " + key);
      }
    } else if (section == "solver") {
      if (key == "T") {
        config.solver.T = parse_double(key, value);
      } else if (key == "dt") {
        config.solver.dt = parse_double(key, value);
      } else if (key == "samples") {
        config.solver.samples = parse_int(key, value);
      } else if (key == "ridge") {
        config.solver.ridge = parse_double(key, value);
      } else if (key == "eps") {
        config.solver.eps = parse_double(key, value);
      } else if (key == "max_iterations") {
        config.solver.max_iterations = parse_int(key, value);
      } else if (key == "mode") {
        if (value == "trajectory") {
          config.solver.mode = SamplingMode::Trajectory;
        } else if (value == "mesh") {
          config.solver.mode = SamplingMode::Mesh;
        } else {
          throw ConfigError("unknown sampling mode: " + value);
        }
      } else if (key == "basis") {
        if (value == "reduced") {
          config.solver.basis = BasisKind::Reduced;
        } else if (value == "full") {
          config.solver.basis = BasisKind::Full;
        } else {
          throw ConfigError("unknown basis kind: " + value);
        }
      } else if (key == "omega_lo") {
        config.solver.omega_lo = parse_list(key, value);
      } else if (key == "omega_hi") {
        config.solver.omega_hi = parse_list(key, value);
      } else if (key == "probe_horizon") {
        config.solver.probe_horizon = parse_double(key, value);
      } else {
        throw ConfigError("unknown solver key: " + key);
      }
    } else if (section == "run") {
      if (key == "duration") {
        config.run.duration = parse_double(key, value);
      } else if (key == "r_h0") {
        config.run.r_h0 = parse_double(key, value);
      } else if (key == "eta0") {
        config.run.eta0 = parse_double(key, value);
      } else if (key == "phi0") {
        config.run.phi0 = parse_double(key, value);
      } else if (key == "theta_t0") {
        config.run.theta_t0 = parse_double(key, value);
      } else if (key == "x0") {
        config.run.lqr_x0 = parse_double(key, value);
      } else if (key == "seed") {
        config.run.seed = static_cast<std::uint64_t>(parse_int(key, value));
      } else {
        throw ConfigError("unknown run key: " + key);
      }
    } else if (section == "output") {
      if (key == "dir") {
        config.output.dir = value;
      } else if (key == "csv") {
        config.output.csv = parse_bool(key, value);
      } else {
        throw ConfigError("unknown output key: " + key);
      }
    } else {
      throw ConfigError("key outside of a known section: " + key);
    }
  }

  if (config.run.duration < 0.0 || config.solver.dt <= 0.0 || config.solver.T <= 0.0 ||
      config.solver.samples < 1 || config.solver.max_iterations < 0) {
    throw ConfigError("non-positive solver/run parameter");
  }
  if (config.system == SystemKind::Circumnav) {
    if (!(config.scenario.v_r > config.scenario.v_t && config.scenario.v_t > 0.0)) {
      throw ConfigError("scenario requires v_r > v_t > 0");
    }
    if (!c1_set) {
      config.scenario.c1 = 1.0 / solve_kappa(config.scenario).q_max;
    }
  }
  return config;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

namespace {

Problem build_circumnav_problem(const ExperimentConfig& config) {
  const CircumnavScenario& scn = config.scenario;
  ShapingParams shaping = solve_kappa(scn);

  SamplingConfig sampling;
  sampling.T = config.solver.T;
  sampling.dt = config.solver.dt;
  sampling.count = config.solver.samples;
  sampling.mode = config.solver.mode;
  sampling.seed = config.run.seed;
  sampling.ridge = config.solver.ridge;
  sampling.probe_horizon = config.solver.probe_horizon;
  sampling.x0 = to_augmented(
      state_from_polar(scn, config.run.r_h0, config.run.eta0, config.run.phi0,
                       config.run.theta_t0));

  std::vector<double> lo = config.solver.omega_lo;
  std::vector<double> hi = config.solver.omega_hi;
  // The mesh must reach well below the loiter radius: the value fit needs to
  // see how expensive the inside region is, or the greedy policy happily
  // extrapolates into it.
  if (lo.empty()) lo = {-30.0, -1.2, -kPi, -kPi};
  if (hi.empty()) hi = {62.0, 1.2, kPi, kPi};
  if (lo.size() != 4 || hi.size() != 4) {
    throw ConfigError("circumnav mesh bounds need 4 entries (e_r, eta, theta, theta_t)");
  }
  sampling.omega_lo = Eigen::Map<const Eigen::VectorXd>(lo.data(), 4);
  sampling.omega_hi = Eigen::Map<const Eigen::VectorXd>(hi.data(), 4);

  // Near-orbit probe states: the improvement metric measures steady
  // regulation quality around the loiter circle, spread over bearing and
  // target-heading phases.
  for (int i = 0; i < 10; ++i) {
    const double r_h = scn.r_d - 4.5 + 1.0 * i;
    const double eta = -0.18 + 0.04 * i;
    const double phi = 2.0 * kPi * i / 10.0;
    const double theta_t = 0.4 * i;
    sampling.probes.push_back(to_augmented(state_from_polar(scn, r_h, eta, phi, theta_t)));
  }

  BasisSet basis = (config.solver.basis == BasisKind::Full) ? make_full_basis()
                                                            : make_reduced_basis();
  return Problem{make_system_model(scn), make_cost_config(scn, shaping), std::move(basis),
                 std::move(sampling), shaping};
}

Problem build_lqr_problem(const ExperimentConfig& config) {
  const double lambda = config.lqr_lambda;

  SystemModel model;
  model.n1 = 1;
  model.n2 = 0;
  model.m = 1;
  model.f1 = [](const Eigen::VectorXd& x1, const Eigen::VectorXd&) {
    return Eigen::VectorXd::Constant(1, -x1[0]).eval();
  };
  model.g1 = [](const Eigen::VectorXd&, const Eigen::VectorXd&) {
    return Eigen::MatrixXd::Constant(1, 1, 1.0).eval();
  };
  model.f2 = [](const Eigen::VectorXd&) { return Eigen::VectorXd(); };
  model.constraint = [lambda](const Eigen::VectorXd&, const Eigen::VectorXd&) {
    return std::make_pair(Eigen::VectorXd::Constant(1, -lambda).eval(),
                          Eigen::VectorXd::Constant(1, lambda).eval());
  };
  model.baseline = [](const Eigen::VectorXd&, const Eigen::VectorXd&) {
    return Eigen::VectorXd::Zero(1).eval();
  };

  CostConfig cost;
  cost.r = Eigen::VectorXd::Ones(1);
  cost.state_cost = [](const Eigen::VectorXd& x1) { return x1[0] * x1[0]; };

  Eigen::MatrixXi exps(1, 1);
  exps << 2;
  BasisSet basis(exps, 1);

  SamplingConfig sampling;
  sampling.T = config.solver.T;
  sampling.dt = config.solver.dt;
  sampling.count = config.solver.samples;
  sampling.mode = SamplingMode::Mesh;
  sampling.seed = config.run.seed;
  sampling.ridge = config.solver.ridge;
  sampling.probe_horizon = config.solver.probe_horizon;
  sampling.x0 = AugmentedState{Eigen::VectorXd::Constant(1, config.run.lqr_x0),
                               Eigen::VectorXd()};
  std::vector<double> lo = config.solver.omega_lo;
  std::vector<double> hi = config.solver.omega_hi;
  if (lo.empty()) lo = {-1.0};
  if (hi.empty()) hi = {1.0};
  if (lo.size() != 1 || hi.size() != 1) {
    throw ConfigError("lqr mesh bounds need 1 entry");
  }
  sampling.omega_lo = Eigen::VectorXd::Constant(1, lo[0]);
  sampling.omega_hi = Eigen::VectorXd::Constant(1, hi[0]);
  for (int i = 0; i < 10; ++i) {
    sampling.probes.push_back(AugmentedState{
        Eigen::VectorXd::Constant(1, -1.0 + 2.0 * i / 9.0), Eigen::VectorXd()});
  }

  return Problem{std::move(model), std::move(cost), std::move(basis), std::move(sampling),
                 ShapingParams{}};
}

}  // namespace

Problem build_problem(const ExperimentConfig& config) {
  if (config.system == SystemKind::Circumnav) return build_circumnav_problem(config);
  return build_lqr_problem(config);
}

SolveResult solve_experiment(const ExperimentConfig& config, const Problem& problem) {
  return solve(problem.model, problem.cost, problem.basis, problem.sampling, config.solver.eps,
               config.solver.max_iterations);
}

namespace {

struct WorldState {
  double x, y, theta, x_t, y_t, theta_t;
};

WorldState world_rk4_step(const CircumnavScenario& scn, const WorldState& w, double u_theta,
                          double dt) {
  auto deriv = [&](const WorldState& s) {
    const double v = speed_command(scn, s.theta, s.theta_t);
    WorldState d;
    d.x = v * std::cos(s.theta);
    d.y = v * std::sin(s.theta);
    d.theta = u_theta;
    d.x_t = scn.v_t * std::cos(s.theta_t);
    d.y_t = scn.v_t * std::sin(s.theta_t);
    d.theta_t = scn.target_turn(s.theta_t);
    return d;
  };
  auto axpy = [](const WorldState& a, double c, const WorldState& b) {
    return WorldState{a.x + c * b.x,     a.y + c * b.y,     a.theta + c * b.theta,
                      a.x_t + c * b.x_t, a.y_t + c * b.y_t, a.theta_t + c * b.theta_t};
  };
  WorldState k1 = deriv(w);
  WorldState k2 = deriv(axpy(w, 0.5 * dt, k1));
  WorldState k3 = deriv(axpy(w, 0.5 * dt, k2));
  WorldState k4 = deriv(axpy(w, dt, k3));
  WorldState next = w;
  next.x += dt / 6.0 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x);
  next.y += dt / 6.0 * (k1.y + 2 * k2.y + 2 * k3.y + k4.y);
  next.theta += dt / 6.0 * (k1.theta + 2 * k2.theta + 2 * k3.theta + k4.theta);
  next.x_t += dt / 6.0 * (k1.x_t + 2 * k2.x_t + 2 * k3.x_t + k4.x_t);
  next.y_t += dt / 6.0 * (k1.y_t + 2 * k2.y_t + 2 * k3.y_t + k4.y_t);
  next.theta_t += dt / 6.0 * (k1.theta_t + 2 * k2.theta_t + 2 * k3.theta_t + k4.theta_t);
  next.theta = wrap_angle(next.theta);
  next.theta_t = wrap_angle(next.theta_t);
  return next;
}

CircumnavState reduced_from_world(const CircumnavScenario& scn, const WorldState& w) {
  CircumnavState s;
  s.x = w.x;
  s.y = w.y;
  s.theta = w.theta;
  s.x_t = w.x_t;
  s.y_t = w.y_t;
  s.theta_t = w.theta_t;
  const double x_r = w.x_t - w.x;
  const double y_r = w.y_t - w.y;
  const double r_h = std::hypot(x_r, y_r);
  const double phi = std::atan2(y_r, x_r);
  const double v = speed_command(scn, w.theta, w.theta_t);
  const double theta_r = relative_heading(scn, v, w.theta, w.theta_t);
  s.e_r = r_h - scn.r_d;
  s.eta = wrap_angle(phi - theta_r + kPi / 2.0);
  return s;
}

double eta_convergence_time(const std::vector<SimRow>& rows, double dt) {
  if (rows.size() < 2) return -1.0;
  const int sustain_steps = static_cast<int>(std::lround(kEtaSustainTime / dt)) + 1;
  int run = 0;
  // Longest converged run ending at each index, scanned from the back.
  std::vector<int> tail(rows.size(), 0);
  for (int i = static_cast<int>(rows.size()) - 1; i >= 0; --i) {
    run = (std::abs(rows[i].eta) < kEtaConvergedBand) ? run + 1 : 0;
    tail[i] = run;
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (tail[i] >= sustain_steps) return rows[i].t;
  }
  return -1.0;
}

}  // namespace

RunResult simulate_run(const ExperimentConfig& config, const Problem& problem,
                       ControllerKind controller, const ValueApproximator* va) {
  if (config.system != SystemKind::Circumnav) {
    throw ConfigError("simulation is defined for the circumnav system only");
  }
  if (controller == ControllerKind::Optimal && va == nullptr) {
    throw ConfigError("optimal controller requires trained value weights");
  }
  const CircumnavScenario& scn = config.scenario;
  const double dt = config.solver.dt;
  const int steps = static_cast<int>(std::lround(config.run.duration / dt));

  CircumnavState s0 = state_from_polar(scn, config.run.r_h0, config.run.eta0, config.run.phi0,
                                       config.run.theta_t0);
  WorldState w{s0.x, s0.y, s0.theta, s0.x_t, s0.y_t, s0.theta_t};

  RunResult result;
  result.rows.reserve(steps + 1);
  double prev_u_hat = 0.0;
  double prev_sqrt_l = 0.0;
  double prev_cost = 0.0;
  double d_accum = 0.0;
  double j_accum = 0.0;
  double max_abs_u = 0.0;

  for (int i = 0; i <= steps; ++i) {
    CircumnavState cur = reduced_from_world(scn, w);
    double u_s;
    double u_hat = 0.0;
    if (controller == ControllerKind::Optimal) {
      AugmentedState X = to_augmented(cur);
      u_s = problem.model.baseline(X.x1, X.x2)[0];
      try {
        u_hat = greedy_policy(*va, problem.model, problem.cost, X)[0];
      } catch (const NearSingular&) {
        u_hat = prev_u_hat;  // hold through the singular geometry
      }
    } else {
      u_s = vf_baseline(scn, cur);
    }
    prev_u_hat = u_hat;
    const double u_theta = u_s + u_hat;
    max_abs_u = std::max(max_abs_u, std::abs(u_theta));

    const double r_h = cur.r_h(scn.r_d);
    const double sqrt_l = std::sqrt(fisher_L(scn, r_h, cur.eta));
    const double qh = q_hat(scn, problem.shaping, r_h, cur.eta);
    const double run_cost = scn.c1 * (problem.shaping.q_max - qh) +
                            circumnav_control_cost(scn, u_s, u_hat);
    if (i > 0) {
      d_accum += 0.5 * dt * (prev_sqrt_l + sqrt_l);
      j_accum += 0.5 * dt * (prev_cost + run_cost);
    }
    prev_sqrt_l = sqrt_l;
    prev_cost = run_cost;

    SimRow row;
    row.t = i * dt;
    row.x = cur.x;
    row.y = cur.y;
    row.theta = cur.theta;
    row.x_t = cur.x_t;
    row.y_t = cur.y_t;
    row.theta_t = cur.theta_t;
    row.r_h = r_h;
    row.e_r = cur.e_r;
    row.eta = cur.eta;
    row.u_s = u_s;
    row.u_hat = u_hat;
    row.u_theta = u_theta;
    row.q_hat = qh;
    row.sqrt_l = sqrt_l;
    row.d_accum = d_accum;
    row.j_accum = j_accum;
    result.rows.push_back(row);

    if (i < steps) {
      w = world_rk4_step(scn, w, u_theta, dt);
    }
  }

  result.summary.final_r_h = result.rows.back().r_h;
  result.summary.eta_convergence_time = eta_convergence_time(result.rows, dt);
  result.summary.d_accum = d_accum;
  result.summary.j_accum = j_accum;
  result.summary.max_abs_u_theta = max_abs_u;
  return result;
}

CompareResult compare_run(const ExperimentConfig& config, const Problem& problem,
                          const ValueApproximator& va) {
  CompareResult out{simulate_run(config, problem, ControllerKind::Optimal, &va),
                    simulate_run(config, problem, ControllerKind::Vf, nullptr)};
  return out;
}

void write_trajectory_csv(std::ostream& out, const std::vector<SimRow>& rows) {
  out << "t,x,y,theta,x_t,y_t,theta_t,r_h,e_r,eta,u_s,u_hat,u_theta,q_hat,sqrtL,D_accum,"
         "J_accum\n";
  for (const SimRow& r : rows) {
    out << format_full(r.t) << ',' << format_full(r.x) << ',' << format_full(r.y) << ','
        << format_full(r.theta) << ',' << format_full(r.x_t) << ',' << format_full(r.y_t) << ','
        << format_full(r.theta_t) << ',' << format_full(r.r_h) << ',' << format_full(r.e_r)
        << ',' << format_full(r.eta) << ',' << format_full(r.u_s) << ',' << format_full(r.u_hat)
        << ',' << format_full(r.u_theta) << ',' << format_full(r.q_hat) << ','
        << format_full(r.sqrt_l) << ',' << format_full(r.d_accum) << ','
        << format_full(r.j_accum) << '\n';
  }
}

void write_iteration_csv(std::ostream& out, const std::vector<IterationRecord>& log) {
  out << "k,residual_rms,perf,weight_delta\n";
  for (const IterationRecord& rec : log) {
    out << rec.k << ',' << format_full(rec.residual_rms) << ',' << format_full(rec.perf) << ','
        << format_full(rec.weight_delta) << '\n';
  }
}

void write_compare_csv(std::ostream& out, const CompareResult& result, double dt) {
  out << "t,q_hat_optimal,q_hat_vf,D_optimal,D_vf\n";
  const std::size_t n = std::min(result.optimal.rows.size(), result.vf.rows.size());
  for (std::size_t i = 0; i < n; ++i) {
    const SimRow& a = result.optimal.rows[i];
    const SimRow& b = result.vf.rows[i];
    out << format_full(i * dt) << ',' << format_full(a.q_hat) << ',' << format_full(b.q_hat)
        << ',' << format_full(a.d_accum) << ',' << format_full(b.d_accum) << '\n';
  }
}

void write_summary(std::ostream& out, const RunSummary& summary) {
  out << "final_r_h = " << format_full(summary.final_r_h) << '\n'
      << "eta_convergence_time = " << format_full(summary.eta_convergence_time) << '\n'
      << "D_accum = " << format_full(summary.d_accum) << '\n'
      << "J_accum = " << format_full(summary.j_accum) << '\n'
      << "max_abs_u_theta = " << format_full(summary.max_abs_u_theta) << '\n'
      << "iterations = " << summary.iterations << '\n';
}

}  // namespace ucopt
