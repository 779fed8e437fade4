// End-to-end acceptance checks. Each criterion prints a single pass/fail
// line; the process exits non-zero if any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <cstdio>
#include <iostream>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <vector>

#include "ucopt/experiment.hpp"

using namespace ucopt;

namespace {

constexpr double kPi = std::numbers::pi;

int failures = 0;

void report(int index, const char* name, bool ok, const std::string& detail = "") {
  std::cout << "criterion " << index << " (" << name << "): " << (ok ? "PASS" : "FAIL");
  if (!detail.empty()) std::cout << "  [" << detail << "]";
  std::cout << '\n';
  if (!ok) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// --- criterion 1: scalar Riccati benchmark -------------------------------

void criterion_riccati() {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string detail;
  try {
    ExperimentConfig config = default_config();
    config.system = SystemKind::Lqr;
    Problem problem = build_problem(config);
    SolveResult result = solve_experiment(config, problem);

    const double p_true = std::sqrt(2.0) - 1.0;
    double worst = 0.0;
    for (int i = 0; i <= 40; ++i) {
      const double x = -1.0 + 0.05 * i;
      AugmentedState X{Eigen::VectorXd::Constant(1, x), Eigen::VectorXd()};
      const double u = greedy_policy(result.final.va, problem.model, problem.cost, X)[0];
      worst = std::max(worst, std::abs(u - (-p_true * x)));
    }
    const double elapsed = seconds_since(t0);
    ok = worst <= 0.02 * p_true && elapsed < 60.0;
    std::ostringstream os;
    os << "max policy error " << worst << " vs bound " << 0.02 * p_true << ", " << elapsed
       << " s";
    detail = os.str();
  } catch (const std::exception& e) {
    ok = false;
    detail = e.what();
  }
  report(1, "riccati policy match", ok, detail);
}

// --- criteria 2-5, 7: full circumnavigation pipeline ----------------------

struct PipelineOutcome {
  std::optional<SolveResult> solved;
  std::optional<CompareResult> compare;
  std::optional<CompareResult> compare_repeat;
  std::string error;
  double train_seconds = 0.0;
  double total_seconds = 0.0;
};

PipelineOutcome run_pipeline() {
  PipelineOutcome out;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    ExperimentConfig config = default_config();
    Problem problem = build_problem(config);
    out.solved.emplace(solve_experiment(config, problem));
    out.train_seconds = seconds_since(t0);
    out.compare.emplace(compare_run(config, problem, out.solved->final.va));
    out.compare_repeat.emplace(compare_run(config, problem, out.solved->final.va));
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  out.total_seconds = seconds_since(t0);
  return out;
}

void criterion_constraints(const PipelineOutcome& pipe) {
  if (!pipe.compare) {
    report(2, "input constraint satisfaction", false, pipe.error);
    return;
  }
  int violations = 0;
  double worst = 0.0;
  for (const RunResult* run : {&pipe.compare->optimal, &pipe.compare->vf}) {
    for (const SimRow& row : run->rows) {
      worst = std::max(worst, std::abs(row.u_theta));
      if (std::abs(row.u_theta) > 1.5) ++violations;
    }
  }
  std::ostringstream os;
  os << violations << " violations, max |u_theta| = " << worst;
  report(2, "input constraint satisfaction", violations == 0, os.str());
}

void criterion_convergence(const PipelineOutcome& pipe) {
  if (!pipe.compare) {
    report(3, "circumnavigation convergence", false, pipe.error);
    return;
  }
  const std::vector<SimRow>& rows = pipe.compare->optimal.rows;
  const double t_end = rows.back().t;

  double mean_rh = 0.0;
  int count = 0;
  double last_bad_eta = 0.0;
  for (const SimRow& row : rows) {
    if (row.t >= t_end - 10.0) {
      mean_rh += row.r_h;
      ++count;
    }
    if (std::abs(row.eta) >= 0.05) last_bad_eta = row.t;
  }
  mean_rh /= count;

  const bool radius_ok = std::abs(mean_rh - 50.0) <= 1.0;
  const bool eta_ok = last_bad_eta <= 30.0;
  const bool time_ok = pipe.total_seconds < 600.0;
  std::ostringstream os;
  os << "final-10s mean r_h = " << mean_rh << ", |eta| < 0.05 from t = " << last_bad_eta
     << " s, pipeline " << pipe.total_seconds << " s";
  report(3, "circumnavigation convergence", radius_ok && eta_ok && time_ok, os.str());
}

void criterion_information(const PipelineOutcome& pipe) {
  if (!pipe.compare) {
    report(4, "fisher-information ordering", false, pipe.error);
    return;
  }
  const RunResult& opt = pipe.compare->optimal;
  const RunResult& vf = pipe.compare->vf;
  const bool d_ok = opt.summary.d_accum >= vf.summary.d_accum;

  // Approach phase: the contiguous interval from t = 2 s until the baseline
  // run first enters the +1 m band around the orbit (the whole run when the
  // baseline never gets that close).
  int wins = 0;
  int total = 0;
  const std::size_t n = std::min(opt.rows.size(), vf.rows.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (vf.rows[i].t < 2.0) continue;
    if (vf.rows[i].r_h <= 51.0) break;
    ++total;
    if (opt.rows[i].q_hat >= vf.rows[i].q_hat) ++wins;
  }
  const double frac = total > 0 ? static_cast<double>(wins) / total : 1.0;
  std::ostringstream os;
  os << "D_opt = " << opt.summary.d_accum << " vs D_vf = " << vf.summary.d_accum
     << "; q_hat wins " << wins << "/" << total;
  report(4, "fisher-information ordering", d_ok && frac >= 0.70, os.str());
}

void criterion_monotone(const PipelineOutcome& pipe) {
  if (!pipe.solved) {
    report(5, "policy-iteration monotonicity", false, pipe.error);
    return;
  }
  const auto& log = pipe.solved->log;
  bool monotone = true;
  for (std::size_t i = 0; i + 1 < log.size(); ++i) {
    if (log[i + 1].perf > log[i].perf + 1e-3) monotone = false;
  }
  bool finite = true;
  for (const auto& rec : log) {
    if (!std::isfinite(rec.perf)) finite = false;
  }
  // Bounded-rollout proxy: the probe evaluation of every logged iterate ran
  // to completion (finite cost), and the final 60 s rollout stays in a sane
  // radius band.
  bool bounded = finite && pipe.compare.has_value();
  if (pipe.compare) {
    for (const SimRow& row : pipe.compare->optimal.rows) {
      if (!(row.r_h > 1.0 && row.r_h < 500.0) || !std::isfinite(row.eta)) bounded = false;
    }
  }
  std::ostringstream os;
  os << log.size() << " logged iterates, monotone within 1e-3: " << (monotone ? "yes" : "no");
  report(5, "policy-iteration monotonicity", monotone && bounded, os.str());
}

void criterion_determinism(const PipelineOutcome& pipe) {
  if (!pipe.compare || !pipe.compare_repeat) {
    report(7, "determinism", false, pipe.error);
    return;
  }
  std::ostringstream a, b;
  write_trajectory_csv(a, pipe.compare->optimal.rows);
  write_trajectory_csv(b, pipe.compare_repeat->optimal.rows);
  std::ostringstream c, d;
  write_trajectory_csv(c, pipe.compare->vf.rows);
  write_trajectory_csv(d, pipe.compare_repeat->vf.rows);

  // Re-train with the identical config and seed; weights must agree to the
  // last bit, hence identical CSV output.
  bool weights_ok = true;
  std::string note;
  try {
    ExperimentConfig config = default_config();
    Problem problem = build_problem(config);
    SolveResult again = solve_experiment(config, problem);
    weights_ok = again.final.va.weights() == pipe.solved->final.va.weights();
  } catch (const std::exception& e) {
    weights_ok = false;
    note = e.what();
  }
  const bool csv_ok = a.str() == b.str() && c.str() == d.str();
  std::ostringstream os;
  os << "trajectory CSVs byte-identical: " << (csv_ok ? "yes" : "no")
     << ", retrained weights identical: " << (weights_ok ? "yes" : "no") << note;
  report(7, "determinism", csv_ok && weights_ok, os.str());
}

// --- criterion 6: numerical kernels ---------------------------------------

double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                   double fb, double fm, double eps, int depth) {
  const double m = 0.5 * (a + b);
  const double flm = f(0.5 * (a + m));
  const double frm = f(0.5 * (m + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * eps) {
    return left + right + (left + right - whole) / 15.0;
  }
  return simpson_rec(f, a, m, fa, fm, flm, eps / 2.0, depth - 1) +
         simpson_rec(f, m, b, fm, fb, frm, eps / 2.0, depth - 1);
}

double quadrature(const std::function<double(double)>& f, double a, double b) {
  return simpson_rec(f, a, b, f(a), f(b), f(0.5 * (a + b)), 1e-13, 48);
}

void criterion_kernels() {
  bool ok = true;
  std::ostringstream os;
  try {
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);

    // (a) analytic gradient vs central finite differences.
    {
      BasisSet basis = make_full_basis();
      Eigen::VectorXd w(basis.size());
      for (int i = 0; i < w.size(); ++i) w[i] = unit(rng);
      ValueApproximator va(basis, w);
      double worst = 0.0;
      for (int trial = 0; trial < 50; ++trial) {
        Eigen::VectorXd X(4);
        X << 3.0 * unit(rng), unit(rng), kPi * unit(rng), kPi * unit(rng);
        Eigen::VectorXd grad = va.gradient(X);
        for (int i = 0; i < 4; ++i) {
          const double h = 1e-6 * std::max(1.0, std::abs(X[i]));
          Eigen::VectorXd Xp = X, Xm = X;
          Xp[i] += h;
          Xm[i] -= h;
          const double fd = (va.value(Xp) - va.value(Xm)) / (2.0 * h);
          worst = std::max(worst,
                           std::abs(grad[i] - fd) / std::max({1.0, std::abs(grad[i])}));
        }
      }
      ok = ok && worst < 1e-6;
      os << "grad " << worst;
    }

    // (b) control-cost closed form vs adaptive quadrature.
    {
      double worst = 0.0;
      for (int trial = 0; trial < 200; ++trial) {
        const double lam = 0.2 + 2.5 * std::abs(unit(rng));
        const double r = 0.1 + 3.0 * std::abs(unit(rng));
        const double u = 0.97 * lam * unit(rng);
        LambdaBar lb{Eigen::VectorXd::Constant(1, lam), {true}};
        const double closed = control_cost(Eigen::VectorXd::Constant(1, u), lb,
                                           Eigen::VectorXd::Constant(1, r));
        const double ref = quadrature(
            [lam, r](double s) { return 2.0 * r * lam * std::atanh(s / lam); }, 0.0, u);
        worst = std::max(worst, std::abs(closed - ref) / std::max(std::abs(ref), 1e-12));
      }
      ok = ok && worst < 1e-8;
      os << ", cost " << worst;
    }

    // (c) optimality gap nonnegative on 10^4 random pairs.
    {
      int bad = 0;
      for (int trial = 0; trial < 10000; ++trial) {
        const double lam = 0.3 + 2.0 * std::abs(unit(rng));
        const double r = 0.2 + 2.0 * std::abs(unit(rng));
        Eigen::VectorXd V_X = Eigen::VectorXd::Constant(1, 1.5 * unit(rng));
        Eigen::MatrixXd G = Eigen::MatrixXd::Constant(1, 1, unit(rng));
        const double gv = (G.transpose() * V_X)(0);
        Eigen::VectorXd u_star =
            Eigen::VectorXd::Constant(1, -lam * std::tanh(gv / (2.0 * lam * r)));
        Eigen::VectorXd u = Eigen::VectorXd::Constant(1, 0.999 * lam * unit(rng));
        LambdaBar lb{Eigen::VectorXd::Constant(1, lam), {true}};
        if (optimality_gap(u, u_star, V_X, G, lb, Eigen::VectorXd::Constant(1, r)) < -1e-12) {
          ++bad;
        }
      }
      ok = ok && bad == 0;
      os << ", M_u bad " << bad;
    }

    // (d) Fisher quadratic form vs closed-form L.
    {
      CircumnavScenario scn = default_config().scenario;
      double worst = 0.0;
      for (int trial = 0; trial < 2000; ++trial) {
        const double r_h = 5.0 + 140.0 * std::abs(unit(rng));
        const double eta = kPi * unit(rng);
        const double phi = kPi * unit(rng);
        const double theta_r = phi + kPi / 2.0 - eta;
        Eigen::Vector2d v_rel(scn.v_r * std::cos(theta_r), scn.v_r * std::sin(theta_r));
        const double quad = v_rel.dot(
            fisher_matrix(scn, r_h * std::cos(phi), r_h * std::sin(phi)) * v_rel);
        const double closed = fisher_L(scn, r_h, eta);
        worst = std::max(worst, std::abs(quad - closed) / std::max(closed, 1e-12));
      }
      ok = ok && worst < 1e-9;
      os << ", FI " << worst;
    }

    // (e) reduced vs world-frame twin over 10 s.
    {
      CircumnavScenario scn = default_config().scenario;
      auto u_of_t = [](double t) { return 0.4 * std::sin(0.5 * t) + 0.2 * std::cos(1.3 * t); };
      const double dt = 0.005;
      CircumnavState s0 = state_from_polar(scn, 80.0, 0.3, 0.4, 0.1);
      Eigen::Vector4d yr(s0.e_r, s0.eta, s0.theta, s0.theta_t);
      Eigen::VectorXd w(6);
      w << s0.x, s0.y, s0.theta, s0.x_t, s0.y_t, s0.theta_t;
      auto wd = [&](const Eigen::VectorXd& s, double t) {
        const double v = speed_command(scn, s[2], s[5]);
        Eigen::VectorXd d(6);
        d << v * std::cos(s[2]), v * std::sin(s[2]), u_of_t(t), scn.v_t * std::cos(s[5]),
            scn.v_t * std::sin(s[5]), scn.target_turn(s[5]);
        return d;
      };
      auto rd = [&](const Eigen::Vector4d& s, double t) {
        CircumnavState cs;
        cs.e_r = s[0];
        cs.eta = s[1];
        cs.theta = s[2];
        cs.theta_t = s[3];
        return x_dynamics(scn, cs, u_of_t(t));
      };
      double worst = 0.0;
      for (int i = 0; i < 2000; ++i) {
        const double t = i * dt;
        Eigen::Vector4d a1 = rd(yr, t);
        Eigen::Vector4d a2 = rd(yr + 0.5 * dt * a1, t + 0.5 * dt);
        Eigen::Vector4d a3 = rd(yr + 0.5 * dt * a2, t + 0.5 * dt);
        Eigen::Vector4d a4 = rd(yr + dt * a3, t + dt);
        yr += dt / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
        Eigen::VectorXd b1 = wd(w, t);
        Eigen::VectorXd b2 = wd(w + 0.5 * dt * b1, t + 0.5 * dt);
        Eigen::VectorXd b3 = wd(w + 0.5 * dt * b2, t + 0.5 * dt);
        Eigen::VectorXd b4 = wd(w + dt * b3, t + dt);
        w += dt / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
        const double x_r = w[3] - w[0];
        const double y_r = w[4] - w[1];
        const double v = speed_command(scn, w[2], w[5]);
        const double theta_r = relative_heading(scn, v, w[2], w[5]);
        const double eta = wrap_angle(std::atan2(y_r, x_r) - theta_r + kPi / 2.0);
        worst = std::max(worst, std::abs((scn.r_d + yr[0]) - std::hypot(x_r, y_r)));
        worst = std::max(worst, std::abs(wrap_angle(yr[1] - eta)));
      }
      ok = ok && worst < 1e-3;
      os << ", twin " << worst;
    }

    // (f) kappa stationarity residual.
    {
      CircumnavScenario scn = default_config().scenario;
      ShapingParams shaping = solve_kappa(scn);
      const double res = std::abs(kappa_residual(scn, shaping.kappa));
      ok = ok && res < 1e-6;
      os << ", kappa " << res;
    }
  } catch (const std::exception& e) {
    ok = false;
    os << " exception: " << e.what();
  }
  report(6, "numerical kernels", ok, os.str());
}

}  // namespace

int main() {
  criterion_riccati();
  PipelineOutcome pipe = run_pipeline();
  criterion_constraints(pipe);
  criterion_convergence(pipe);
  criterion_information(pipe);
  criterion_monotone(pipe);
  criterion_kernels();
  criterion_determinism(pipe);
  if (failures > 0) {
    std::cout << failures << " criterion(s) failed\n";
    return 1;
  }
  std::cout << "all acceptance criteria passed\n";
  return 0;
}
