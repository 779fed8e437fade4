#include "ucopt/policy_iteration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace ucopt {

Eigen::VectorXd greedy_policy(const ValueApproximator& va, const SystemModel& model,
                              const CostConfig& cost, const AugmentedState& X) {
  ConstraintWindow window = constraint_window(model, X);
  Eigen::MatrixXd G = augmented_input_map(model, X);
  Eigen::VectorXd gv = G.transpose() * va.gradient(X.concat());
  LambdaBar lam = select_lambda_bar(window, -gv);
  // Back the tanh off the saturation scale by one part in 1e12 so the
  // control cost of the greedy input stays finite even when the argument
  // saturates in double precision.
  constexpr double kTanhGuard = 1.0 - 1e-12;
  Eigen::VectorXd u_hat(model.m);
  for (int i = 0; i < model.m; ++i) {
    u_hat[i] = -lam.values[i] * kTanhGuard *
               std::tanh(gv[i] / (2.0 * lam.values[i] * cost.r[i]));
  }
  return u_hat;
}

Policy make_greedy_policy(const ValueApproximator& va, const SystemModel& model,
                          const CostConfig& cost) {
  return [&va, &model, &cost](const AugmentedState& X) {
    return greedy_policy(va, model, cost, X);
  };
}

namespace {

// Running cost Q(x1) + U_n(u_hat) at one state; the saturation scale is
// re-selected from the sign of u_hat itself.
double running_cost(const SystemModel& model, const CostConfig& cost, const AugmentedState& X,
                    const Eigen::VectorXd& u_hat) {
  ConstraintWindow window = constraint_window(model, X);
  LambdaBar lam = select_lambda_bar(window, u_hat);
  return cost.state_cost(X.x1) + control_cost(u_hat, lam, cost.r);
}

int window_steps(double T, double dt) {
  const double ratio = T / dt;
  const int steps = static_cast<int>(std::lround(ratio));
  if (steps < 1 || std::abs(ratio - steps) > 1e-9) {
    std::ostringstream os;
    os << "reinforcement interval T=" << T << " is not a positive multiple of dt=" << dt;
    throw DimensionMismatch(os.str());
  }
  return steps;
}

// Integrates one reinforcement window; returns the end state and the
// trapezoidal integral of the running cost.
std::pair<AugmentedState, double> run_window(const SystemModel& model, const CostConfig& cost,
                                             const Policy& policy, const AugmentedState& X0,
                                             double dt, int steps) {
  AugmentedState X = X0;
  double integral = 0.0;
  double prev_cost = running_cost(model, cost, X, policy(X));
  for (int i = 0; i < steps; ++i) {
    X = rk4_step(model, X, policy, dt);
    const double cur_cost = running_cost(model, cost, X, policy(X));
    integral += 0.5 * dt * (prev_cost + cur_cost);
    prev_cost = cur_cost;
  }
  return {X, integral};
}

}  // namespace

std::vector<TrainingSample> collect_samples(const SystemModel& model, const CostConfig& cost,
                                            const Policy& policy, const BasisSet& basis,
                                            const SamplingConfig& cfg) {
  const int steps = window_steps(cfg.T, cfg.dt);
  std::vector<TrainingSample> samples;
  samples.reserve(cfg.count);

  auto make_sample = [&](const AugmentedState& Xa) {
    auto [Xb, integral] = run_window(model, cost, policy, Xa, cfg.dt, steps);
    TrainingSample s;
    s.X_t = Xa;
    s.X_tT = Xb;
    s.rho = basis.evaluate(Xb.concat()) - basis.evaluate(Xa.concat());
    s.reinforcement = integral;
    return s;
  };

  if (cfg.mode == SamplingMode::Trajectory) {
    AugmentedState X = cfg.x0;
    for (int p = 0; p < cfg.count; ++p) {
      TrainingSample s = make_sample(X);
      X = s.X_tT;
      samples.push_back(std::move(s));
    }
  } else {
    const int dim = model.n1 + model.n2;
    if (cfg.omega_lo.size() != dim || cfg.omega_hi.size() != dim) {
      throw DimensionMismatch("mesh bounds do not match state dimension");
    }
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int attempts = 0;
    const int max_attempts = 100 * cfg.count + 100;
    while (static_cast<int>(samples.size()) < cfg.count) {
      if (++attempts > max_attempts) {
        throw NearSingular("mesh sampling kept hitting singular geometry");
      }
      Eigen::VectorXd x(dim);
      for (int i = 0; i < dim; ++i) {
        x[i] = cfg.omega_lo[i] + (cfg.omega_hi[i] - cfg.omega_lo[i]) * unit(rng);
      }
      try {
        samples.push_back(make_sample(AugmentedState::split(x, model.n1, model.n2)));
      } catch (const NearSingular&) {
        // discard mesh points whose geometry is unusable
      }
    }
  }
  return samples;
}

LsResult ls_update(const std::vector<TrainingSample>& samples, double ridge) {
  if (samples.empty()) {
    throw DimensionMismatch("no training samples");
  }
  const int p = static_cast<int>(samples.size());
  const int M = static_cast<int>(samples.front().rho.size());
  if (p < M) {
    std::ostringstream os;
    os << "need at least M=" << M << " samples, got " << p;
    throw RankDeficient(os.str());
  }
  Eigen::MatrixXd L(p, M);
  Eigen::VectorXd Y(p);
  for (int i = 0; i < p; ++i) {
    L.row(i) = samples[i].rho.transpose();
    Y[i] = samples[i].reinforcement;
  }

  // Column equilibration: high-degree monomials dwarf the quadratic head by
  // many orders of magnitude, so solve in scaled coordinates and map back.
  Eigen::VectorXd scale(M);
  for (int j = 0; j < M; ++j) {
    const double s = L.col(j).cwiseAbs().maxCoeff();
    scale[j] = (s > 0.0) ? s : 1.0;
  }
  Eigen::MatrixXd Ls = L * scale.cwiseInverse().asDiagonal();

  Eigen::MatrixXd N = Ls.transpose() * Ls;
  const double ridge_value = ridge * N.diagonal().mean();
  N.diagonal().array() += ridge_value;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(N);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  const double cond = (lo > 0.0) ? hi / lo : std::numeric_limits<double>::infinity();
  if (!(cond < 1e12)) {
    std::ostringstream os;
    os << "normal equations ill-conditioned (cond=" << cond << ")";
    throw RankDeficient(os.str());
  }

  LsResult out;
  out.weights = scale.cwiseInverse().asDiagonal() * N.ldlt().solve(-(Ls.transpose() * Y));
  out.residual_rms = std::sqrt((L * out.weights + Y).squaredNorm() / p);
  out.condition = cond;
  return out;
}

double evaluate_performance(const SystemModel& model, const CostConfig& cost,
                            const ValueApproximator& va, const std::vector<AugmentedState>& probes,
                            double horizon, double dt) {
  if (probes.empty()) {
    throw DimensionMismatch("performance metric needs at least one probe state");
  }
  Policy policy = make_greedy_policy(va, model, cost);
  const int steps = window_steps(horizon, dt);
  double total = 0.0;
  for (const AugmentedState& X0 : probes) {
    total += run_window(model, cost, policy, X0, dt, steps).second;
  }
  return total / static_cast<double>(probes.size());
}

PolicyIterate iterate(const SystemModel& model, const CostConfig& cost,
                      const PolicyIterate& iterate_k, const SamplingConfig& cfg) {
  Policy policy = make_greedy_policy(iterate_k.va, model, cost);
  auto samples = collect_samples(model, cost, policy, iterate_k.va.basis(), cfg);
  LsResult ls = ls_update(samples, cfg.ridge);
  ValueApproximator next_va(iterate_k.va.basis(), ls.weights);
  const double perf =
      evaluate_performance(model, cost, next_va, cfg.probes, cfg.probe_horizon, cfg.dt);
  return PolicyIterate{std::move(next_va), iterate_k.k + 1, perf};
}

bool has_converged(const PolicyIterate& prev, const PolicyIterate& next, double eps) {
  return std::abs(next.perf - prev.perf) < eps;
}

SolveResult solve(const SystemModel& model, const CostConfig& cost, const BasisSet& basis,
                  const SamplingConfig& cfg, double eps, int max_iterations) {
  constexpr double kMonotoneTol = 1e-3;

  ValueApproximator va0(basis, Eigen::VectorXd::Zero(basis.size()));
  PolicyIterate current{va0, 0,
                        evaluate_performance(model, cost, va0, cfg.probes, cfg.probe_horizon,
                                             cfg.dt)};
  std::vector<IterationRecord> log;
  bool converged = false;
  log.push_back({0, 0.0, current.perf, 0.0});

  for (int k = 0; k < max_iterations; ++k) {
    Policy policy = make_greedy_policy(current.va, model, cost);
    auto samples = collect_samples(model, cost, policy, current.va.basis(), cfg);
    LsResult ls = ls_update(samples, cfg.ridge);
    ValueApproximator next_va(current.va.basis(), ls.weights);
    const double perf =
        evaluate_performance(model, cost, next_va, cfg.probes, cfg.probe_horizon, cfg.dt);
    PolicyIterate next{std::move(next_va), current.k + 1, perf};

    const double guard = kMonotoneTol * std::max(1.0, std::abs(current.perf));
    if (next.perf > current.perf + guard) {
      // The fit would degrade the policy; keep the last good iterate.
      converged = true;
      break;
    }
    const double wdelta = (next.va.weights() - current.va.weights()).norm();
    log.push_back({next.k, ls.residual_rms, next.perf, wdelta});
    const bool done = has_converged(current, next, eps);
    current = std::move(next);
    if (done) {
      converged = true;
      break;
    }
  }
  return SolveResult{std::move(current), std::move(log), converged};
}

}  // namespace ucopt
