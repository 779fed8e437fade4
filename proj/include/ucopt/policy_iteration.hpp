#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "ucopt/cost.hpp"
#include "ucopt/system_model.hpp"
#include "ucopt/value_function.hpp"

namespace ucopt {

/// One reinforcement tuple over an interval [t, t+T].
struct TrainingSample {
  AugmentedState X_t;
  AugmentedState X_tT;
  /// sigma_M(X(t+T)) - sigma_M(X(t)).
  Eigen::VectorXd rho;
  /// Integral of Q(x1) + U_n(u_hat) over the interval.
  double reinforcement = 0.0;
};

/// Value iterate V^(k) with its probe-set performance estimate.
struct PolicyIterate {
  ValueApproximator va;
  int k = 0;
  double perf = 0.0;
};

enum class SamplingMode { Trajectory, Mesh };

struct SamplingConfig {
  double T = 0.05;   // reinforcement interval
  double dt = 0.005; // integration step (200 Hz)
  int count = 200;   // samples per iteration
  SamplingMode mode = SamplingMode::Trajectory;

  /// Trajectory mode: rollout start. Consecutive non-overlapping windows.
  AugmentedState x0;

  /// Mesh mode: uniform box over the concatenated state.
  Eigen::VectorXd omega_lo;
  Eigen::VectorXd omega_hi;
  std::uint64_t seed = 0;

  double ridge = 1e-8;

  /// Fixed initial states for the stopping/performance metric.
  std::vector<AugmentedState> probes;
  double probe_horizon = 5.0;
};

struct LsResult {
  Eigen::VectorXd weights;
  double residual_rms = 0.0;
  double condition = 0.0;
};

struct IterationRecord {
  int k = 0;
  double residual_rms = 0.0;
  double perf = 0.0;
  double weight_delta = 0.0;
};

struct SolveResult {
  PolicyIterate final;
  std::vector<IterationRecord> log;
  bool converged = false;
};

/// Saturated greedy policy u_hat = -lambda tanh((1/2)(lambda R)^-1 G' V_X),
/// with the saturation side chosen from the sign of z = -G' V_X.
Eigen::VectorXd greedy_policy(const ValueApproximator& va, const SystemModel& model,
                              const CostConfig& cost, const AugmentedState& X);

/// Wraps greedy_policy as a Policy callable.
Policy make_greedy_policy(const ValueApproximator& va, const SystemModel& model,
                          const CostConfig& cost);

/// Collects reinforcement tuples under `policy`. The reinforcement integral
/// uses the trapezoidal rule over the same RK4 steps as the rollout; the
/// saturation scale inside the integrand is re-selected at every step.
std::vector<TrainingSample> collect_samples(const SystemModel& model, const CostConfig& cost,
                                            const Policy& policy, const BasisSet& basis,
                                            const SamplingConfig& cfg);

/// Ridge-regularized least squares for the Bellman-residual weights:
/// (L'L + ridge*mean(diag(L'L)) I) w = -L'Y. Throws RankDeficient when the
/// regularized system is still ill-conditioned (cond > 1e12).
LsResult ls_update(const std::vector<TrainingSample>& samples, double ridge);

/// Mean integrated cost from the probe states over the fixed horizon, under
/// the greedy policy of `va`.
double evaluate_performance(const SystemModel& model, const CostConfig& cost,
                            const ValueApproximator& va, const std::vector<AugmentedState>& probes,
                            double horizon, double dt);

/// One policy-iteration step: evaluate the current greedy policy over fresh
/// samples, re-fit the value weights, re-estimate performance.
PolicyIterate iterate(const SystemModel& model, const CostConfig& cost,
                      const PolicyIterate& iterate_k, const SamplingConfig& cfg);

/// True when the probe-set performance of two iterates differs by less than eps.
bool has_converged(const PolicyIterate& prev, const PolicyIterate& next, double eps);

/// Full PI loop from zero virtual input. Stops on convergence, on the
/// iteration cap, or when an iterate would degrade the probe performance by
/// more than the monotonicity tolerance (the previous iterate is kept).
SolveResult solve(const SystemModel& model, const CostConfig& cost, const BasisSet& basis,
                  const SamplingConfig& cfg, double eps, int max_iterations);

}  // namespace ucopt
