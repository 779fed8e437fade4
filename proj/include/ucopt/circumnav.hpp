#pragma once

#include <Eigen/Dense>
#include <functional>

#include "ucopt/cost.hpp"
#include "ucopt/system_model.hpp"

namespace ucopt {

/// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

/// Fixed-wing circumnavigation scenario parameters.
struct CircumnavScenario {
  double v_t = 5.0;        // target speed (m/s)
  double v_r = 10.0;       // relative speed (m/s), must exceed v_t
  double h_alt = 80.0;     // UAV altitude (m)
  double r_d = 50.0;       // desired loiter radius (m)
  double omega_max = 1.5;  // max heading rate (rad/s)
  double sigma_r = 1e-3;   // range-noise scale (1/m)
  double sigma_phi = 1e-4 * 3.14159265358979323846;  // bearing-noise std (rad)
  double c1 = 1.0;         // state-cost coefficient
  double k_vf = 6.0;       // vector-field proportional gain
  double r_weight = 0.5;   // control-cost weight r1
  /// Target heading rate theta_t -> theta_t'.
  std::function<double(double)> target_turn;
};

/// Reduced circumnavigation state; world poses are carried for logging and
/// for the world-frame consistency checks.
struct CircumnavState {
  double e_r = 0.0;      // loiter-radius error (m)
  double eta = 0.0;      // bearing-alignment angle (rad)
  double theta = 0.0;    // UAV heading (rad)
  double theta_t = 0.0;  // target heading (rad)
  double x = 0.0, y = 0.0;
  double x_t = 0.0, y_t = 0.0;

  double r_h(double r_d) const { return r_d + e_r; }
};

/// Information-reward shaping constants.
struct ShapingParams {
  double kappa = 0.0;
  double q_max = 0.0;
};

/// Reference scenario parameters with the turning
/// target h(theta_t) = 0.5 - 0.5 sin^2(theta_t). c1 is set to 1/Q_max.
CircumnavScenario reference_scenario();

/// Positive root of v^2 + v_t^2 - 2 v v_t cos(theta - theta_t) = v_r^2.
double speed_command(const CircumnavScenario& scn, double theta, double theta_t);

/// Heading of the relative velocity, theta_r in (-pi, pi].
double relative_heading(const CircumnavScenario& scn, double v, double theta, double theta_t);

/// Derivative of (e_r, eta, theta, theta_t) under total heading rate
/// u_theta. Throws NearSingular when |cos(theta_r - theta)| falls below the
/// singularity floor.
Eigen::Vector4d x_dynamics(const CircumnavScenario& scn, const CircumnavState& state,
                           double u_theta);

/// Vector-field guidance law; output saturated to [-omega_max, omega_max].
double vf_baseline(const CircumnavScenario& scn, const CircumnavState& state);

/// Fisher information matrix of the range/bearing radar at relative
/// position (x_r, y_r).
Eigen::Matrix2d fisher_matrix(const CircumnavScenario& scn, double x_r, double y_r);

/// Fisher information rate L(r_h, eta); the quadratic form of fisher_matrix
/// with the relative velocity vector.
double fisher_L(const CircumnavScenario& scn, double r_h, double eta);

/// Solves the stationarity condition that places the peak of the shaped
/// reward exactly at r_h = r_d, by bisection on kappa in (0, r_d).
ShapingParams solve_kappa(const CircumnavScenario& scn);

/// Shaped information reward sqrt(L(r_h, eta)) * tanh(r_h - kappa).
double q_hat(const CircumnavScenario& scn, const ShapingParams& shaping, double r_h, double eta);

/// Residual of the stationarity condition at kappa (monotone in r_d - kappa).
double kappa_residual(const CircumnavScenario& scn, double kappa);

/// One logged trajectory point for metric accumulation.
struct MetricPoint {
  double r_h = 0.0;
  double eta = 0.0;
  double u_hat = 0.0;
  double u_s = 0.0;
};

/// Trapezoidal accumulated Fisher information D = int sqrt(L) dt and
/// performance index J = int [c1 (Q_max - Q_hat) + U_n(u_hat)] dt over a
/// uniformly sampled trajectory.
std::pair<double, double> accumulate_metrics(const std::vector<MetricPoint>& trajectory,
                                             double dt, const CircumnavScenario& scn,
                                             const ShapingParams& shaping);

/// Control cost U_n(u_hat) at one circumnavigation state, with the
/// saturation side taken from the sign of u_hat.
double circumnav_control_cost(const CircumnavScenario& scn, double u_s, double u_hat);

/// The scenario as a control-affine SystemModel: x1 = (e_r, eta, theta),
/// x2 = (theta_t), input bounds [-omega_max, omega_max], VF baseline
/// (pulled strictly inside the bounds). Angles are wrapped after each
/// integration step.
SystemModel make_system_model(const CircumnavScenario& scn);

/// Running state cost c1 (Q_max - Q_hat(r_h, eta)) paired with the scenario
/// control weight.
CostConfig make_cost_config(const CircumnavScenario& scn, const ShapingParams& shaping);

/// Builds a consistent state from polar initial conditions: target at the
/// origin with heading theta_t, UAV at bearing phi and range r_h, heading
/// chosen so the relative-speed relation holds with alignment angle eta.
CircumnavState state_from_polar(const CircumnavScenario& scn, double r_h, double eta, double phi,
                                double theta_t);

/// Reduced state as an AugmentedState for the solver modules.
AugmentedState to_augmented(const CircumnavState& s);

}  // namespace ucopt
