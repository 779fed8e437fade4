#pragma once

#include <Eigen/Dense>
#include <functional>
#include <utility>
#include <vector>

#include "ucopt/errors.hpp"

namespace ucopt {

/// State of the augmented system, split into the controlled block x1 and
/// the uncontrolled block x2.
struct AugmentedState {
  Eigen::VectorXd x1;
  Eigen::VectorXd x2;

  Eigen::VectorXd concat() const {
    Eigen::VectorXd x(x1.size() + x2.size());
    x << x1, x2;
    return x;
  }

  static AugmentedState split(const Eigen::VectorXd& x, int n1, int n2) {
    AugmentedState s;
    s.x1 = x.head(n1);
    s.x2 = x.tail(n2);
    return s;
  }
};

/// Per-channel input bounds [d, h] together with the baseline input u_s
/// evaluated at the same state. Valid only when d < u_s < h componentwise;
/// the virtual-input interval (d - u_s, h - u_s) then contains zero.
struct ConstraintWindow {
  Eigen::VectorXd d;
  Eigen::VectorXd h;
  Eigen::VectorXd us;
};

/// Control-affine plant
///   x1' = f1(x1,x2) + g1(x1,x2) u,   x2' = f2(x2),
/// with state-dependent input bounds and a baseline (initially admissible)
/// policy u_s. The internal dynamics f1/f2 are available to the simulator
/// only; solver code must restrict itself to g1, the constraint maps and
/// observed transitions.
struct SystemModel {
  int n1 = 0;
  int n2 = 0;
  int m = 0;

  std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)> f1;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&, const Eigen::VectorXd&)> g1;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> f2;
  /// Returns (lower bounds d, upper bounds h) for the total input.
  std::function<std::pair<Eigen::VectorXd, Eigen::VectorXd>(const Eigen::VectorXd&,
                                                            const Eigen::VectorXd&)>
      constraint;
  /// Baseline admissible policy u_s.
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)> baseline;

  /// Optional renormalization applied after every integration step
  /// (e.g. angle wrapping). May be null.
  std::function<void(Eigen::VectorXd&, Eigen::VectorXd&)> normalize;
};

/// Virtual-input policy: maps an augmented state to u_hat.
using Policy = std::function<Eigen::VectorXd(const AugmentedState&)>;

/// Evaluates the constraint window at X. Throws AssumptionViolated unless
/// d < u_s < h strictly on every channel.
ConstraintWindow constraint_window(const SystemModel& model, const AugmentedState& X);

/// Input map of the augmented system: G(X) = [g1' , 0']'.
Eigen::MatrixXd augmented_input_map(const SystemModel& model, const AugmentedState& X);

/// Augmented dynamics X' = F(X) + G(X) u_hat with F = [(f1 + g1 u_s)', f2']'.
/// The last n2 components do not depend on u_hat.
Eigen::VectorXd eval_augmented_dynamics(const SystemModel& model, const AugmentedState& X,
                                        const Eigen::VectorXd& u_hat);

/// One fixed-step RK4 step of the closed loop under `policy`; the policy is
/// re-evaluated at every stage and checked against the virtual-input window.
AugmentedState rk4_step(const SystemModel& model, const AugmentedState& X,
                        const Policy& policy, double dt);

/// Fixed-step RK4 rollout; returns steps+1 states including X0.
std::vector<AugmentedState> integrate_rk4(const SystemModel& model, const Policy& policy,
                                          const AugmentedState& X0, double dt, int steps);

}  // namespace ucopt
