#include "ucopt/system_model.hpp"

#include <cmath>
#include <sstream>

namespace ucopt {

namespace {

void check_dims(const SystemModel& model, const AugmentedState& X) {
  if (X.x1.size() != model.n1 || X.x2.size() != model.n2) {
    std::ostringstream os;
    os << "state dims (" << X.x1.size() << "," << X.x2.size() << ") do not match model ("
       << model.n1 << "," << model.n2 << ")";
    throw DimensionMismatch(os.str());
  }
}

}  // namespace

ConstraintWindow constraint_window(const SystemModel& model, const AugmentedState& X) {
  check_dims(model, X);
  auto [d, h] = model.constraint(X.x1, X.x2);
  Eigen::VectorXd us = model.baseline(X.x1, X.x2);
  if (d.size() != model.m || h.size() != model.m || us.size() != model.m) {
    throw DimensionMismatch("constraint/baseline output length differs from m");
  }
  for (int i = 0; i < model.m; ++i) {
    if (!(d[i] < us[i] && us[i] < h[i])) {
      std::ostringstream os;
      os << "baseline input outside open bound window on channel " << i << ": d=" << d[i]
         << " us=" << us[i] << " h=" << h[i];
      throw AssumptionViolated(os.str());
    }
  }
  return ConstraintWindow{std::move(d), std::move(h), std::move(us)};
}

Eigen::MatrixXd augmented_input_map(const SystemModel& model, const AugmentedState& X) {
  Eigen::MatrixXd g = model.g1(X.x1, X.x2);
  if (g.rows() != model.n1 || g.cols() != model.m) {
    throw DimensionMismatch("g1 output shape differs from n1 x m");
  }
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(model.n1 + model.n2, model.m);
  G.topRows(model.n1) = g;
  return G;
}

Eigen::VectorXd eval_augmented_dynamics(const SystemModel& model, const AugmentedState& X,
                                        const Eigen::VectorXd& u_hat) {
  if (u_hat.size() != model.m) {
    throw DimensionMismatch("u_hat length differs from m");
  }
  ConstraintWindow w = constraint_window(model, X);
  Eigen::MatrixXd g = model.g1(X.x1, X.x2);
  if (g.rows() != model.n1 || g.cols() != model.m) {
    throw DimensionMismatch("g1 output shape differs from n1 x m");
  }
  Eigen::VectorXd dx(model.n1 + model.n2);
  dx.head(model.n1) = model.f1(X.x1, X.x2) + g * (w.us + u_hat);
  if (model.n2 > 0) {
    dx.tail(model.n2) = model.f2(X.x2);
  }
  return dx;
}

namespace {

Eigen::VectorXd checked_policy_output(const SystemModel& model, const AugmentedState& X,
                                      const Policy& policy) {
  Eigen::VectorXd u_hat = policy(X);
  ConstraintWindow w = constraint_window(model, X);
  for (int i = 0; i < model.m; ++i) {
    const double lo = w.d[i] - w.us[i];
    const double hi = w.h[i] - w.us[i];
    if (!(u_hat[i] >= lo && u_hat[i] <= hi)) {
      std::ostringstream os;
      os << "policy output " << u_hat[i] << " outside virtual interval [" << lo << "," << hi
         << "] on channel " << i;
      throw SaturationExceeded(os.str());
    }
  }
  return u_hat;
}

}  // namespace

AugmentedState rk4_step(const SystemModel& model, const AugmentedState& X, const Policy& policy,
                        double dt) {
  auto deriv = [&](const Eigen::VectorXd& x) {
    AugmentedState s = AugmentedState::split(x, model.n1, model.n2);
    Eigen::VectorXd u_hat = checked_policy_output(model, s, policy);
    return eval_augmented_dynamics(model, s, u_hat);
  };

  Eigen::VectorXd x0 = X.concat();
  Eigen::VectorXd k1 = deriv(x0);
  Eigen::VectorXd k2 = deriv(x0 + 0.5 * dt * k1);
  Eigen::VectorXd k3 = deriv(x0 + 0.5 * dt * k2);
  Eigen::VectorXd k4 = deriv(x0 + dt * k3);
  Eigen::VectorXd x1 = x0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!x1.allFinite()) {
    throw DivergedTrajectory("non-finite state after RK4 step");
  }
  AugmentedState next = AugmentedState::split(x1, model.n1, model.n2);
  if (model.normalize) {
    model.normalize(next.x1, next.x2);
  }
  return next;
}

std::vector<AugmentedState> integrate_rk4(const SystemModel& model, const Policy& policy,
                                          const AugmentedState& X0, double dt, int steps) {
  if (!(dt > 0.0)) {
    throw DimensionMismatch("dt must be positive");
  }
  std::vector<AugmentedState> traj;
  traj.reserve(static_cast<std::size_t>(steps) + 1);
  traj.push_back(X0);
  for (int i = 0; i < steps; ++i) {
    traj.push_back(rk4_step(model, traj.back(), policy, dt));
  }
  return traj;
}

}  // namespace ucopt
