#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "ucopt/errors.hpp"
#include "ucopt/system_model.hpp"

namespace ucopt {

/// Weights of the running cost Q(x1) + U_n(u_hat).
struct CostConfig {
  /// Diagonal of the positive input-weight matrix R.
  Eigen::VectorXd r;
  /// Nonnegative state cost Q(x1).
  std::function<double(const Eigen::VectorXd&)> state_cost;
};

/// Per-channel saturation scale for the tanh policy and the non-quadratic
/// control cost. `upper` records which side of the (unsymmetrical) window
/// was selected.
struct LambdaBar {
  Eigen::VectorXd values;
  std::vector<bool> upper;
};

/// Selects the side-dependent saturation scale from the sign of
/// z = -G' V_X:  lambda_i = h_i - us_i when z_i >= 0, else us_i - d_i.
/// Ties at z_i = 0 take the upper side.
LambdaBar select_lambda_bar(const ConstraintWindow& window, const Eigen::VectorXd& z);

/// Non-quadratic control cost
///   U_n(u) = 2 sum_i r_i lambda_i int_0^{u_i} atanh(s/lambda_i) ds,
/// evaluated in closed form. Requires |u_i| < lambda_i.
double control_cost(const Eigen::VectorXd& u_hat, const LambdaBar& lambda,
                    const Eigen::VectorXd& r);

/// Hamiltonian H = V_X'(F + G u) + Q(x1) + U_n(u).
double hamiltonian(const Eigen::VectorXd& V_X, const Eigen::VectorXd& F,
                   const Eigen::MatrixXd& G, const Eigen::VectorXd& u_hat, double q_val,
                   const LambdaBar& lambda, const Eigen::VectorXd& r);

/// Optimality-gap integrand
///   M_u = U_n(u) - U_n(u*) + V_X' G (u - u*),
/// nonnegative whenever u* is the stationary policy for V_X.
double optimality_gap(const Eigen::VectorXd& u_hat, const Eigen::VectorXd& u_hat_star,
                      const Eigen::VectorXd& V_X, const Eigen::MatrixXd& G,
                      const LambdaBar& lambda, const Eigen::VectorXd& r);

}  // namespace ucopt
