#include "ucopt/cost.hpp"

#include <cmath>
#include <sstream>

namespace ucopt {

LambdaBar select_lambda_bar(const ConstraintWindow& window, const Eigen::VectorXd& z) {
  const int m = static_cast<int>(window.us.size());
  if (z.size() != m) {
    throw DimensionMismatch("z length differs from m");
  }
  LambdaBar lam;
  lam.values.resize(m);
  lam.upper.resize(m);
  for (int i = 0; i < m; ++i) {
    if (z[i] >= 0.0) {
      lam.values[i] = window.h[i] - window.us[i];
      lam.upper[i] = true;
    } else {
      lam.values[i] = window.us[i] - window.d[i];
      lam.upper[i] = false;
    }
  }
  return lam;
}

double control_cost(const Eigen::VectorXd& u_hat, const LambdaBar& lambda,
                    const Eigen::VectorXd& r) {
  const int m = static_cast<int>(u_hat.size());
  if (lambda.values.size() != m || r.size() != m) {
    throw DimensionMismatch("control_cost input lengths disagree");
  }
  double total = 0.0;
  for (int i = 0; i < m; ++i) {
    const double lam = lambda.values[i];
    const double x = u_hat[i] / lam;
    if (!(std::abs(x) < 1.0)) {
      std::ostringstream os;
      os << "|u_hat| = " << std::abs(u_hat[i]) << " reached saturation scale " << lam
         << " on channel " << i;
      throw SaturationExceeded(os.str());
    }
    // 2 r lam int_0^{u} atanh(s/lam) ds = r lam^2 (2 x atanh(x) + ln(1 - x^2))
    total += r[i] * lam * lam * (2.0 * x * std::atanh(x) + std::log1p(-x * x));
  }
  return total;
}

double hamiltonian(const Eigen::VectorXd& V_X, const Eigen::VectorXd& F,
                   const Eigen::MatrixXd& G, const Eigen::VectorXd& u_hat, double q_val,
                   const LambdaBar& lambda, const Eigen::VectorXd& r) {
  return V_X.dot(F + G * u_hat) + q_val + control_cost(u_hat, lambda, r);
}

double optimality_gap(const Eigen::VectorXd& u_hat, const Eigen::VectorXd& u_hat_star,
                      const Eigen::VectorXd& V_X, const Eigen::MatrixXd& G,
                      const LambdaBar& lambda, const Eigen::VectorXd& r) {
  return control_cost(u_hat, lambda, r) - control_cost(u_hat_star, lambda, r) +
         V_X.dot(G * (u_hat - u_hat_star));
}

}  // namespace ucopt
