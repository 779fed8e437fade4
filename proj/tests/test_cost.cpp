#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "ucopt/cost.hpp"

using namespace ucopt;

namespace {

// Adaptive Simpson quadrature; independent oracle for the control cost.
double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fb,
               double fm, double eps, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * eps) {
    return left + right + (left + right - whole) / 15.0;
  }
  return simpson(f, a, m, fa, fm, flm, eps / 2.0, depth - 1) +
         simpson(f, m, b, fm, fb, frm, eps / 2.0, depth - 1);
}

double quad(const std::function<double(double)>& f, double a, double b, double eps = 1e-13) {
  const double m = 0.5 * (a + b);
  return simpson(f, a, b, f(a), f(b), f(m), eps, 48);
}

// U_n for one channel by numerical integration of 2 r lam atanh(s/lam).
double control_cost_quadrature(double u, double lam, double r) {
  auto integrand = [lam, r](double s) { return 2.0 * r * lam * std::atanh(s / lam); };
  return quad(integrand, 0.0, u);
}

ConstraintWindow window(double d, double h, double us) {
  return ConstraintWindow{Eigen::VectorXd::Constant(1, d), Eigen::VectorXd::Constant(1, h),
                          Eigen::VectorXd::Constant(1, us)};
}

}  // namespace

TEST_CASE("lambda-bar picks the side the input would push toward") {
  ConstraintWindow w = window(-0.8, 1.5, 0.2);  // virtual interval (-1.0, 1.3)
  LambdaBar up = select_lambda_bar(w, Eigen::VectorXd::Constant(1, 0.7));
  CHECK(up.values[0] == doctest::Approx(1.3));
  CHECK(up.upper[0]);
  LambdaBar down = select_lambda_bar(w, Eigen::VectorXd::Constant(1, -0.7));
  CHECK(down.values[0] == doctest::Approx(1.0));
  CHECK_FALSE(down.upper[0]);
  LambdaBar tie = select_lambda_bar(w, Eigen::VectorXd::Zero(1));
  CHECK(tie.upper[0]);
}

TEST_CASE("closed-form control cost matches quadrature to 1e-8 relative") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> lam_dist(0.2, 3.0);
  std::uniform_real_distribution<double> frac(-0.98, 0.98);
  std::uniform_real_distribution<double> r_dist(0.1, 5.0);
  for (int trial = 0; trial < 500; ++trial) {
    const double lam = lam_dist(rng);
    const double u = lam * frac(rng);
    const double r = r_dist(rng);
    LambdaBar lb{Eigen::VectorXd::Constant(1, lam), {true}};
    const double closed = control_cost(Eigen::VectorXd::Constant(1, u), lb,
                                       Eigen::VectorXd::Constant(1, r));
    const double reference = control_cost_quadrature(u, lam, r);
    const double scale = std::max(std::abs(reference), 1e-12);
    CHECK(std::abs(closed - reference) / scale < 1e-8);
  }
}

TEST_CASE("control cost spot value") {
  // r = 1, lambda = 1, u = 0.5.
  LambdaBar lb{Eigen::VectorXd::Ones(1), {true}};
  const double v = control_cost(Eigen::VectorXd::Constant(1, 0.5), lb, Eigen::VectorXd::Ones(1));
  CHECK(v == doctest::Approx(0.26161).epsilon(5e-5));
}

TEST_CASE("control cost is nonnegative, even, and zero at zero") {
  LambdaBar lb{Eigen::VectorXd::Constant(1, 1.7), {true}};
  Eigen::VectorXd r = Eigen::VectorXd::Constant(1, 0.4);
  CHECK(control_cost(Eigen::VectorXd::Zero(1), lb, r) == 0.0);
  for (double u : {0.1, 0.9, 1.6}) {
    const double plus = control_cost(Eigen::VectorXd::Constant(1, u), lb, r);
    const double minus = control_cost(Eigen::VectorXd::Constant(1, -u), lb, r);
    CHECK(plus > 0.0);
    CHECK(plus == doctest::Approx(minus).epsilon(1e-14));
  }
}

TEST_CASE("control cost rejects saturation") {
  LambdaBar lb{Eigen::VectorXd::Ones(1), {true}};
  CHECK_THROWS_AS(control_cost(Eigen::VectorXd::Ones(1), lb, Eigen::VectorXd::Ones(1)),
                  SaturationExceeded);
  CHECK_THROWS_AS(control_cost(Eigen::VectorXd::Constant(1, -1.2), lb, Eigen::VectorXd::Ones(1)),
                  SaturationExceeded);
}

TEST_CASE("optimality gap is nonnegative at the stationary policy") {
  // u* = -lam tanh(G'V_X / (2 lam r)) minimizes U_n(u) + V_X' G u.
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  int checked = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const double lam = 0.3 + 2.0 * std::abs(unit(rng));
    const double r = 0.2 + 2.0 * std::abs(unit(rng));
    // Keep the tanh argument moderate so u* stays strictly inside the scale.
    Eigen::VectorXd V_X = Eigen::VectorXd::Constant(1, 1.5 * unit(rng));
    Eigen::MatrixXd G = Eigen::MatrixXd::Constant(1, 1, unit(rng));
    const double gv = (G.transpose() * V_X)(0);
    Eigen::VectorXd u_star =
        Eigen::VectorXd::Constant(1, -lam * std::tanh(gv / (2.0 * lam * r)));
    Eigen::VectorXd u = Eigen::VectorXd::Constant(1, 0.999 * lam * unit(rng));
    LambdaBar lb{Eigen::VectorXd::Constant(1, lam), {true}};
    const double gap =
        optimality_gap(u, u_star, V_X, G, lb, Eigen::VectorXd::Constant(1, r));
    CHECK(gap >= -1e-12);
    ++checked;
  }
  CHECK(checked == 10000);
}

TEST_CASE("hamiltonian assembles its three pieces") {
  Eigen::VectorXd V_X(2);
  V_X << 1.0, -2.0;
  Eigen::VectorXd F(2);
  F << 0.5, 0.25;
  Eigen::MatrixXd G(2, 1);
  G << 1.0, 1.0;
  Eigen::VectorXd u = Eigen::VectorXd::Constant(1, 0.3);
  LambdaBar lb{Eigen::VectorXd::Ones(1), {true}};
  Eigen::VectorXd r = Eigen::VectorXd::Ones(1);
  const double expected = V_X.dot(F + G * u) + 2.0 + control_cost(u, lb, r);
  CHECK(hamiltonian(V_X, F, G, u, 2.0, lb, r) == doctest::Approx(expected).epsilon(1e-14));
}
