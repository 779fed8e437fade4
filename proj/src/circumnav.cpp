#include "ucopt/circumnav.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <utility>

namespace ucopt {

namespace {

constexpr double kPi = std::numbers::pi;

// Below this value of |cos(theta_r - theta)| the input coefficient b2 blows
// up and the reduced dynamics is unusable.
constexpr double kSingularFloor = 0.05;

// The VF law may saturate exactly at the bound; the baseline handed to the
// solver is pulled strictly inside so the bound window stays open.
constexpr double kBaselineMargin = 1e-6;

}  // namespace

double wrap_angle(double a) {
  a = std::fmod(a + kPi, 2.0 * kPi);
  if (a <= 0.0) a += 2.0 * kPi;
  return a - kPi;
}

CircumnavScenario reference_scenario() {
  CircumnavScenario scn;
  scn.target_turn = [](double theta_t) {
    const double s = std::sin(theta_t);
    return 0.5 - 0.5 * s * s;
  };
  scn.c1 = 1.0 / solve_kappa(scn).q_max;
  return scn;
}

double speed_command(const CircumnavScenario& scn, double theta, double theta_t) {
  const double s = std::sin(theta - theta_t);
  return scn.v_t * std::cos(theta - theta_t) +
         std::sqrt(scn.v_r * scn.v_r - scn.v_t * scn.v_t * s * s);
}

double relative_heading(const CircumnavScenario& scn, double v, double theta, double theta_t) {
  return std::atan2(scn.v_t * std::sin(theta_t) - v * std::sin(theta),
                    scn.v_t * std::cos(theta_t) - v * std::cos(theta));
}

namespace {

struct Geometry {
  double v;        // commanded ground speed
  double theta_r;  // relative velocity heading
  double c;        // cos(theta_r - theta)
};

Geometry geometry_at(const CircumnavScenario& scn, double theta, double theta_t) {
  Geometry g;
  g.v = speed_command(scn, theta, theta_t);
  g.theta_r = relative_heading(scn, g.v, theta, theta_t);
  g.c = std::cos(g.theta_r - theta);
  if (std::abs(g.c) < kSingularFloor) {
    std::ostringstream os;
    os << "|cos(theta_r - theta)| = " << std::abs(g.c) << " below singularity floor";
    throw NearSingular(os.str());
  }
  return g;
}

}  // namespace

Eigen::Vector4d x_dynamics(const CircumnavScenario& scn, const CircumnavState& state,
                           double u_theta) {
  const double r_h = state.r_h(scn.r_d);
  if (!(r_h > 0.0)) {
    throw DegenerateGeometry("loiter radius must be positive");
  }
  Geometry g = geometry_at(scn, state.theta, state.theta_t);
  const double h_t = scn.target_turn(state.theta_t);
  Eigen::Vector4d dx;
  dx[0] = scn.v_r * std::sin(state.eta);
  dx[1] = scn.v_r * std::cos(state.eta) / r_h -
          scn.v_t * std::cos(state.theta - state.theta_t) / (scn.v_r * g.c) * h_t +
          g.v / (scn.v_r * g.c) * u_theta;
  dx[2] = u_theta;
  dx[3] = h_t;
  return dx;
}

double vf_baseline(const CircumnavScenario& scn, const CircumnavState& state) {
  const double r_h = state.r_h(scn.r_d);
  if (!(r_h > 0.0)) {
    throw DegenerateGeometry("loiter radius must be positive");
  }
  // Relative bearing recovered from the alignment angle.
  const double v = speed_command(scn, state.theta, state.theta_t);
  const double theta_r = relative_heading(scn, v, state.theta, state.theta_t);
  const double phi = wrap_angle(theta_r - kPi / 2.0 + state.eta);
  const double x_r = r_h * std::cos(phi);
  const double y_r = r_h * std::sin(phi);

  const double rh2 = r_h * r_h;
  const double rd2 = scn.r_d * scn.r_d;
  // Field vector including the (negative) prefactor sign; only its direction
  // matters for theta_d.
  const double px = -(x_r * (rh2 - rd2) + y_r * (2.0 * scn.r_d * r_h));
  const double py = -(y_r * (rh2 - rd2) - x_r * (2.0 * scn.r_d * r_h));
  const double theta_d = std::atan2(py, px);

  // The field prescribes the desired heading of the relative velocity; with
  // a moving target the feedback has to act on theta_r, not on the UAV
  // heading itself, or the loop picks up a large bias.
  const double u = -scn.k_vf * wrap_angle(theta_r - theta_d);
  return std::clamp(u, -scn.omega_max, scn.omega_max);
}

Eigen::Matrix2d fisher_matrix(const CircumnavScenario& scn, double x_r, double y_r) {
  const double rh2 = x_r * x_r + y_r * y_r;
  if (!(rh2 > 0.0)) {
    throw DegenerateGeometry("Fisher matrix undefined at zero loiter radius");
  }
  const double r2 = rh2 + scn.h_alt * scn.h_alt;
  const double r4 = r2 * r2;
  const double r6 = r4 * r2;
  const double sr2 = scn.sigma_r * scn.sigma_r;
  const double sp2 = scn.sigma_phi * scn.sigma_phi;
  const double rh4 = rh2 * rh2;

  Eigen::Matrix2d fi;
  fi(0, 0) = x_r * x_r / (r6 * sr2) + y_r * y_r / (rh4 * sp2) + 8.0 * x_r * x_r / r4;
  fi(1, 1) = y_r * y_r / (r6 * sr2) + x_r * x_r / (rh4 * sp2) + 8.0 * y_r * y_r / r4;
  fi(0, 1) = fi(1, 0) =
      x_r * y_r / (r6 * sr2) - x_r * y_r / (rh4 * sp2) + 8.0 * x_r * y_r / r4;
  return fi;
}

double fisher_L(const CircumnavScenario& scn, double r_h, double eta) {
  if (!(r_h > 0.0)) {
    throw DegenerateGeometry("Fisher rate undefined at zero loiter radius");
  }
  const double rh2 = r_h * r_h;
  const double r2 = rh2 + scn.h_alt * scn.h_alt;
  const double r4 = r2 * r2;
  const double r6 = r4 * r2;
  const double vr2 = scn.v_r * scn.v_r;
  const double s2 = std::sin(eta) * std::sin(eta);
  const double c2 = std::cos(eta) * std::cos(eta);
  return vr2 * rh2 / (r6 * scn.sigma_r * scn.sigma_r) * s2 + 8.0 * rh2 * vr2 / r4 * s2 +
         vr2 / (rh2 * scn.sigma_phi * scn.sigma_phi) * c2;
}

double kappa_residual(const CircumnavScenario& scn, double kappa) {
  const double t = std::tanh(scn.r_d - kappa);
  return -t + scn.r_d * (1.0 - t * t);
}

ShapingParams solve_kappa(const CircumnavScenario& scn) {
  if (!(scn.r_d > 0.0)) {
    throw DegenerateGeometry("desired radius must be positive");
  }
  double lo = 0.0;
  double hi = scn.r_d;
  const double f_lo = kappa_residual(scn, lo);
  const double f_hi = kappa_residual(scn, hi);
  if (!(f_lo < 0.0 && f_hi > 0.0)) {
    std::ostringstream os;
    os << "stationarity residual does not bracket a root on (0, r_d): a(0)=" << f_lo
       << " a(r_d)=" << f_hi;
    throw Error(os.str());
  }
  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (lo + hi);
    const double f = kappa_residual(scn, mid);
    if (std::abs(f) < 1e-12) break;
    if (f < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  ShapingParams shaping;
  shaping.kappa = mid;
  shaping.q_max = std::sqrt(fisher_L(scn, scn.r_d, 0.0)) * std::tanh(scn.r_d - mid);
  return shaping;
}

double q_hat(const CircumnavScenario& scn, const ShapingParams& shaping, double r_h, double eta) {
  return std::sqrt(fisher_L(scn, r_h, eta)) * std::tanh(r_h - shaping.kappa);
}

double circumnav_control_cost(const CircumnavScenario& scn, double u_s, double u_hat) {
  if (u_hat == 0.0) return 0.0;
  const double lam = (u_hat >= 0.0) ? scn.omega_max - u_s : u_s + scn.omega_max;
  if (!(lam > 0.0)) {
    throw AssumptionViolated("baseline leaves no room on the active side of the bound window");
  }
  const double x = u_hat / lam;
  if (!(std::abs(x) < 1.0)) {
    throw SaturationExceeded("virtual input reached the saturation scale");
  }
  return scn.r_weight * lam * lam * (2.0 * x * std::atanh(x) + std::log1p(-x * x));
}

std::pair<double, double> accumulate_metrics(const std::vector<MetricPoint>& trajectory,
                                             double dt, const CircumnavScenario& scn,
                                             const ShapingParams& shaping) {
  double d_accum = 0.0;
  double j_accum = 0.0;
  double prev_sqrt_l = 0.0;
  double prev_cost = 0.0;
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    const MetricPoint& p = trajectory[i];
    const double sqrt_l = std::sqrt(fisher_L(scn, p.r_h, p.eta));
    const double cost = scn.c1 * (shaping.q_max - q_hat(scn, shaping, p.r_h, p.eta)) +
                        circumnav_control_cost(scn, p.u_s, p.u_hat);
    if (i > 0) {
      d_accum += 0.5 * dt * (prev_sqrt_l + sqrt_l);
      j_accum += 0.5 * dt * (prev_cost + cost);
    }
    prev_sqrt_l = sqrt_l;
    prev_cost = cost;
  }
  return {d_accum, j_accum};
}

CircumnavState state_from_polar(const CircumnavScenario& scn, double r_h, double eta, double phi,
                                double theta_t) {
  const double theta_r = wrap_angle(phi + kPi / 2.0 - eta);
  // Invert the relative-velocity definition for the UAV heading.
  const double vx = scn.v_t * std::cos(theta_t) - scn.v_r * std::cos(theta_r);
  const double vy = scn.v_t * std::sin(theta_t) - scn.v_r * std::sin(theta_r);
  CircumnavState s;
  s.e_r = r_h - scn.r_d;
  s.eta = wrap_angle(eta);
  s.theta = std::atan2(vy, vx);
  s.theta_t = wrap_angle(theta_t);
  s.x_t = 0.0;
  s.y_t = 0.0;
  s.x = -r_h * std::cos(phi);
  s.y = -r_h * std::sin(phi);
  return s;
}

AugmentedState to_augmented(const CircumnavState& s) {
  AugmentedState X;
  X.x1 = Eigen::Vector3d(s.e_r, s.eta, s.theta);
  X.x2 = Eigen::VectorXd::Constant(1, s.theta_t);
  return X;
}

namespace {

CircumnavState reduced_state(const Eigen::VectorXd& x1, const Eigen::VectorXd& x2) {
  CircumnavState s;
  s.e_r = x1[0];
  s.eta = x1[1];
  s.theta = x1[2];
  s.theta_t = x2[0];
  return s;
}

}  // namespace

SystemModel make_system_model(const CircumnavScenario& scn) {
  SystemModel model;
  model.n1 = 3;
  model.n2 = 1;
  model.m = 1;

  model.f1 = [scn](const Eigen::VectorXd& x1, const Eigen::VectorXd& x2) {
    CircumnavState s = reduced_state(x1, x2);
    const double r_h = s.r_h(scn.r_d);
    if (!(r_h > 0.0)) {
      throw DegenerateGeometry("loiter radius must be positive");
    }
    Geometry g = geometry_at(scn, s.theta, s.theta_t);
    Eigen::Vector3d f;
    f[0] = scn.v_r * std::sin(s.eta);
    f[1] = scn.v_r * std::cos(s.eta) / r_h -
           scn.v_t * std::cos(s.theta - s.theta_t) / (scn.v_r * g.c) * scn.target_turn(s.theta_t);
    f[2] = 0.0;
    return Eigen::VectorXd(f);
  };

  model.g1 = [scn](const Eigen::VectorXd& x1, const Eigen::VectorXd& x2) {
    CircumnavState s = reduced_state(x1, x2);
    Geometry g = geometry_at(scn, s.theta, s.theta_t);
    Eigen::MatrixXd G(3, 1);
    G << 0.0, g.v / (scn.v_r * g.c), 1.0;
    return G;
  };

  model.f2 = [scn](const Eigen::VectorXd& x2) {
    return Eigen::VectorXd::Constant(1, scn.target_turn(x2[0])).eval();
  };

  model.constraint = [scn](const Eigen::VectorXd&, const Eigen::VectorXd&) {
    return std::make_pair(Eigen::VectorXd::Constant(1, -scn.omega_max).eval(),
                          Eigen::VectorXd::Constant(1, scn.omega_max).eval());
  };

  model.baseline = [scn](const Eigen::VectorXd& x1, const Eigen::VectorXd& x2) {
    const double u = vf_baseline(scn, reduced_state(x1, x2));
    const double cap = scn.omega_max - kBaselineMargin;
    return Eigen::VectorXd::Constant(1, std::clamp(u, -cap, cap)).eval();
  };

  model.normalize = [](Eigen::VectorXd& x1, Eigen::VectorXd& x2) {
    x1[1] = wrap_angle(x1[1]);
    x1[2] = wrap_angle(x1[2]);
    x2[0] = wrap_angle(x2[0]);
  };

  return model;
}

CostConfig make_cost_config(const CircumnavScenario& scn, const ShapingParams& shaping) {
  CostConfig cost;
  cost.r = Eigen::VectorXd::Constant(1, scn.r_weight);
  cost.state_cost = [scn, shaping](const Eigen::VectorXd& x1) {
    return scn.c1 * (shaping.q_max - q_hat(scn, shaping, scn.r_d + x1[0], x1[1]));
  };
  return cost;
}

}  // namespace ucopt
