#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ucopt/errors.hpp"

namespace ucopt {

/// Set of multivariate monomials sigma_j(X). Every term must have total
/// degree >= 1 in the leading `x1_dim` coordinates so that sigma_j vanishes
/// when the controlled state block is zero. Term order is fixed at
/// construction, so least-squares weights are reproducible.
class BasisSet {
 public:
  /// `exponents` is M x dim; row j holds the exponent vector of sigma_j.
  BasisSet(Eigen::MatrixXi exponents, int x1_dim);

  int size() const { return static_cast<int>(exponents_.rows()); }
  int dim() const { return static_cast<int>(exponents_.cols()); }
  int x1_dim() const { return x1_dim_; }
  const Eigen::MatrixXi& exponents() const { return exponents_; }

  /// sigma_M(X).
  Eigen::VectorXd evaluate(const Eigen::VectorXd& X) const;

  /// M x dim matrix of partial derivatives d sigma_j / d X_i.
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& X) const;

 private:
  Eigen::MatrixXi exponents_;
  int x1_dim_;
  Eigen::VectorXi max_exp_;  // per coordinate, for power tables
};

/// V_M(X) = w' sigma_M(X) with analytic gradient.
class ValueApproximator {
 public:
  ValueApproximator(BasisSet basis, Eigen::VectorXd weights);

  const BasisSet& basis() const { return basis_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  void set_weights(Eigen::VectorXd w);

  double value(const Eigen::VectorXd& X) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& X) const;

 private:
  BasisSet basis_;
  Eigen::VectorXd weights_;
};

/// The 15-term basis over (e_r, eta, theta, theta_t) whose monomials depend
/// on (e_r, eta) only. Small enough to regress stably from mesh samples and
/// free of the polynomial wrap-around seam in the raw angles.
BasisSet make_reduced_basis();

/// The 150-term tensor basis over (e_r, eta, theta, theta_t): the 15-entry
/// block of monomials in (e_r, eta) crossed row-major with the 10-entry
/// block of monomials in (theta, theta_t) up to degree 3.
BasisSet make_full_basis();

/// Generic tensor-product basis: all monomials whose per-block total degree
/// stays within `degree_caps`, keeping only terms with degree >= 1 in the
/// leading x1 block. Lexicographic exponent order.
BasisSet make_tensor_basis(const std::vector<int>& block_sizes,
                           const std::vector<int>& degree_caps, int x1_dim);

/// Plain-text weight persistence, one full-precision value per line.
void save_weights(const std::string& path, const Eigen::VectorXd& w);
Eigen::VectorXd load_weights(const std::string& path);

}  // namespace ucopt
