#include "ucopt/value_function.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <fstream>
#include <set>
#include <sstream>
#include <vector>

namespace ucopt {

BasisSet::BasisSet(Eigen::MatrixXi exponents, int x1_dim)
    : exponents_(std::move(exponents)), x1_dim_(x1_dim) {
  if (exponents_.rows() == 0 || exponents_.cols() == 0) {
    throw DimensionMismatch("basis must have at least one term and one coordinate");
  }
  if (x1_dim_ < 1 || x1_dim_ > exponents_.cols()) {
    throw DimensionMismatch("x1_dim out of range");
  }
  if (exponents_.minCoeff() < 0) {
    throw DimensionMismatch("negative exponent in basis term");
  }
  std::set<std::vector<int>> seen;
  for (int j = 0; j < exponents_.rows(); ++j) {
    if (exponents_.row(j).head(x1_dim_).sum() < 1) {
      std::ostringstream os;
      os << "basis term " << j << " has zero degree in the controlled block";
      throw DimensionMismatch(os.str());
    }
    std::vector<int> key(exponents_.cols());
    for (int i = 0; i < exponents_.cols(); ++i) key[i] = exponents_(j, i);
    if (!seen.insert(key).second) {
      std::ostringstream os;
      os << "duplicate basis term at index " << j;
      throw DimensionMismatch(os.str());
    }
  }
  max_exp_ = exponents_.colwise().maxCoeff();
}

namespace {

// powers[i][e] = X_i^e
std::vector<std::vector<double>> power_tables(const Eigen::VectorXd& X,
                                              const Eigen::VectorXi& max_exp) {
  std::vector<std::vector<double>> pw(X.size());
  for (int i = 0; i < X.size(); ++i) {
    pw[i].resize(max_exp[i] + 1);
    pw[i][0] = 1.0;
    for (int e = 1; e <= max_exp[i]; ++e) pw[i][e] = pw[i][e - 1] * X[i];
  }
  return pw;
}

}  // namespace

Eigen::VectorXd BasisSet::evaluate(const Eigen::VectorXd& X) const {
  if (X.size() != dim()) {
    throw DimensionMismatch("state dimension differs from basis dimension");
  }
  auto pw = power_tables(X, max_exp_);
  Eigen::VectorXd sigma(size());
  for (int j = 0; j < size(); ++j) {
    double v = 1.0;
    for (int i = 0; i < dim(); ++i) v *= pw[i][exponents_(j, i)];
    sigma[j] = v;
  }
  return sigma;
}

Eigen::MatrixXd BasisSet::jacobian(const Eigen::VectorXd& X) const {
  if (X.size() != dim()) {
    throw DimensionMismatch("state dimension differs from basis dimension");
  }
  auto pw = power_tables(X, max_exp_);
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(size(), dim());
  for (int j = 0; j < size(); ++j) {
    for (int i = 0; i < dim(); ++i) {
      const int e = exponents_(j, i);
      if (e == 0) continue;
      double v = e * pw[i][e - 1];
      for (int k = 0; k < dim(); ++k) {
        if (k != i) v *= pw[k][exponents_(j, k)];
      }
      J(j, i) = v;
    }
  }
  return J;
}

ValueApproximator::ValueApproximator(BasisSet basis, Eigen::VectorXd weights)
    : basis_(std::move(basis)), weights_(std::move(weights)) {
  if (weights_.size() != basis_.size()) {
    throw DimensionMismatch("weight length differs from basis size");
  }
}

void ValueApproximator::set_weights(Eigen::VectorXd w) {
  if (w.size() != basis_.size()) {
    throw DimensionMismatch("weight length differs from basis size");
  }
  weights_ = std::move(w);
}

double ValueApproximator::value(const Eigen::VectorXd& X) const {
  return weights_.dot(basis_.evaluate(X));
}

Eigen::VectorXd ValueApproximator::gradient(const Eigen::VectorXd& X) const {
  return basis_.jacobian(X).transpose() * weights_;
}

namespace {

// 15 monomials in (e_r, eta), even total degree up to 6 plus the (5,2) and
// (5,1) entries.
constexpr int kRadialExp[15][2] = {{2, 0}, {1, 1}, {0, 2}, {4, 0}, {3, 1},
                                   {2, 2}, {1, 3}, {0, 4}, {6, 0}, {5, 2},
                                   {4, 2}, {3, 3}, {2, 4}, {5, 1}, {0, 6}};

}  // namespace

BasisSet make_reduced_basis() {
  Eigen::MatrixXi exps(15, 4);
  for (int i = 0; i < 15; ++i) {
    exps(i, 0) = kRadialExp[i][0];
    exps(i, 1) = kRadialExp[i][1];
    exps(i, 2) = 0;
    exps(i, 3) = 0;
  }
  return BasisSet(exps, 2);
}

BasisSet make_full_basis() {
  // 10 monomials in (theta, theta_t) up to degree 3, crossed with the
  // radial block.
  static const int b_exp[10][2] = {{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1},
                                   {0, 2}, {3, 0}, {2, 1}, {1, 2}, {0, 3}};
  Eigen::MatrixXi exps(150, 4);
  int row = 0;
  for (int i = 0; i < 15; ++i) {
    for (int j = 0; j < 10; ++j, ++row) {
      exps(row, 0) = kRadialExp[i][0];
      exps(row, 1) = kRadialExp[i][1];
      exps(row, 2) = b_exp[j][0];
      exps(row, 3) = b_exp[j][1];
    }
  }
  return BasisSet(exps, 2);
}

BasisSet make_tensor_basis(const std::vector<int>& block_sizes,
                           const std::vector<int>& degree_caps, int x1_dim) {
  if (block_sizes.size() != degree_caps.size() || block_sizes.empty()) {
    throw DimensionMismatch("block_sizes and degree_caps must match and be non-empty");
  }
  int dim = 0;
  for (int s : block_sizes) dim += s;

  // Enumerate per-block exponent tuples with bounded total degree.
  std::vector<std::vector<std::vector<int>>> block_terms;
  for (std::size_t b = 0; b < block_sizes.size(); ++b) {
    std::vector<std::vector<int>> terms;
    std::vector<int> cur(block_sizes[b], 0);
    std::function<void(int, int)> rec = [&](int pos, int remaining) {
      if (pos == block_sizes[b]) {
        terms.push_back(cur);
        return;
      }
      for (int e = 0; e <= remaining; ++e) {
        cur[pos] = e;
        rec(pos + 1, remaining - e);
      }
      cur[pos] = 0;
    };
    rec(0, degree_caps[b]);
    block_terms.push_back(std::move(terms));
  }

  std::vector<std::vector<int>> rows;
  std::vector<int> assembled(dim, 0);
  std::function<void(std::size_t, int)> cross = [&](std::size_t b, int offset) {
    if (b == block_terms.size()) {
      int x1_deg = 0;
      for (int i = 0; i < x1_dim; ++i) x1_deg += assembled[i];
      if (x1_deg >= 1) rows.push_back(assembled);
      return;
    }
    for (const auto& t : block_terms[b]) {
      for (std::size_t i = 0; i < t.size(); ++i) assembled[offset + i] = t[i];
      cross(b + 1, offset + static_cast<int>(t.size()));
    }
  };
  cross(0, 0);
  std::sort(rows.begin(), rows.end());

  Eigen::MatrixXi exps(static_cast<int>(rows.size()), dim);
  for (std::size_t j = 0; j < rows.size(); ++j) {
    for (int i = 0; i < dim; ++i) exps(static_cast<int>(j), i) = rows[j][i];
  }
  return BasisSet(exps, x1_dim);
}

void save_weights(const std::string& path, const Eigen::VectorXd& w) {
  std::ofstream out(path);
  if (!out) {
    throw Error("cannot open weight file for writing: " + path);
  }
  char buf[64];
  for (int i = 0; i < w.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", w[i]);
    out << buf << '\n';
  }
}

Eigen::VectorXd load_weights(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("cannot open weight file: " + path);
  }
  std::vector<double> vals;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    vals.push_back(std::stod(line));
  }
  Eigen::VectorXd w(static_cast<int>(vals.size()));
  for (std::size_t i = 0; i < vals.size(); ++i) w[static_cast<int>(i)] = vals[i];
  return w;
}

}  // namespace ucopt
