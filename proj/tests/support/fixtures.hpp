#pragma once

// Random blocks and independent reference computations shared by the suites.

#include "toscca/core.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdint>
#include <random>

namespace fixtures {

using toscca::Index;
using toscca::Matrix;
using toscca::Vector;

inline Matrix gaussian(Index n, Index m, std::uint64_t seed) {
  std::mt19937_64 rng(seed * 7919 + 17);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix x(n, m);
  for (Index j = 0; j < m; ++j) {
    for (Index i = 0; i < n; ++i) x(i, j) = normal(rng);
  }
  return x;
}

/// Column-centered, unit sample variance (divisor n-1).
inline Matrix standardized(const Matrix& x) {
  Matrix out = x.rowwise() - x.colwise().mean();
  for (Index j = 0; j < out.cols(); ++j) {
    out.col(j) /= std::sqrt(out.col(j).squaredNorm() / static_cast<double>(out.rows() - 1));
  }
  return out;
}

inline double pearson(const Vector& a, const Vector& b) {
  const Vector ac = a.array() - a.mean();
  const Vector bc = b.array() - b.mean();
  return ac.dot(bc) / (ac.norm() * bc.norm());
}

struct DenseSolution {
  Vector gamma;  // unit norm
  Vector zeta;   // unit norm
  double rho = 0.0;
  double eigenvalue = 0.0;
};

/// Leading eigenvector of (X1 X1^T)(X2 X2^T): the fixed point of the
/// unthresholded alternating iteration.
inline DenseSolution dense_fixed_point(const Matrix& x1, const Matrix& x2) {
  const Matrix m = (x1 * x1.transpose()) * (x2 * x2.transpose());
  Eigen::EigenSolver<Matrix> es(m);
  Index best = 0;
  for (Index i = 1; i < m.rows(); ++i) {
    if (es.eigenvalues()(i).real() > es.eigenvalues()(best).real()) best = i;
  }
  DenseSolution s;
  s.eigenvalue = es.eigenvalues()(best).real();
  s.gamma = es.eigenvectors().col(best).real().normalized();
  s.zeta = (x2 * (x2.transpose() * s.gamma)).normalized();
  s.rho = s.gamma.dot(s.zeta);
  if (s.rho < 0) {
    s.zeta = -s.zeta;
    s.rho = -s.rho;
  }
  return s;
}

/// ||M g - (g^T M g) g|| / ||M g|| for M = (X1 X1^T)(X2 X2^T) and unit g.
inline double eigen_residual(const Matrix& x1, const Matrix& x2, const Vector& gamma) {
  const Vector g = gamma.normalized();
  const Vector mg = x1 * (x1.transpose() * (x2 * (x2.transpose() * g)));
  const double lambda = g.dot(mg);
  return (mg - lambda * g).norm() / mg.norm();
}

}  // namespace fixtures
