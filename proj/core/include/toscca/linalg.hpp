#pragma once

// Fixed-order kernels used on every hot path of the solver. Each output
// entry is produced by the same scalar reduction whether it is computed
// alone or as part of a batch, which makes batched and per-column fits
// bitwise identical independent of memory alignment or thread schedule.

#include "toscca/core.hpp"

#include <cmath>

namespace toscca::linalg {

/// Sum of a[i]*b[i] accumulated in a fixed order.
double dot(const double* a, const double* b, Index n);

inline double dot(const Vector& a, const Vector& b) {
  return dot(a.data(), b.data(), a.size());
}

inline double norm(const Vector& a) { return std::sqrt(dot(a, a)); }

/// out = X^T v.
Vector xt_times(const Matrix& x, const Vector& v);

/// Column c of the result is X^T vs.col(c); entrywise equal to xt_times on
/// that column. Work is split over `threads` workers by X column blocks.
Matrix xt_times(const Matrix& x, const Matrix& vs, int threads = 1);

/// out = X w, skipping zero weights, accumulating columns in ascending order.
Vector x_times(const Matrix& x, const Vector& w);

/// Pearson correlation; 0 when either input has zero variance.
double pearson(const Vector& a, const Vector& b);

/// Cosine of the angle between a and b (the uncentered form of Pearson).
double cosine(const Vector& a, const Vector& b);

}  // namespace toscca::linalg
