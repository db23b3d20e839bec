#include "toscca/linalg.hpp"

#include "toscca/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace toscca::linalg {

double dot(const double* a, const double* b, Index n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  Index i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

Vector xt_times(const Matrix& x, const Vector& v) {
  if (x.rows() != v.size()) throw Error("xt_times: dimension mismatch");
  Vector out(x.cols());
  const Index n = x.rows();
  for (Index j = 0; j < x.cols(); ++j) out[j] = dot(x.col(j).data(), v.data(), n);
  return out;
}

Matrix xt_times(const Matrix& x, const Matrix& vs, int threads) {
  if (x.rows() != vs.rows()) throw Error("xt_times: dimension mismatch");
  const Index n = x.rows();
  const Index m = x.cols();
  const Index g = vs.cols();
  Matrix out(m, g);
  constexpr Index kBlock = 256;
  const Index blocks = (m + kBlock - 1) / kBlock;
  parallel_for(blocks, threads, [&](Index b) {
    const Index end = std::min(m, (b + 1) * kBlock);
    for (Index j = b * kBlock; j < end; ++j) {
      const double* col = x.col(j).data();
      for (Index c = 0; c < g; ++c) out(j, c) = dot(col, vs.col(c).data(), n);
    }
  });
  return out;
}

Vector x_times(const Matrix& x, const Vector& w) {
  if (x.cols() != w.size()) throw Error("x_times: dimension mismatch");
  Vector out = Vector::Zero(x.rows());
  for (Index j = 0; j < x.cols(); ++j) {
    const double wj = w[j];
    if (wj != 0.0) out.noalias() += wj * x.col(j);
  }
  return out;
}

double pearson(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw Error("pearson: length mismatch");
  const Index n = a.size();
  if (n < 2) return 0.0;
  const Vector ac = a.array() - a.sum() / static_cast<double>(n);
  const Vector bc = b.array() - b.sum() / static_cast<double>(n);
  const double saa = dot(ac, ac);
  const double sbb = dot(bc, bc);
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  const double r = dot(ac, bc) / std::sqrt(saa * sbb);
  return std::clamp(r, -1.0, 1.0);
}

double cosine(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw Error("cosine: length mismatch");
  const double saa = dot(a, a);
  const double sbb = dot(b, b);
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return std::clamp(dot(a, b) / std::sqrt(saa * sbb), -1.0, 1.0);
}

}  // namespace toscca::linalg
