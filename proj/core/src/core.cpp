#include "toscca/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace toscca {

void RawMatrix::validate() const {
  if (values.rows() < 2) {
    throw Error("matrix needs at least 2 rows, got " + std::to_string(values.rows()));
  }
  if (values.cols() < 1) {
    throw Error("matrix needs at least 1 column");
  }
  if (!column_names.empty() && static_cast<Index>(column_names.size()) != values.cols()) {
    throw Error("column_names has " + std::to_string(column_names.size()) +
                " labels for " + std::to_string(values.cols()) + " columns");
  }
  if (!row_ids.empty() && static_cast<Index>(row_ids.size()) != values.rows()) {
    throw Error("row_ids has " + std::to_string(row_ids.size()) + " labels for " +
                std::to_string(values.rows()) + " rows");
  }
  for (Index j = 0; j < values.cols(); ++j) {
    for (Index i = 0; i < values.rows(); ++i) {
      if (!std::isfinite(values(i, j))) {
        std::ostringstream msg;
        msg << "non-finite entry at row " << i + 1 << ", column " << j + 1;
        if (!column_names.empty()) msg << " (" << column_names[j] << ")";
        throw Error(msg.str());
      }
    }
  }
}

namespace {

std::string column_label(const RawMatrix& raw, Index j) {
  std::string label = "column " + std::to_string(j + 1);
  if (!raw.column_names.empty()) label += " (" + raw.column_names[j] + ")";
  return label;
}

}  // namespace

StandardizedMatrix standardize(RawMatrix raw, ZeroVariancePolicy policy) {
  raw.validate();
  const Index n = raw.rows();
  const Index m = raw.cols();

  StandardizedMatrix out;
  out.row_ids = std::move(raw.row_ids);
  std::vector<double> means;
  std::vector<double> scales;
  means.reserve(m);
  scales.reserve(m);

  // Standardize in place, compacting surviving columns to the front.
  Index write = 0;
  for (Index j = 0; j < m; ++j) {
    auto col = raw.values.col(j);
    const double mean = col.sum() / static_cast<double>(n);
    col.array() -= mean;
    const double sd = std::sqrt(col.squaredNorm() / static_cast<double>(n - 1));
    if (!(sd > 1e-12 * (1.0 + std::abs(mean)))) {
      if (policy == ZeroVariancePolicy::error) {
        throw Error("zero-variance " + column_label(raw, j));
      }
      out.dropped_columns.push_back(j);
      continue;
    }
    col /= sd;
    if (write != j) raw.values.col(write) = col;
    means.push_back(mean);
    scales.push_back(sd);
    out.kept_columns.push_back(j);
    if (!raw.column_names.empty()) out.column_names.push_back(raw.column_names[j]);
    ++write;
  }
  if (write == 0) throw Error("no columns with nonzero variance");
  if (write != m) raw.values.conservativeResize(n, write);

  out.values = std::move(raw.values);
  out.col_means = Eigen::Map<Vector>(means.data(), write);
  out.col_scales = Eigen::Map<Vector>(scales.data(), write);
  return out;
}

Matrix apply_standardization(const Matrix& values, const Vector& means,
                             const Vector& scales) {
  if (values.cols() != means.size() || values.cols() != scales.size()) {
    throw Error("standardization transform does not match column count");
  }
  Matrix out = values;
  for (Index j = 0; j < out.cols(); ++j) {
    out.col(j).array() -= means[j];
    out.col(j) /= scales[j];
  }
  return out;
}

void SparsityPair::validate(Index p, Index q) const {
  if (k_alpha < 1 || k_alpha > p) {
    throw Error("k_alpha=" + std::to_string(k_alpha) + " outside [1, " +
                std::to_string(p) + "]");
  }
  if (k_beta < 1 || k_beta > q) {
    throw Error("k_beta=" + std::to_string(k_beta) + " outside [1, " +
                std::to_string(q) + "]");
  }
}

std::vector<Index> WeightVector::support() const {
  std::vector<Index> idx;
  idx.reserve(static_cast<size_t>(nnz));
  for (Index j = 0; j < weights.size(); ++j) {
    if (weights[j] != 0.0) idx.push_back(j);
  }
  return idx;
}

Vector WeightVector::normalized() const {
  const double norm = weights.norm();
  if (norm == 0.0) return weights;
  return weights / norm;
}

WeightVector soft_threshold_topk(const Eigen::Ref<const Vector>& v, Index k) {
  const Index m = v.size();
  if (k < 1 || k > m) {
    throw Error("soft_threshold_topk: k=" + std::to_string(k) + " outside [1, " +
                std::to_string(m) + "]");
  }

  WeightVector out;
  out.weights = Vector::Zero(m);

  double lambda = 0.0;
  if (k < m) {
    // Strict total order: larger magnitude first, lower index on ties. The
    // k-th element after partitioning is the (k+1)-th largest magnitude.
    std::vector<Index> order(static_cast<size_t>(m));
    std::iota(order.begin(), order.end(), Index{0});
    const auto before = [&v](Index a, Index b) {
      const double ma = std::abs(v[a]);
      const double mb = std::abs(v[b]);
      return ma > mb || (ma == mb && a < b);
    };
    std::nth_element(order.begin(), order.begin() + k, order.end(), before);
    lambda = std::abs(v[order[static_cast<size_t>(k)]]);
  }
  out.threshold = lambda;

  for (Index j = 0; j < m; ++j) {
    const double mag = std::abs(v[j]);
    if (mag > lambda) {
      out.weights[j] = std::copysign(mag - lambda, v[j]);
      ++out.nnz;
    }
  }
  return out;
}

}  // namespace toscca
