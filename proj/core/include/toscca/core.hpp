#pragma once

// Domain types shared by every stage of the pipeline: raw and standardized
// data blocks, sparsity requests, and the top-k soft-threshold operator.

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace toscca {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Base error for invalid inputs and violated preconditions.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense n x m block with optional labels. Rows are samples, columns variables.
struct RawMatrix {
  Matrix values;
  std::vector<std::string> column_names;  // empty or length m
  std::vector<std::string> row_ids;       // empty or length n

  Index rows() const { return values.rows(); }
  Index cols() const { return values.cols(); }

  /// Throws Error when n < 2, m < 1, a label list has the wrong length, or
  /// an entry is not finite (the message carries the row/column location).
  void validate() const;
};

enum class ZeroVariancePolicy { error, drop };

/// Column-centered, unit-variance block (divisor n-1). `col_means` and
/// `col_scales` are in original units and describe the surviving columns.
struct StandardizedMatrix {
  Matrix values;
  Vector col_means;
  Vector col_scales;
  std::vector<Index> kept_columns;     // raw index of each surviving column
  std::vector<Index> dropped_columns;  // raw indices removed under `drop`
  std::vector<std::string> column_names;
  std::vector<std::string> row_ids;

  Index rows() const { return values.rows(); }
  Index cols() const { return values.cols(); }
};

/// Centers and scales every column. Takes the raw block by value so callers
/// can move large inputs in and avoid a copy.
StandardizedMatrix standardize(RawMatrix raw,
                               ZeroVariancePolicy policy = ZeroVariancePolicy::error);

/// Applies a previously fitted column transform to new rows.
Matrix apply_standardization(const Matrix& values, const Vector& means,
                             const Vector& scales);

/// Requested nonzero counts for the X1-side and X2-side weight vectors.
struct SparsityPair {
  Index k_alpha = 1;
  Index k_beta = 1;

  void validate(Index p, Index q) const;
  friend bool operator==(const SparsityPair&, const SparsityPair&) = default;
};

/// Output of the threshold step. `threshold` is the shrinkage level that was
/// subtracted from the surviving magnitudes.
struct WeightVector {
  Vector weights;
  Index nnz = 0;
  double threshold = 0.0;

  bool degenerate() const { return nnz == 0; }
  /// Indices of nonzero entries, ascending.
  std::vector<Index> support() const;
  /// Copy scaled to unit Euclidean norm (zero vector stays zero).
  Vector normalized() const;
};

/// Keeps the k largest magnitudes of v and shrinks them by the (k+1)-th
/// largest magnitude (zero when k == m). Ties at the boundary keep the lower
/// index, so nnz <= k always. An all-zero input yields an all-zero output
/// with nnz == 0 rather than an error.
WeightVector soft_threshold_topk(const Eigen::Ref<const Vector>& v, Index k);

}  // namespace toscca
