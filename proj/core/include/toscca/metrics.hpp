#pragma once

// Deflation between components and the correlation / explained-variance
// diagnostics reported for a fitted model.

#include "toscca/model.hpp"
#include "toscca/solver.hpp"

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace toscca {

enum class Side { x1, x2 };

/// alpha^T X1^T X2 beta / (||X1 alpha|| ||X2 beta||). Throws when either
/// latent has zero norm.
double canonical_correlation(const Vector& alpha, const Vector& beta, const Matrix& x1,
                             const Matrix& x2);

/// (I - g (g^T g)^{-1} g^T) X. Requires ||gamma|| = 1 within 1e-8.
Matrix deflate(const Matrix& x, const Vector& gamma);
/// In-place variant; returns X^T gamma / (gamma^T gamma) (the removed loading).
Vector deflate_in_place(Matrix& x, const Vector& gamma);

/// tr(G^T G) / tr(X^T X) for latents G = [g_1 ... g_k].
double cpev(std::span<const Vector> latents, const Matrix& x_original);

/// Cumulative CPEV at component k (1-based) discounted by
/// prod_{i<k} (1 - |cor(latent_i, latent_k)|). k = 1 returns plain CPEV.
double adjusted_cpev(const CCAModel& model, Index k, Side side);

/// Pearson correlations among all gamma latents and among all zeta latents.
std::pair<Matrix, Matrix> cross_component_correlation(const CCAModel& model);

/// Fills cpev / adjusted cpev / cross correlations from the components.
void attach_diagnostics(CCAModel& model, const Matrix& x1_original, const Matrix& x2_original);

struct SplitSpec {
  double holdout_fraction = 0.2;
  int repeats = 10;
  std::uint64_t seed = 0;

  Index holdout_size(Index n) const;
  void validate(Index n) const;
};

struct OutOfSampleResult {
  std::vector<double> mean;                 // one per component
  std::vector<std::vector<double>> repeats; // [repeat][component]
  std::vector<int> missing;                 // repeats whose fit stopped before this component
};

/// Repeated random holdout. Each repeat fits a K-component model on the
/// training rows (re-standardized with training statistics), carries the
/// holdout rows through the same deflation, and evaluates the canonical
/// correlation of the holdout projections. Signs are not forced positive.
OutOfSampleResult out_of_sample_correlations(const Matrix& x1, const Matrix& x2,
                                             Index num_components,
                                             std::span<const SparsityPair> sparsity,
                                             const SolverConfig& config, const SplitSpec& split);

/// Single-component convenience form: returns (mean, per-repeat values).
std::pair<double, std::vector<double>> out_of_sample_correlation(const Matrix& x1,
                                                                 const Matrix& x2,
                                                                 SparsityPair sparsity,
                                                                 const SolverConfig& config,
                                                                 const SplitSpec& split);

}  // namespace toscca
