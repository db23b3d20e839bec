#pragma once

// Thresholded NIPALS for sparse canonical pairs.
//
// One component alternates between the two blocks: project to a latent,
// regress the other block on it with the identity-covariance shortcut
// (a plain cross product), keep the top-k coefficients with soft
// thresholding, and repeat until the latent correlation settles.

#include "toscca/model.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace toscca {

enum class InitScheme { uniform, normal, eigen };

struct SolverConfig {
  double tolerance = 1e-6;
  int max_iterations = 500;
  InitScheme init = InitScheme::uniform;
  std::uint64_t seed = 0;
  int restarts = 1;
  int threads = 1;  // hint for batched products

  void validate() const;
};

/// Starting X1-side weights with unit Euclidean norm.
///
/// `uniform`/`normal` draw i.i.d. entries from the seed. `eigen` returns the
/// dominant right singular vector of `x1` by power iteration on X1^T X1
/// (tolerance 1e-8, at most 1000 steps) with a seeded start, sign-fixed so
/// the largest-magnitude entry is positive.
Vector init_alpha(Index p, InitScheme scheme, std::uint64_t seed, const Matrix* x1 = nullptr);

/// Fits one component from the configured initialization, keeping the best
/// of `config.restarts` starts (seeds seed, seed+1, ...).
CanonicalComponent fit_component(const Matrix& x1, const Matrix& x2, SparsityPair sparsity,
                                 const SolverConfig& config);

/// Single start from a caller-supplied initial alpha.
CanonicalComponent fit_component_from(const Matrix& x1, const Matrix& x2,
                                      SparsityPair sparsity, const Vector& alpha0,
                                      const SolverConfig& config);

/// One component per grid entry, all from the same initial alpha, with the
/// cross products batched over grid columns. Entry i equals
/// fit_component(x1, x2, grid[i], config) bit for bit.
std::vector<CanonicalComponent> fit_component_grid(const Matrix& x1, const Matrix& x2,
                                                   std::span<const SparsityPair> grid,
                                                   const SolverConfig& config);

std::vector<CanonicalComponent> fit_component_grid_from(const Matrix& x1, const Matrix& x2,
                                                        std::span<const SparsityPair> grid,
                                                        const Vector& alpha0,
                                                        const SolverConfig& config);

/// K components with projection deflation between them. `sparsity` has
/// length K, or length 1 to use the same pair for every component.
/// Component k starts from seed config.seed + k. A degenerate component
/// ends the sequence early and sets `truncated`.
CCAModel fit(const Matrix& x1, const Matrix& x2, Index num_components,
             std::span<const SparsityPair> sparsity, const SolverConfig& config);

}  // namespace toscca
