#pragma once

#include "toscca/core.hpp"

#include <optional>
#include <string>
#include <vector>

namespace toscca {

/// One estimated canonical pair.
///
/// `gamma`/`zeta` are the unit-norm latent variables X1*alpha and X2*beta of
/// the (deflated) matrices the pair was fitted on. `gamma_projection` and
/// `zeta_projection` are X*w/||w|| for the same matrices, i.e. the latent
/// scaled by the variance it carries along the unit weight direction; CPEV
/// is computed from these. The loadings and norms let new rows be deflated
/// consistently with the training rows.
struct CanonicalComponent {
  WeightVector alpha;
  WeightVector beta;
  Vector gamma;
  Vector zeta;
  Vector gamma_projection;
  Vector zeta_projection;
  double rho_in = 0.0;
  std::optional<double> rho_out;
  std::vector<double> rho_out_repeats;
  int iterations = 0;
  bool converged = false;
  bool degenerate = false;
  SparsityPair sparsity;
  std::uint64_t init_seed = 0;
  std::vector<double> rho_trace;  // correlation after every iteration

  // Deflation bookkeeping: X1^(k)^T gamma, ||X1^(k) alpha||, same for X2.
  Vector x1_loading;
  Vector x2_loading;
  double gamma_norm = 0.0;
  double zeta_norm = 0.0;
};

/// Residual statistics recorded after each deflation step.
struct DeflationRecord {
  double x1_frobenius = 0.0;
  double x2_frobenius = 0.0;
  /// max_j |gamma_k^T X1^(k+1)_j| / ||X1||_F, same for zeta / X2.
  double x1_orthogonality = 0.0;
  double x2_orthogonality = 0.0;
};

struct CCAModel {
  std::vector<CanonicalComponent> components;
  std::vector<double> cpev_x1;
  std::vector<double> cpev_x2;
  std::vector<double> adj_cpev_x1;
  std::vector<double> adj_cpev_x2;
  Matrix gamma_correlations;
  Matrix zeta_correlations;
  std::vector<DeflationRecord> deflation_trail;
  bool truncated = false;  // a degenerate component stopped the sequence
  std::vector<std::string> warnings;

  Index size() const { return static_cast<Index>(components.size()); }
};

}  // namespace toscca
