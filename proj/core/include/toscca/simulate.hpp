#pragma once

// Shared-latent factor model with planted sparse canonical pairs, and
// support-recovery scoring against the planted truth.

#include "toscca/keyvalue.hpp"
#include "toscca/model.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace toscca {

enum class WeightPattern { constant, alternating_sign, decaying };

struct PlantedComponent {
  std::vector<Index> support_x1;  // 0-based
  std::vector<Index> support_x2;
  WeightPattern pattern = WeightPattern::constant;
  double latent_strength = 1.0;
};

struct SimulationDesign {
  Index n = 100;
  Index p = 2500;
  Index q = 500;
  std::vector<PlantedComponent> components;
  double noise_sd = 1.0;
  std::uint64_t seed = 0;

  /// Throws on out-of-range or overlapping supports, or strengths that are
  /// not strictly decreasing.
  void validate() const;

  /// n=100, p=2500, q=500; three contiguous components with supports of
  /// 100/95/90 variables per side and strengths 36/30/25.
  static SimulationDesign reference_design(std::uint64_t seed);

  /// Flat key=value form; supports are written as 1-based ranges.
  static SimulationDesign from_config(const KeyValueFile& kv);
  KeyValueFile to_config() const;
};

struct GroundTruth {
  std::vector<Vector> weights_x1;  // unit norm, zero off-support
  std::vector<Vector> weights_x2;
  Matrix latents;                  // n x K shared scores
  std::vector<std::vector<Index>> supports_x1;
  std::vector<std::vector<Index>> supports_x2;
};

struct SimulatedData {
  RawMatrix x1;
  RawMatrix x2;
  GroundTruth truth;
};

/// X1 = sum_k s_k u_k a_k^T + E1 and X2 = sum_k s_k u_k b_k^T + E2 with
/// u_k ~ N(0, I_n) and E ~ N(0, noise_sd^2). Deterministic in design.seed.
SimulatedData generate(const SimulationDesign& design);

/// Pattern weights of length m, unit Euclidean norm.
Vector pattern_weights(WeightPattern pattern, Index m);

struct SideScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  /// Share of the estimate's absolute weight mass that falls on the planted support.
  double weighted_precision = 0.0;
};

SideScore score_support(const std::vector<Index>& estimated, const Vector& estimated_weights,
                        const std::vector<Index>& planted);

struct ComponentRecovery {
  Index planted = 0;
  std::optional<Index> estimated;  // matched model component, 0-based
  SideScore x1;
  SideScore x2;
  bool matched = false;
};

struct RecoveryScore {
  std::vector<ComponentRecovery> components;  // one per planted component
};

/// Greedy one-to-one matching of estimated to planted components by X1-side
/// F1 (largest first); a pair with F1 = 0 is left unmatched.
RecoveryScore score_recovery(const CCAModel& model, const GroundTruth& truth);

std::string to_string(WeightPattern pattern);
WeightPattern parse_weight_pattern(const std::string& text);

}  // namespace toscca
