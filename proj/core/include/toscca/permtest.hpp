#pragma once

// Permutation null distributions for the canonical correlation of every
// component. Rows of one block are shuffled, breaking the cross-block
// association, and the model is refitted with the SAME nonzero counts so
// observed and permuted statistics are comparable.

#include "toscca/metrics.hpp"
#include "toscca/solver.hpp"

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace toscca {

enum class Correction { bonferroni, max_statistic, none };
enum class Statistic { in_sample, out_of_sample };

/// How the null for component k is generated.
///  - deflated: shuffle rows of the observed deflated blocks X^(k) and fit a
///    single component there, so every component is tested against its own
///    residual data.
///  - full_refit: shuffle the original block and refit all K components,
///    deflating with each replicate's own latents.
enum class NullScheme { deflated, full_refit };

struct PermutationSettings {
  int replicates = 499;
  double alpha_level = 0.05;
  Statistic statistic = Statistic::in_sample;
  Correction correction = Correction::bonferroni;
  Side permute = Side::x2;
  NullScheme null_scheme = NullScheme::deflated;
  SplitSpec split;        // used by the out-of-sample statistic
  std::uint64_t seed = 0; // drives the row permutations
  int threads = 1;

  void validate() const;
};

struct ComponentTest {
  double observed = 0.0;
  std::vector<double> null_statistics;  // one per replicate
  std::vector<std::uint8_t> null_flagged;  // replicate was degenerate at this component
  double p_value = 1.0;
  bool significant = false;
};

struct PermutationReport {
  std::vector<ComponentTest> components;
  int replicates = 0;
  double alpha_level = 0.05;
  Statistic statistic = Statistic::in_sample;
  Correction correction = Correction::bonferroni;
  NullScheme null_scheme = NullScheme::deflated;
  /// Largest-component null threshold used by `max_statistic`
  /// (+inf when the level is below 1/(B+1)).
  double max_threshold = std::numeric_limits<double>::infinity();
  /// Sparsity pairs each replicate actually used, [replicate][component].
  std::vector<std::vector<SparsityPair>> replicate_sparsity;
  /// Worst deflation orthogonality residual over all fitted models.
  double max_deflation_residual = 0.0;
};

/// Add-one empirical p-value: (1 + #{null >= observed}) / (B + 1).
double empirical_p_value(double observed, std::span<const double> null_statistics);

/// Applies the configured correction to p-values / statistics in place.
void apply_correction(PermutationReport& report);

PermutationReport permutation_test(const Matrix& x1, const Matrix& x2, Index num_components,
                                   std::span<const SparsityPair> sparsity,
                                   const SolverConfig& config,
                                   const PermutationSettings& settings);

}  // namespace toscca
