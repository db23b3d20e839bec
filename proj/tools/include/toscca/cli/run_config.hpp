#pragma once

// Resolved settings for one CLI run. The config file and the command-line
// flags share one key space (flag names without the leading dashes), so a
// run can always be replayed from its emitted run_config.txt.

#include "toscca/cli/table.hpp"
#include "toscca/keyvalue.hpp"
#include "toscca/permtest.hpp"
#include "toscca/solver.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace toscca::cli {

enum class Command { analyze, simulate, permtest };
enum class Log2Side { none, x1, x2, both };
enum class NnzMode { automatic, grid, per_component };

struct RunConfig {
  Command command = Command::analyze;
  std::string x1_path;
  std::string x2_path;
  ReadOptions read;
  Log2Side log2 = Log2Side::none;
  ZeroVariancePolicy zero_variance = ZeroVariancePolicy::error;

  Index components = 1;
  std::vector<Index> nnz_x1;  // empty: min(100, columns)
  std::vector<Index> nnz_x2;
  NnzMode nnz_mode = NnzMode::automatic;

  SolverConfig solver;
  double holdout = 0.2;
  int repeats = 10;  // 0 skips the out-of-sample estimate

  bool run_permtest = false;  // analyze/simulate; always on for permtest
  int replicates = 499;
  double alpha = 0.05;
  Correction correction = Correction::bonferroni;
  Side permute = Side::x2;
  Statistic statistic = Statistic::in_sample;
  NullScheme null_scheme = NullScheme::deflated;

  std::string design_path;  // simulate; empty uses the built-in design
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out_dir = "toscca_out";
  char out_delimiter = ',';

  /// Throws UsageError on unknown keys or out-of-range values.
  static RunConfig resolve(const KeyValueFile& kv, Command command);
  /// Every setting except the output directory, including defaults, in
  /// config-file form.
  KeyValueFile to_keyvalue() const;

  SplitSpec split() const;
  PermutationSettings permutation() const;
  SolverConfig solver_config() const;
};

struct SparsityPlan {
  enum class Mode { single, per_component, grid } mode = Mode::single;
  std::vector<SparsityPair> pairs;
};

/// Expands the nnz lists against the data dimensions. Automatic mode reads
/// lists of length 1 or K as per-component when K > 1 and as a grid
/// (Cartesian product, X1 outer) otherwise.
SparsityPlan plan_sparsity(const RunConfig& config, Index p, Index q);

std::string to_string(Command command);
std::string to_string(Correction correction);
std::string to_string(Statistic statistic);
std::string to_string(NullScheme scheme);
std::string to_string(Side side);
std::string to_string(InitScheme scheme);
std::string to_string(SparsityPlan::Mode mode);

}  // namespace toscca::cli
