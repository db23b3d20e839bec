#include "toscca/cli/run_config.hpp"

#include "toscca/random.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace toscca::cli {

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "x1",      "x2",       "delimiter", "header",      "row-ids",     "transpose",
      "log2",    "zero-variance", "k",    "nnz-x1",      "nnz-x2",      "nnz-mode",
      "init",    "restarts", "tol",       "max-iter",    "holdout",     "repeats",
      "permtest", "B",       "alpha",     "correction",  "permute",     "statistic",
      "null-scheme", "design", "seed",    "threads",     "out-dir",     "format"};
  return keys;
}

template <typename T>
T choose(const KeyValueFile& kv, const std::string& key, T fallback,
         std::initializer_list<std::pair<const char*, T>> options) {
  const auto value = kv.get(key);
  if (!value) return fallback;
  for (const auto& [name, v] : options) {
    if (*value == name) return v;
  }
  std::string names;
  for (const auto& [name, v] : options) names += names.empty() ? name : std::string("|") + name;
  throw UsageError("invalid value '" + *value + "' for " + key + " (expected " + names + ")");
}

bool parse_bool(const KeyValueFile& kv, const std::string& key, bool fallback) {
  return choose<bool>(kv, key, fallback,
                      {{"true", true}, {"yes", true}, {"1", true}, {"on", true},
                       {"false", false}, {"no", false}, {"0", false}, {"off", false}});
}

long long int_in(const KeyValueFile& kv, const std::string& key, long long fallback,
                 long long lo, long long hi) {
  long long v = fallback;
  try {
    v = kv.get_int(key, fallback);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  if (v < lo || v > hi) {
    throw UsageError(key + " must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) +
                     "], got " + std::to_string(v));
  }
  return v;
}

double double_value(const KeyValueFile& kv, const std::string& key, double fallback) {
  try {
    return kv.get_double(key, fallback);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

std::vector<Index> index_list(const KeyValueFile& kv, const std::string& key) {
  std::vector<Index> out;
  const auto value = kv.get(key);
  if (!value || value->empty()) return out;
  std::stringstream ss(*value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    long long v = 0;
    try {
      v = parse_int(item, key);
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    if (v < 1) throw UsageError(key + " entries must be positive, got " + std::to_string(v));
    out.push_back(static_cast<Index>(v));
  }
  return out;
}

std::string join(const std::vector<Index>& values) {
  std::string out;
  for (auto v : values) out += (out.empty() ? "" : ",") + std::to_string(v);
  return out;
}

std::string detect_name(Detect d) {
  switch (d) {
    case Detect::yes: return "yes";
    case Detect::no: return "no";
    default: return "auto";
  }
}

}  // namespace

RunConfig RunConfig::resolve(const KeyValueFile& kv, Command command) {
  for (const auto& [key, value] : kv.entries()) {
    if (known_keys().count(key) == 0) throw UsageError("unknown setting '" + key + "'");
  }
  RunConfig c;
  c.command = command;
  c.x1_path = kv.get("x1").value_or("");
  c.x2_path = kv.get("x2").value_or("");
  c.read.delimiter = choose<char>(kv, "delimiter", 0,
                                  {{"auto", 0}, {"comma", ','}, {",", ','}, {"tab", '\t'},
                                   {"\\t", '\t'}, {"semicolon", ';'}, {";", ';'}});
  const std::initializer_list<std::pair<const char*, Detect>> detect{
      {"auto", Detect::automatic}, {"yes", Detect::yes}, {"true", Detect::yes},
      {"no", Detect::no}, {"false", Detect::no}};
  c.read.header = choose(kv, "header", Detect::automatic, detect);
  c.read.row_ids = choose(kv, "row-ids", Detect::automatic, detect);
  c.read.transpose = parse_bool(kv, "transpose", false);
  c.log2 = choose(kv, "log2", Log2Side::none,
                  {{"none", Log2Side::none}, {"x1", Log2Side::x1}, {"x2", Log2Side::x2},
                   {"both", Log2Side::both}});
  c.zero_variance = choose(kv, "zero-variance", ZeroVariancePolicy::error,
                           {{"error", ZeroVariancePolicy::error}, {"drop", ZeroVariancePolicy::drop}});

  c.components = static_cast<Index>(
      int_in(kv, "k", command == Command::simulate ? 4 : 1, 1, 1000));
  c.nnz_x1 = index_list(kv, "nnz-x1");
  c.nnz_x2 = index_list(kv, "nnz-x2");
  c.nnz_mode = choose(kv, "nnz-mode", NnzMode::automatic,
                      {{"auto", NnzMode::automatic}, {"grid", NnzMode::grid},
                       {"per-component", NnzMode::per_component}});

  c.solver.init = choose(kv, "init", InitScheme::uniform,
                         {{"uniform", InitScheme::uniform}, {"normal", InitScheme::normal},
                          {"eigen", InitScheme::eigen}});
  c.solver.restarts = static_cast<int>(int_in(kv, "restarts", 1, 1, 10000));
  c.solver.tolerance = double_value(kv, "tol", 1e-6);
  c.solver.max_iterations = static_cast<int>(int_in(kv, "max-iter", 500, 1, 100000000));
  c.holdout = double_value(kv, "holdout", 0.2);
  c.repeats = static_cast<int>(int_in(kv, "repeats", 10, 0, 100000));

  c.run_permtest = command == Command::permtest || parse_bool(kv, "permtest", false);
  c.replicates = static_cast<int>(int_in(kv, "B", 499, 19, 100000000));
  c.alpha = double_value(kv, "alpha", 0.05);
  c.correction = choose(kv, "correction", Correction::bonferroni,
                        {{"bonferroni", Correction::bonferroni},
                         {"max", Correction::max_statistic},
                         {"none", Correction::none}});
  c.permute = choose(kv, "permute", Side::x2, {{"x1", Side::x1}, {"x2", Side::x2}});
  c.statistic = choose(kv, "statistic", Statistic::in_sample,
                       {{"in-sample", Statistic::in_sample},
                        {"out-of-sample", Statistic::out_of_sample}});
  c.null_scheme = choose(kv, "null-scheme", NullScheme::deflated,
                         {{"deflated", NullScheme::deflated},
                          {"full-refit", NullScheme::full_refit}});

  c.design_path = kv.get("design").value_or("");
  const auto seed = int_in(kv, "seed", 0, 0, std::numeric_limits<long long>::max());
  c.seed = static_cast<std::uint64_t>(seed);
  c.solver.seed = c.seed;
  c.threads = static_cast<int>(int_in(kv, "threads", 1, 1, 1024));
  c.solver.threads = c.threads;
  c.out_dir = kv.get("out-dir").value_or("toscca_out");
  c.out_delimiter = choose<char>(kv, "format", ',', {{"csv", ','}, {"tsv", '\t'}});

  if (command != Command::simulate) {
    if (c.x1_path.empty() || c.x2_path.empty()) throw UsageError("--x1 and --x2 are required");
  }
  if (c.out_dir.empty()) throw UsageError("--out-dir must not be empty");
  if (!(c.holdout > 0.0 && c.holdout < 1.0)) throw UsageError("holdout must lie in (0, 1)");
  try {
    c.solver.validate();
    if (c.run_permtest) c.permutation().validate();
  } catch (const UsageError&) {
    throw;
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  if (c.run_permtest && c.statistic == Statistic::out_of_sample && c.repeats == 0) {
    throw UsageError("the out-of-sample statistic needs repeats > 0");
  }
  return c;
}

KeyValueFile RunConfig::to_keyvalue() const {
  KeyValueFile kv;
  if (!x1_path.empty()) kv.set("x1", x1_path);
  if (!x2_path.empty()) kv.set("x2", x2_path);
  kv.set("delimiter", read.delimiter == 0      ? "auto"
                      : read.delimiter == '\t' ? "tab"
                      : read.delimiter == ';'  ? "semicolon"
                                               : "comma");
  kv.set("header", detect_name(read.header));
  kv.set("row-ids", detect_name(read.row_ids));
  kv.set("transpose", read.transpose ? "true" : "false");
  const char* log2_names[] = {"none", "x1", "x2", "both"};
  kv.set("log2", log2_names[static_cast<int>(log2)]);
  kv.set("zero-variance", zero_variance == ZeroVariancePolicy::drop ? "drop" : "error");
  kv.set("k", std::to_string(components));
  kv.set("nnz-x1", join(nnz_x1));
  kv.set("nnz-x2", join(nnz_x2));
  kv.set("nnz-mode", nnz_mode == NnzMode::grid            ? "grid"
                     : nnz_mode == NnzMode::per_component ? "per-component"
                                                          : "auto");
  kv.set("init", to_string(solver.init));
  kv.set("restarts", std::to_string(solver.restarts));
  kv.set("tol", format_number(solver.tolerance));
  kv.set("max-iter", std::to_string(solver.max_iterations));
  kv.set("holdout", format_number(holdout));
  kv.set("repeats", std::to_string(repeats));
  kv.set("permtest", run_permtest ? "true" : "false");
  kv.set("B", std::to_string(replicates));
  kv.set("alpha", format_number(alpha));
  kv.set("correction", to_string(correction));
  kv.set("permute", to_string(permute));
  kv.set("statistic", to_string(statistic));
  kv.set("null-scheme", to_string(null_scheme));
  if (!design_path.empty()) kv.set("design", design_path);
  kv.set("seed", std::to_string(seed));
  kv.set("threads", std::to_string(threads));
  kv.set("format", out_delimiter == '\t' ? "tsv" : "csv");
  return kv;
}

SplitSpec RunConfig::split() const {
  SplitSpec s;
  s.holdout_fraction = holdout;
  s.repeats = repeats;
  s.seed = derive_seed(seed, 1);
  return s;
}

PermutationSettings RunConfig::permutation() const {
  PermutationSettings p;
  p.replicates = replicates;
  p.alpha_level = alpha;
  p.statistic = statistic;
  p.correction = correction;
  p.permute = permute;
  p.null_scheme = null_scheme;
  p.split = split();
  p.seed = derive_seed(seed, 2);
  p.threads = threads;
  return p;
}

SolverConfig RunConfig::solver_config() const { return solver; }

SparsityPlan plan_sparsity(const RunConfig& config, Index p, Index q) {
  const std::vector<Index> a = config.nnz_x1.empty() ? std::vector<Index>{std::min<Index>(100, p)}
                                                     : config.nnz_x1;
  const std::vector<Index> b = config.nnz_x2.empty() ? std::vector<Index>{std::min<Index>(100, q)}
                                                     : config.nnz_x2;
  const auto K = static_cast<size_t>(config.components);
  const auto fits_k = [K](size_t n) { return n == 1 || n == K; };

  SparsityPlan plan;
  switch (config.nnz_mode) {
    case NnzMode::grid:
      plan.mode = SparsityPlan::Mode::grid;
      break;
    case NnzMode::per_component:
      if (!fits_k(a.size()) || !fits_k(b.size())) {
        throw UsageError("per-component nnz lists need 1 or " + std::to_string(K) + " entries");
      }
      plan.mode = SparsityPlan::Mode::per_component;
      break;
    case NnzMode::automatic:
      if (a.size() == 1 && b.size() == 1) {
        plan.mode = SparsityPlan::Mode::single;
      } else if (K > 1 && fits_k(a.size()) && fits_k(b.size())) {
        plan.mode = SparsityPlan::Mode::per_component;
      } else {
        plan.mode = SparsityPlan::Mode::grid;
      }
      break;
  }
  if (plan.mode == SparsityPlan::Mode::per_component && a.size() == 1 && b.size() == 1) {
    plan.mode = SparsityPlan::Mode::single;
  }

  if (plan.mode == SparsityPlan::Mode::grid) {
    for (auto ka : a) {
      for (auto kb : b) plan.pairs.push_back({ka, kb});
    }
  } else if (plan.mode == SparsityPlan::Mode::per_component) {
    for (size_t k = 0; k < K; ++k) {
      plan.pairs.push_back({a[a.size() == 1 ? 0 : k], b[b.size() == 1 ? 0 : k]});
    }
  } else {
    plan.pairs.push_back({a[0], b[0]});
  }
  for (const auto& sp : plan.pairs) {
    if (sp.k_alpha > p || sp.k_beta > q) {
      throw UsageError("sparsity (" + std::to_string(sp.k_alpha) + ", " +
                       std::to_string(sp.k_beta) + ") exceeds the data dimensions (" +
                       std::to_string(p) + ", " + std::to_string(q) + ")");
    }
  }
  return plan;
}

std::string to_string(Command command) {
  switch (command) {
    case Command::simulate: return "simulate";
    case Command::permtest: return "permtest";
    default: return "analyze";
  }
}

std::string to_string(Correction correction) {
  switch (correction) {
    case Correction::max_statistic: return "max";
    case Correction::none: return "none";
    default: return "bonferroni";
  }
}

std::string to_string(Statistic statistic) {
  return statistic == Statistic::out_of_sample ? "out-of-sample" : "in-sample";
}

std::string to_string(NullScheme scheme) {
  return scheme == NullScheme::full_refit ? "full-refit" : "deflated";
}

std::string to_string(Side side) { return side == Side::x1 ? "x1" : "x2"; }

std::string to_string(InitScheme scheme) {
  switch (scheme) {
    case InitScheme::normal: return "normal";
    case InitScheme::eigen: return "eigen";
    default: return "uniform";
  }
}

std::string to_string(SparsityPlan::Mode mode) {
  switch (mode) {
    case SparsityPlan::Mode::grid: return "grid";
    case SparsityPlan::Mode::per_component: return "per-component";
    default: return "single";
  }
}

}  // namespace toscca::cli
