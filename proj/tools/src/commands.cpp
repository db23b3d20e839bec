#include "toscca/cli/commands.hpp"

#include "toscca/metrics.hpp"
#include "toscca/simulate.hpp"
#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <unordered_map>

namespace toscca::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Dataset {
  StandardizedMatrix x1;
  StandardizedMatrix x2;
  std::vector<std::string> row_ids;
  bool joined_by_id = false;
  Index x1_input_rows = 0;
  Index x2_input_rows = 0;
  std::vector<std::string> warnings;
};

RawMatrix load(const std::string& path, const RunConfig& config) {
  return read_matrix(path, config.read);
}

void apply_log2(RawMatrix& m, const std::string& name) {
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = 0; i < m.rows(); ++i) {
      const double v = m.values(i, j);
      if (!(v > 0.0)) {
        throw InputError(name + ": log2 needs positive values, found " + format_number(v) +
                         " at row " + std::to_string(i + 1) + ", column " +
                         std::to_string(j + 1));
      }
      m.values(i, j) = std::log2(v);
    }
  }
}

RawMatrix select_rows(const RawMatrix& m, const std::vector<Index>& rows) {
  RawMatrix out;
  out.values.resize(static_cast<Index>(rows.size()), m.cols());
  for (size_t i = 0; i < rows.size(); ++i) {
    out.values.row(static_cast<Index>(i)) = m.values.row(rows[i]);
    out.row_ids.push_back(m.row_ids[static_cast<size_t>(rows[i])]);
  }
  out.column_names = m.column_names;
  return out;
}

// Aligns rows (by id when both blocks carry ids), log-transforms on request
// and standardizes both blocks.
Dataset prepare(RawMatrix x1, RawMatrix x2, const RunConfig& config) {
  Dataset d;
  d.x1_input_rows = x1.rows();
  d.x2_input_rows = x2.rows();
  if (!x1.row_ids.empty() && !x2.row_ids.empty() && x1.row_ids != x2.row_ids) {
    std::unordered_map<std::string, Index> where;
    for (Index i = 0; i < x2.rows(); ++i) {
      if (!where.emplace(x2.row_ids[static_cast<size_t>(i)], i).second) {
        throw InputError("duplicate row id '" + x2.row_ids[static_cast<size_t>(i)] + "' in x2");
      }
    }
    std::vector<Index> keep1;
    std::vector<Index> keep2;
    std::unordered_map<std::string, Index> seen;
    for (Index i = 0; i < x1.rows(); ++i) {
      const auto& id = x1.row_ids[static_cast<size_t>(i)];
      if (!seen.emplace(id, i).second) throw InputError("duplicate row id '" + id + "' in x1");
      if (auto it = where.find(id); it != where.end()) {
        keep1.push_back(i);
        keep2.push_back(it->second);
      }
    }
    if (keep1.size() < 2) {
      throw InputError("row ids do not match: x1 has " + std::to_string(x1.rows()) +
                       " rows, x2 has " + std::to_string(x2.rows()) + " rows, " +
                       std::to_string(keep1.size()) + " shared ids");
    }
    if (static_cast<Index>(keep1.size()) != x1.rows() ||
        static_cast<Index>(keep2.size()) != x2.rows()) {
      d.warnings.push_back("joined on row ids: kept " + std::to_string(keep1.size()) +
                           " rows (x1 had " + std::to_string(x1.rows()) + ", x2 had " +
                           std::to_string(x2.rows()) + ")");
    }
    x1 = select_rows(x1, keep1);
    x2 = select_rows(x2, keep2);
    d.joined_by_id = true;
  } else if (x1.rows() != x2.rows()) {
    throw InputError("row count mismatch: x1 has " + std::to_string(x1.rows()) +
                     " rows, x2 has " + std::to_string(x2.rows()) + " rows");
  }

  if (config.log2 == Log2Side::x1 || config.log2 == Log2Side::both) apply_log2(x1, "x1");
  if (config.log2 == Log2Side::x2 || config.log2 == Log2Side::both) apply_log2(x2, "x2");

  d.row_ids = !x1.row_ids.empty() ? x1.row_ids : x2.row_ids;
  if (d.row_ids.empty()) {
    for (Index i = 0; i < x1.rows(); ++i) d.row_ids.push_back("r" + std::to_string(i + 1));
  }
  const auto standardize_block = [&](RawMatrix m, const std::string& name) {
    if (m.column_names.empty()) {
      for (Index j = 0; j < m.cols(); ++j) {
        m.column_names.push_back(name + "_" + std::to_string(j + 1));
      }
    }
    try {
      return standardize(std::move(m), config.zero_variance);
    } catch (const Error& e) {
      throw InputError(name + ": " + e.what());
    }
  };
  d.x1 = standardize_block(std::move(x1), "x1");
  d.x2 = standardize_block(std::move(x2), "x2");
  for (const auto* s : {&d.x1, &d.x2}) {
    if (!s->dropped_columns.empty()) {
      d.warnings.push_back(std::string(s == &d.x1 ? "x1" : "x2") + ": dropped " +
                           std::to_string(s->dropped_columns.size()) +
                           " zero-variance columns");
    }
  }
  return d;
}

class Output {
 public:
  Output(const RunConfig& config) : dir_(config.out_dir), delimiter_(config.out_delimiter) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw InputError("cannot create output directory " + dir_.string());
  }

  char delimiter() const { return delimiter_; }
  std::string table_name(const std::string& stem) const {
    return stem + (delimiter_ == '\t' ? ".tsv" : ".csv");
  }
  void table(const std::string& stem, const Table& t) const {
    write_file_atomic(dir_ / table_name(stem), t.text());
  }
  void file(const std::string& name, const std::string& text) const {
    write_file_atomic(dir_ / name, text);
  }

 private:
  fs::path dir_;
  char delimiter_;
};

struct Analysis {
  SparsityPlan plan;
  std::vector<SparsityPair> fit_pairs;
  CCAModel model;
  bool has_oos = false;
  std::vector<int> oos_missing;
  std::vector<CanonicalComponent> grid;
  std::vector<std::optional<double>> grid_rho_out;
  size_t selected = 0;
};

std::span<const SparsityPair> pairs_for(const std::vector<SparsityPair>& pairs, Index k) {
  std::span<const SparsityPair> all(pairs);
  return all.size() == 1 ? all : all.first(static_cast<size_t>(k));
}

Analysis run_analysis(const Dataset& d, const RunConfig& config) {
  Analysis a;
  a.plan = plan_sparsity(config, d.x1.cols(), d.x2.cols());
  const SolverConfig solver = config.solver_config();
  const Matrix& x1 = d.x1.values;
  const Matrix& x2 = d.x2.values;

  if (a.plan.mode == SparsityPlan::Mode::grid) {
    a.grid = fit_component_grid(x1, x2, a.plan.pairs, solver);
    a.grid_rho_out.resize(a.grid.size());
    double best = -std::numeric_limits<double>::infinity();
    for (size_t g = 0; g < a.grid.size(); ++g) {
      double score = a.grid[g].degenerate ? -std::numeric_limits<double>::infinity()
                                          : a.grid[g].rho_in;
      if (config.repeats > 0) {
        const auto [mean, repeats] =
            out_of_sample_correlation(x1, x2, a.plan.pairs[g], solver, config.split());
        a.grid_rho_out[g] = mean;
        score = mean;
      }
      if (score > best) {
        best = score;
        a.selected = g;
      }
    }
    a.fit_pairs = {a.plan.pairs[a.selected]};
  } else {
    a.fit_pairs = a.plan.pairs;
  }

  a.model = fit(x1, x2, config.components, a.fit_pairs, solver);
  if (config.repeats > 0 && a.model.size() > 0) {
    const auto oos = out_of_sample_correlations(x1, x2, a.model.size(),
                                                pairs_for(a.fit_pairs, a.model.size()), solver,
                                                config.split());
    a.has_oos = true;
    a.oos_missing = oos.missing;
    for (Index k = 0; k < a.model.size(); ++k) {
      auto& c = a.model.components[static_cast<size_t>(k)];
      c.rho_out = oos.mean[static_cast<size_t>(k)];
      c.rho_out_repeats.clear();
      for (const auto& row : oos.repeats) c.rho_out_repeats.push_back(row[static_cast<size_t>(k)]);
    }
  }
  return a;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json base_summary(const RunConfig& config, const Dataset* d) {
  json s;
  s["tool"] = "toscca";
  s["version"] = kVersion;
  s["command"] = to_string(config.command);
  json cfg = json::object();
  const KeyValueFile resolved = config.to_keyvalue();
  for (const auto& [key, value] : resolved.entries()) cfg[key] = value;
  s["config"] = std::move(cfg);
  if (d != nullptr) {
    const auto columns = [](const std::vector<Index>& idx) {
      json out = json::array();
      for (auto j : idx) out.push_back(j + 1);
      return out;
    };
    s["data"] = {{"rows", d->x1.rows()},
                 {"x1_columns", d->x1.cols()},
                 {"x2_columns", d->x2.cols()},
                 {"x1_input_rows", d->x1_input_rows},
                 {"x2_input_rows", d->x2_input_rows},
                 {"joined_by_row_id", d->joined_by_id},
                 {"x1_dropped_columns", columns(d->x1.dropped_columns)},
                 {"x2_dropped_columns", columns(d->x2.dropped_columns)}};
  }
  s["warnings"] = json::array();
  if (d != nullptr) {
    for (const auto& w : d->warnings) s["warnings"].push_back(w);
  }
  return s;
}

json components_json(const Analysis& a) {
  json out = json::array();
  const CCAModel& m = a.model;
  for (Index k = 0; k < m.size(); ++k) {
    const auto i = static_cast<size_t>(k);
    const auto& c = m.components[i];
    out.push_back({{"component", k + 1},
                   {"k_alpha", c.sparsity.k_alpha},
                   {"k_beta", c.sparsity.k_beta},
                   {"nnz_x1", c.alpha.nnz},
                   {"nnz_x2", c.beta.nnz},
                   {"rho_in", c.rho_in},
                   {"rho_out", optional_number(c.rho_out)},
                   {"rho_out_missing", a.has_oos ? a.oos_missing[i] : 0},
                   {"iterations", c.iterations},
                   {"converged", c.converged},
                   {"init_seed", c.init_seed},
                   {"cpev_x1", m.cpev_x1[i]},
                   {"cpev_x2", m.cpev_x2[i]},
                   {"adjusted_cpev_x1", m.adj_cpev_x1[i]},
                   {"adjusted_cpev_x2", m.adj_cpev_x2[i]}});
  }
  return out;
}

void write_weights(const Output& o, const std::string& side, const StandardizedMatrix& data,
                   const CCAModel& m, bool x1_side) {
  Table table({"component", "variable", "column", "raw_weight", "normalized_weight", "rank"},
              o.delimiter());
  Table profile({"component", "side", "column", "variable", "weight"}, o.delimiter());
  for (Index k = 0; k < m.size(); ++k) {
    const auto& w = x1_side ? m.components[static_cast<size_t>(k)].alpha
                            : m.components[static_cast<size_t>(k)].beta;
    const Vector unit = w.normalized();
    auto support = w.support();
    std::stable_sort(support.begin(), support.end(), [&](Index a, Index b) {
      return std::abs(w.weights(a)) > std::abs(w.weights(b));
    });
    Index rank = 1;
    for (Index j : support) {
      table.cell(k + 1)
          .cell(data.column_names[static_cast<size_t>(j)])
          .cell(data.kept_columns[static_cast<size_t>(j)] + 1)
          .cell(w.weights(j))
          .cell(unit(j))
          .cell(rank++);
      table.end_row();
    }
    for (Index j = 0; j < unit.size(); ++j) {
      profile.cell(k + 1)
          .cell(side)
          .cell(data.kept_columns[static_cast<size_t>(j)] + 1)
          .cell(data.column_names[static_cast<size_t>(j)])
          .cell(unit(j));
      profile.end_row();
    }
  }
  o.table("weights_" + side, table);
  o.table("plot_weights_" + side, profile);
}

void write_analysis(const Output& o, const Dataset& d, const Analysis& a, json& summary) {
  const CCAModel& m = a.model;
  write_weights(o, "x1", d.x1, m, true);
  write_weights(o, "x2", d.x2, m, false);

  std::vector<std::string> score_cols{"id"};
  for (Index k = 1; k <= m.size(); ++k) {
    score_cols.push_back("gamma_" + std::to_string(k));
    score_cols.push_back("zeta_" + std::to_string(k));
  }
  Table scores(score_cols, o.delimiter());
  Table scatter({"id", "component", "x1_score", "x2_score"}, o.delimiter());
  for (Index i = 0; i < d.x1.rows(); ++i) {
    scores.cell(d.row_ids[static_cast<size_t>(i)]);
    for (const auto& c : m.components) scores.cell(c.gamma(i)).cell(c.zeta(i));
    scores.end_row();
  }
  for (Index k = 0; k < m.size(); ++k) {
    const auto& c = m.components[static_cast<size_t>(k)];
    for (Index i = 0; i < d.x1.rows(); ++i) {
      scatter.cell(d.row_ids[static_cast<size_t>(i)])
          .cell(k + 1)
          .cell(c.gamma_projection(i))
          .cell(c.zeta_projection(i));
      scatter.end_row();
    }
  }
  o.table("scores", scores);
  o.table("plot_scores", scatter);

  Table cpev({"component", "side", "cpev", "adjusted_cpev"}, o.delimiter());
  for (Index k = 0; k < m.size(); ++k) {
    const auto i = static_cast<size_t>(k);
    cpev.cell(k + 1).cell("x1").cell(m.cpev_x1[i]).cell(m.adj_cpev_x1[i]);
    cpev.end_row();
    cpev.cell(k + 1).cell("x2").cell(m.cpev_x2[i]).cell(m.adj_cpev_x2[i]);
    cpev.end_row();
  }
  o.table("plot_cpev", cpev);

  for (const auto& [side, corr] :
       {std::pair{"x1", &m.gamma_correlations}, std::pair{"x2", &m.zeta_correlations}}) {
    std::vector<std::string> cols{"component"};
    for (Index k = 1; k <= corr->cols(); ++k) cols.push_back("c" + std::to_string(k));
    Table t(cols, o.delimiter());
    for (Index i = 0; i < corr->rows(); ++i) {
      t.cell(i + 1);
      for (Index j = 0; j < corr->cols(); ++j) t.cell((*corr)(i, j));
      t.end_row();
    }
    o.table(std::string("cross_correlation_") + side, t);
  }

  Table comp({"component", "k_alpha", "k_beta", "nnz_x1", "nnz_x2", "rho_in", "rho_out",
              "iterations", "converged", "cpev_x1", "cpev_x2", "adjusted_cpev_x1",
              "adjusted_cpev_x2"},
             o.delimiter());
  for (Index k = 0; k < m.size(); ++k) {
    const auto i = static_cast<size_t>(k);
    const auto& c = m.components[i];
    comp.cell(k + 1).cell(c.sparsity.k_alpha).cell(c.sparsity.k_beta).cell(c.alpha.nnz)
        .cell(c.beta.nnz).cell(c.rho_in);
    if (c.rho_out) {
      comp.cell(*c.rho_out);
    } else {
      comp.cell("");
    }
    comp.cell(c.iterations).cell(c.converged).cell(m.cpev_x1[i]).cell(m.cpev_x2[i])
        .cell(m.adj_cpev_x1[i]).cell(m.adj_cpev_x2[i]);
    comp.end_row();
  }
  o.table("summary", comp);

  json sparsity = {{"mode", to_string(a.plan.mode)}, {"pairs", json::array()}};
  for (const auto& sp : a.plan.pairs) sparsity["pairs"].push_back({sp.k_alpha, sp.k_beta});
  if (a.plan.mode == SparsityPlan::Mode::grid) {
    const auto& sel = a.plan.pairs[a.selected];
    sparsity["selected"] = {sel.k_alpha, sel.k_beta};
    Table grid({"k_alpha", "k_beta", "nnz_x1", "nnz_x2", "rho_in", "rho_out", "iterations",
                "converged", "selected"},
               o.delimiter());
    Table grid_weights({"k_alpha", "k_beta", "side", "column", "variable", "weight"},
                       o.delimiter());
    json grid_json = json::array();
    for (size_t g = 0; g < a.grid.size(); ++g) {
      const auto& c = a.grid[g];
      grid.cell(c.sparsity.k_alpha).cell(c.sparsity.k_beta).cell(c.alpha.nnz).cell(c.beta.nnz)
          .cell(c.rho_in);
      if (a.grid_rho_out[g]) {
        grid.cell(*a.grid_rho_out[g]);
      } else {
        grid.cell("");
      }
      grid.cell(c.iterations).cell(c.converged).cell(g == a.selected);
      grid.end_row();
      for (const auto& [side, w, data] :
           {std::tuple{"x1", &c.alpha, &d.x1}, std::tuple{"x2", &c.beta, &d.x2}}) {
        const Vector unit = w->normalized();
        for (Index j : w->support()) {
          grid_weights.cell(c.sparsity.k_alpha).cell(c.sparsity.k_beta).cell(side)
              .cell(data->kept_columns[static_cast<size_t>(j)] + 1)
              .cell(data->column_names[static_cast<size_t>(j)]).cell(unit(j));
          grid_weights.end_row();
        }
      }
      grid_json.push_back({{"k_alpha", c.sparsity.k_alpha},
                           {"k_beta", c.sparsity.k_beta},
                           {"rho_in", c.rho_in},
                           {"rho_out", optional_number(a.grid_rho_out[g])},
                           {"iterations", c.iterations},
                           {"converged", c.converged}});
    }
    o.table("grid", grid);
    o.table("plot_grid_weights", grid_weights);
    summary["grid"] = std::move(grid_json);
  }
  summary["sparsity"] = std::move(sparsity);
  summary["components"] = components_json(a);
  summary["cross_correlation"] = {{"x1", matrix_json(m.gamma_correlations)},
                                  {"x2", matrix_json(m.zeta_correlations)}};
  json deflation = json::array();
  for (const auto& rec : m.deflation_trail) {
    deflation.push_back({{"x1_orthogonality", rec.x1_orthogonality},
                         {"x2_orthogonality", rec.x2_orthogonality}});
  }
  summary["deflation"] = std::move(deflation);
  summary["truncated"] = m.truncated;
  for (const auto& w : m.warnings) summary["warnings"].push_back(w);
}

void write_permtest(const Output& o, const PermutationReport& r, json& summary) {
  const auto K = r.components.size();
  Table tests({"component", "observed", "p_value", "significant", "threshold", "flagged"},
              o.delimiter());
  Table nulls({"replicate", "component", "statistic", "flagged"}, o.delimiter());
  Table hist({"component", "bin", "lower", "upper", "count", "observed"}, o.delimiter());
  json comps = json::array();
  for (size_t k = 0; k < K; ++k) {
    const auto& c = r.components[k];
    const auto flagged = std::count(c.null_flagged.begin(), c.null_flagged.end(), 1);
    double threshold = r.alpha_level;
    if (r.correction == Correction::bonferroni) threshold = r.alpha_level / static_cast<double>(K);
    if (r.correction == Correction::max_statistic) threshold = r.max_threshold;
    tests.cell(static_cast<long long>(k + 1)).cell(c.observed).cell(c.p_value).cell(c.significant)
        .cell(threshold).cell(static_cast<long long>(flagged));
    tests.end_row();
    for (size_t b = 0; b < c.null_statistics.size(); ++b) {
      nulls.cell(static_cast<long long>(b + 1)).cell(static_cast<long long>(k + 1))
          .cell(c.null_statistics[b]).cell(c.null_flagged[b] != 0);
      nulls.end_row();
    }

    constexpr int bins = 20;
    double lo = c.observed;
    double hi = c.observed;
    for (double v : c.null_statistics) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (!(hi > lo)) {
      lo -= 0.5;
      hi += 0.5;
    }
    const double width = (hi - lo) / bins;
    std::vector<long long> counts(bins, 0);
    for (double v : c.null_statistics) {
      const int b = std::clamp(static_cast<int>((v - lo) / width), 0, bins - 1);
      ++counts[static_cast<size_t>(b)];
    }
    for (int b = 0; b < bins; ++b) {
      hist.cell(static_cast<long long>(k + 1)).cell(b + 1).cell(lo + b * width)
          .cell(b + 1 == bins ? hi : lo + (b + 1) * width).cell(counts[static_cast<size_t>(b)])
          .cell(c.observed);
      hist.end_row();
    }
    comps.push_back({{"component", k + 1},
                     {"observed", c.observed},
                     {"p_value", c.p_value},
                     {"significant", c.significant},
                     {"threshold", std::isfinite(threshold) ? json(threshold) : json(nullptr)},
                     {"flagged_replicates", flagged}});
  }
  o.table("permtest", tests);
  o.table("null_samples", nulls);
  o.table("plot_null_histogram", hist);
  summary["permutation"] = {{"replicates", r.replicates},
                            {"alpha", r.alpha_level},
                            {"statistic", to_string(r.statistic)},
                            {"correction", to_string(r.correction)},
                            {"null_scheme", to_string(r.null_scheme)},
                            {"max_deflation_residual", r.max_deflation_residual},
                            {"components", std::move(comps)}};
}

PermutationReport run_permutation(const Dataset& d, const RunConfig& config,
                                  const std::vector<SparsityPair>& pairs) {
  return permutation_test(d.x1.values, d.x2.values, config.components, pairs,
                          config.solver_config(), config.permutation());
}

void finish(const Output& o, const RunConfig& config, json& summary, std::ostream& out,
            std::ostream& err) {
  o.file("summary.json", summary.dump(2) + "\n");
  o.file("run_config.txt", config.to_keyvalue().format());
  for (const auto& w : summary["warnings"]) err << "warning: " << w.get<std::string>() << "\n";
  if (summary.contains("components")) {
    for (const auto& c : summary["components"]) {
      out << "component " << c["component"].get<long long>()
          << ": rho_in=" << format_number(c["rho_in"].get<double>());
      if (!c["rho_out"].is_null()) out << " rho_out=" << format_number(c["rho_out"].get<double>());
      out << "\n";
    }
  }
  if (summary.contains("permutation")) {
    for (const auto& c : summary["permutation"]["components"]) {
      out << "component " << c["component"].get<long long>()
          << ": p=" << format_number(c["p_value"].get<double>())
          << (c["significant"].get<bool>() ? " significant" : " not significant") << "\n";
    }
  }
  out << "wrote " << config.out_dir << "\n";
}

void report_truncation(const CCAModel& m, std::ostream& err) {
  if (m.truncated) err << "warning: model stopped after " << m.size() << " components\n";
}

void write_recovery(const Output& o, const SimulatedData& sim, const Dataset& d,
                    const CCAModel& m, json& summary) {
  const RecoveryScore rec = score_recovery(m, sim.truth);
  Table table({"planted", "estimated", "matched", "x1_precision", "x1_recall", "x1_f1",
               "x1_weighted_precision", "x2_precision", "x2_recall", "x2_f1",
               "x2_weighted_precision"},
              o.delimiter());
  json rows = json::array();
  for (const auto& c : rec.components) {
    table.cell(c.planted + 1);
    if (c.estimated) {
      table.cell(*c.estimated + 1);
    } else {
      table.cell("");
    }
    table.cell(c.matched);
    for (const auto* s : {&c.x1, &c.x2}) {
      table.cell(s->precision).cell(s->recall).cell(s->f1).cell(s->weighted_precision);
    }
    table.end_row();
    rows.push_back({{"planted", c.planted + 1},
                    {"estimated", c.estimated ? json(*c.estimated + 1) : json(nullptr)},
                    {"matched", c.matched},
                    {"x1", {{"precision", c.x1.precision}, {"recall", c.x1.recall},
                            {"f1", c.x1.f1}, {"weighted_precision", c.x1.weighted_precision}}},
                    {"x2", {{"precision", c.x2.precision}, {"recall", c.x2.recall},
                            {"f1", c.x2.f1}, {"weighted_precision", c.x2.weighted_precision}}}});
  }
  o.table("recovery", table);
  summary["recovery"] = std::move(rows);

  // Planted against estimated weights, every variable, for overlay plots.
  Table overlay({"planted", "side", "column", "variable", "true_weight", "estimated_component",
                 "estimated_weight"},
                o.delimiter());
  for (const auto& c : rec.components) {
    const auto k = static_cast<size_t>(c.planted);
    for (const auto& [side, truth, data, x1_side] :
         {std::tuple{"x1", &sim.truth.weights_x1[k], &d.x1, true},
          std::tuple{"x2", &sim.truth.weights_x2[k], &d.x2, false}}) {
      Vector estimate = Vector::Zero(truth->size());
      if (c.estimated) {
        const auto& comp = m.components[static_cast<size_t>(*c.estimated)];
        const Vector unit = (x1_side ? comp.alpha : comp.beta).normalized();
        for (Index j = 0; j < unit.size(); ++j) {
          estimate(data->kept_columns[static_cast<size_t>(j)]) = unit(j);
        }
      }
      for (Index j = 0; j < truth->size(); ++j) {
        overlay.cell(c.planted + 1).cell(side).cell(j + 1)
            .cell(std::string(side) + "_" + std::to_string(j + 1)).cell((*truth)(j));
        if (c.estimated) {
          overlay.cell(*c.estimated + 1);
        } else {
          overlay.cell("");
        }
        overlay.cell(estimate(j));
        overlay.end_row();
      }
    }
  }
  o.table("plot_truth_overlay", overlay);
}

}  // namespace

int cmd_analyze(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const Dataset d = prepare(load(config.x1_path, config), load(config.x2_path, config), config);
  const Output o(config);
  const Analysis a = run_analysis(d, config);
  report_truncation(a.model, err);
  json summary = base_summary(config, &d);
  write_analysis(o, d, a, summary);
  if (config.run_permtest) write_permtest(o, run_permutation(d, config, a.fit_pairs), summary);
  finish(o, config, summary, out, err);
  return ok;
}

int cmd_simulate(const RunConfig& config, std::ostream& out, std::ostream& err) {
  SimulationDesign design = config.design_path.empty()
                                ? SimulationDesign::reference_design(config.seed)
                                : [&] {
                                    try {
                                      return SimulationDesign::from_config(
                                          KeyValueFile::load(config.design_path));
                                    } catch (const Error& e) {
                                      throw InputError(std::string("design: ") + e.what());
                                    }
                                  }();
  design.seed = config.seed;
  try {
    design.validate();
  } catch (const Error& e) {
    throw InputError(std::string("design: ") + e.what());
  }
  const SimulatedData sim = generate(design);
  const Output o(config);
  o.file(o.table_name("x1"), format_matrix(sim.x1, o.delimiter()));
  o.file(o.table_name("x2"), format_matrix(sim.x2, o.delimiter()));
  o.file("design.txt", design.to_config().format());

  const Dataset d = prepare(sim.x1, sim.x2, config);
  const Analysis a = run_analysis(d, config);
  report_truncation(a.model, err);
  json summary = base_summary(config, &d);
  summary["design"] = json::object();
  const KeyValueFile design_kv = design.to_config();
  for (const auto& [key, value] : design_kv.entries()) summary["design"][key] = value;
  write_analysis(o, d, a, summary);
  write_recovery(o, sim, d, a.model, summary);
  if (config.run_permtest) write_permtest(o, run_permutation(d, config, a.fit_pairs), summary);
  finish(o, config, summary, out, err);
  return ok;
}

int cmd_permtest(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const Dataset d = prepare(load(config.x1_path, config), load(config.x2_path, config), config);
  const SparsityPlan plan = plan_sparsity(config, d.x1.cols(), d.x2.cols());
  if (plan.mode == SparsityPlan::Mode::grid) {
    throw UsageError("permtest needs one sparsity pair or one per component, not a grid");
  }
  const Output o(config);
  Analysis a;
  a.plan = plan;
  a.fit_pairs = plan.pairs;
  a.model = fit(d.x1.values, d.x2.values, config.components, a.fit_pairs, config.solver_config());
  report_truncation(a.model, err);
  json summary = base_summary(config, &d);
  summary["sparsity"] = {{"mode", to_string(plan.mode)}, {"pairs", json::array()}};
  for (const auto& sp : plan.pairs) summary["sparsity"]["pairs"].push_back({sp.k_alpha, sp.k_beta});
  summary["components"] = components_json(a);
  write_permtest(o, run_permutation(d, config, a.fit_pairs), summary);
  finish(o, config, summary, out, err);
  return ok;
}

namespace {

struct Options {
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
  bool transpose = false;
  bool permtest = false;
  std::string config_path;
};

void add_options(CLI::App* sub, Options& o, Command command) {
  const auto add = [&](const std::string& key, const std::string& help) {
    o.options[key] = sub->add_option("--" + key, o.values[key], help);
  };
  sub->add_option("--config", o.config_path, "key=value settings file (flags win)");
  if (command != Command::simulate) {
    add("x1", "first data block, rows are samples");
    add("x2", "second data block, rows are samples");
    add("delimiter", "auto|comma|tab|semicolon");
    add("header", "auto|yes|no");
    add("row-ids", "first column holds row ids: auto|yes|no");
    o.options["transpose"] = sub->add_flag("--transpose", o.transpose, "files are variables x samples");
  } else {
    add("design", "simulation design file (default: built-in three-component design)");
  }
  add("log2", "log2-transform before standardizing: none|x1|x2|both");
  add("zero-variance", "error|drop");
  add("k", "number of components");
  add("nnz-x1", "nonzero counts for X1 weights, comma list");
  add("nnz-x2", "nonzero counts for X2 weights, comma list");
  add("nnz-mode", "auto|grid|per-component");
  add("init", "uniform|normal|eigen");
  add("restarts", "random starts per component");
  add("tol", "convergence tolerance on the correlation");
  add("max-iter", "iteration cap per component");
  add("holdout", "holdout fraction for the out-of-sample correlation");
  add("repeats", "holdout repeats (0 skips the out-of-sample estimate)");
  add("B", "permutation replicates");
  add("alpha", "significance level");
  add("correction", "bonferroni|max|none");
  add("permute", "x1|x2");
  add("statistic", "in-sample|out-of-sample");
  add("null-scheme", "deflated|full-refit");
  add("seed", "seed for every random stream");
  add("threads", "worker threads");
  add("out-dir", "output directory");
  add("format", "csv|tsv");
  if (command != Command::permtest) {
    o.options["permtest"] = sub->add_flag("--permtest", o.permtest, "also run the permutation test");
  }
}

KeyValueFile collect(const Options& o) {
  KeyValueFile kv;
  if (!o.config_path.empty()) {
    try {
      kv = KeyValueFile::load(o.config_path);
    } catch (const Error& e) {
      throw InputError(std::string("config: ") + e.what());
    }
  }
  for (const auto& [key, opt] : o.options) {
    if (opt->count() == 0) continue;
    if (key == "transpose") {
      kv.set(key, o.transpose ? "true" : "false");
    } else if (key == "permtest") {
      kv.set(key, o.permtest ? "true" : "false");
    } else {
      kv.set(key, o.values.at(key));
    }
  }
  return kv;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Thresholded ordered sparse canonical correlation analysis", "toscca"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  std::map<Command, Options> options;
  std::map<Command, CLI::App*> subs;
  for (const auto& [command, help] :
       {std::pair{Command::analyze, "fit components and write weights, scores and diagnostics"},
        std::pair{Command::simulate, "generate planted data, analyze it and score recovery"},
        std::pair{Command::permtest, "permutation test of every component"}}) {
    subs[command] = app.add_subcommand(to_string(command), help);
    add_options(subs[command], options[command], command);
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : usage_error;
  }

  try {
    for (const auto& [command, sub] : subs) {
      if (!sub->parsed()) continue;
      const RunConfig config = RunConfig::resolve(collect(options[command]), command);
      switch (command) {
        case Command::simulate: return cmd_simulate(config, out, err);
        case Command::permtest: return cmd_permtest(config, out, err);
        default: return cmd_analyze(config, out, err);
      }
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return usage_error;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return input_error;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return runtime_error;
  }
  return usage_error;
}

}  // namespace toscca::cli
