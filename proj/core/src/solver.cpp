#include "toscca/solver.hpp"

#include "toscca/linalg.hpp"
#include "toscca/metrics.hpp"
#include "toscca/random.hpp"

#include <cmath>
#include <string>

namespace toscca {

void SolverConfig::validate() const {
  if (!(tolerance > 0.0)) throw Error("solver tolerance must be positive");
  if (max_iterations < 1) throw Error("max_iterations must be at least 1");
  if (restarts < 1) throw Error("restarts must be at least 1");
}

namespace {

// Scales v to unit norm and returns the original norm (0 leaves v untouched).
double normalize(Vector& v) {
  const double nrm = linalg::norm(v);
  if (nrm > 0.0 && std::isfinite(nrm)) v /= nrm;
  return nrm;
}

bool usable_norm(double nrm) { return nrm > 0.0 && std::isfinite(nrm); }

void check_shapes(const Matrix& x1, const Matrix& x2) {
  if (x1.rows() != x2.rows()) {
    throw Error("row count mismatch: x1 has " + std::to_string(x1.rows()) + " rows, x2 has " +
                std::to_string(x2.rows()));
  }
  if (x1.rows() < 2) throw Error("need at least 2 samples");
}

struct ColumnState {
  SparsityPair sparsity;
  WeightVector alpha;
  WeightVector beta;
  Vector gamma;
  Vector zeta;
  double gamma_norm = 0.0;
  double zeta_norm = 0.0;
  double rho = 0.0;
  double rho_prev = 0.0;
  int iterations = 0;
  bool active = true;
  bool converged = false;
  bool degenerate = false;
  std::vector<double> trace;

  void mark_degenerate() {
    degenerate = true;
    active = false;
  }
};

CanonicalComponent finalize(ColumnState& s, const Matrix& x1, const Matrix& x2) {
  CanonicalComponent c;
  c.sparsity = s.sparsity;
  c.iterations = s.iterations;
  c.rho_trace = std::move(s.trace);
  c.degenerate = s.degenerate;
  c.converged = s.converged && !s.degenerate;
  c.rho_in = s.degenerate ? 0.0 : s.rho;
  if (!s.degenerate && c.rho_in < 0.0) {
    s.beta.weights = -s.beta.weights;
    s.zeta = -s.zeta;
    c.rho_in = -c.rho_in;
  }
  c.alpha = std::move(s.alpha);
  c.beta = std::move(s.beta);
  c.gamma = std::move(s.gamma);
  c.zeta = std::move(s.zeta);
  c.gamma_norm = s.gamma_norm;
  c.zeta_norm = s.zeta_norm;
  if (!c.degenerate) {
    c.gamma_projection = linalg::x_times(x1, c.alpha.normalized());
    c.zeta_projection = linalg::x_times(x2, c.beta.normalized());
  }
  return c;
}

}  // namespace

Vector init_alpha(Index p, InitScheme scheme, std::uint64_t seed, const Matrix* x1) {
  if (p < 1) throw Error("init_alpha: p must be at least 1");
  Rng rng(seed);
  Vector v(p);
  switch (scheme) {
    case InitScheme::uniform: {
      std::uniform_real_distribution<double> dist(-1.0, 1.0);
      for (Index j = 0; j < p; ++j) v[j] = dist(rng);
      break;
    }
    case InitScheme::normal:
    case InitScheme::eigen: {
      std::normal_distribution<double> dist(0.0, 1.0);
      for (Index j = 0; j < p; ++j) v[j] = dist(rng);
      break;
    }
  }
  if (!usable_norm(normalize(v))) v.setConstant(1.0 / std::sqrt(static_cast<double>(p)));
  if (scheme != InitScheme::eigen) return v;

  if (x1 == nullptr || x1->cols() != p) {
    throw Error("init_alpha: eigen initialization needs x1 with p columns");
  }
  for (int it = 0; it < 1000; ++it) {
    Vector w = linalg::xt_times(*x1, linalg::x_times(*x1, v));
    if (!usable_norm(normalize(w))) break;  // x1 is zero; keep the random start
    const double change = (w - v).norm();
    v = std::move(w);
    if (change < 1e-8) break;
  }
  Index arg = 0;
  v.cwiseAbs().maxCoeff(&arg);
  if (v[arg] < 0.0) v = -v;
  return v;
}

std::vector<CanonicalComponent> fit_component_grid_from(const Matrix& x1, const Matrix& x2,
                                                        std::span<const SparsityPair> grid,
                                                        const Vector& alpha0,
                                                        const SolverConfig& config) {
  check_shapes(x1, x2);
  config.validate();
  if (grid.empty()) throw Error("sparsity grid is empty");
  if (alpha0.size() != x1.cols()) throw Error("initial alpha length does not match x1 columns");
  for (const auto& sp : grid) sp.validate(x1.cols(), x2.cols());

  const Index n = x1.rows();
  const auto g = static_cast<Index>(grid.size());

  // Step 2 on the initial vector is shared by every column.
  Vector gamma0 = linalg::x_times(x1, alpha0);
  const double gamma0_norm = normalize(gamma0);

  std::vector<ColumnState> cols(static_cast<size_t>(g));
  for (Index c = 0; c < g; ++c) {
    auto& s = cols[static_cast<size_t>(c)];
    s.sparsity = grid[static_cast<size_t>(c)];
    s.alpha.weights = alpha0;
    s.alpha.nnz = alpha0.size();
    s.gamma = gamma0;
    s.gamma_norm = gamma0_norm;
    if (!usable_norm(gamma0_norm)) s.mark_degenerate();
  }

  std::vector<Index> active;
  Matrix latents;
  for (int iter = 1; iter <= config.max_iterations; ++iter) {
    active.clear();
    for (Index c = 0; c < g; ++c) {
      if (cols[static_cast<size_t>(c)].active) active.push_back(c);
    }
    if (active.empty()) break;

    // Steps 3-5: regress X2 on gamma, threshold, form zeta.
    latents.resize(n, static_cast<Index>(active.size()));
    for (size_t a = 0; a < active.size(); ++a) {
      latents.col(static_cast<Index>(a)) = cols[static_cast<size_t>(active[a])].gamma;
    }
    const Matrix beta_tilde = linalg::xt_times(x2, latents, config.threads);
    for (size_t a = 0; a < active.size(); ++a) {
      auto& s = cols[static_cast<size_t>(active[a])];
      s.iterations = iter;
      s.beta = soft_threshold_topk(beta_tilde.col(static_cast<Index>(a)), s.sparsity.k_beta);
      if (s.beta.degenerate()) {
        s.mark_degenerate();
        continue;
      }
      s.zeta = linalg::x_times(x2, s.beta.weights);
      s.zeta_norm = normalize(s.zeta);
      if (!usable_norm(s.zeta_norm)) s.mark_degenerate();
    }

    // Steps 6-9: regress X1 on zeta, threshold, form gamma, correlate.
    std::erase_if(active, [&](Index c) { return !cols[static_cast<size_t>(c)].active; });
    if (active.empty()) break;
    latents.resize(n, static_cast<Index>(active.size()));
    for (size_t a = 0; a < active.size(); ++a) {
      latents.col(static_cast<Index>(a)) = cols[static_cast<size_t>(active[a])].zeta;
    }
    const Matrix alpha_tilde = linalg::xt_times(x1, latents, config.threads);
    for (size_t a = 0; a < active.size(); ++a) {
      auto& s = cols[static_cast<size_t>(active[a])];
      s.alpha = soft_threshold_topk(alpha_tilde.col(static_cast<Index>(a)), s.sparsity.k_alpha);
      if (s.alpha.degenerate()) {
        s.mark_degenerate();
        continue;
      }
      s.gamma = linalg::x_times(x1, s.alpha.weights);
      s.gamma_norm = normalize(s.gamma);
      if (!usable_norm(s.gamma_norm)) {
        s.mark_degenerate();
        continue;
      }
      s.rho = linalg::pearson(s.gamma, s.zeta);
      s.trace.push_back(s.rho);
      if (std::abs(s.rho - s.rho_prev) < config.tolerance) {
        s.converged = true;
        s.active = false;
      }
      s.rho_prev = s.rho;
    }
  }

  std::vector<CanonicalComponent> out;
  out.reserve(static_cast<size_t>(g));
  for (auto& s : cols) out.push_back(finalize(s, x1, x2));
  return out;
}

CanonicalComponent fit_component_from(const Matrix& x1, const Matrix& x2, SparsityPair sparsity,
                                      const Vector& alpha0, const SolverConfig& config) {
  const SparsityPair grid[] = {sparsity};
  return std::move(fit_component_grid_from(x1, x2, grid, alpha0, config).front());
}

std::vector<CanonicalComponent> fit_component_grid(const Matrix& x1, const Matrix& x2,
                                                   std::span<const SparsityPair> grid,
                                                   const SolverConfig& config) {
  check_shapes(x1, x2);
  config.validate();
  std::vector<CanonicalComponent> best;
  for (int r = 0; r < config.restarts; ++r) {
    const std::uint64_t seed = config.seed + static_cast<std::uint64_t>(r);
    const Vector alpha0 = init_alpha(x1.cols(), config.init, seed, &x1);
    auto run = fit_component_grid_from(x1, x2, grid, alpha0, config);
    for (auto& c : run) c.init_seed = seed;
    if (best.empty()) {
      best = std::move(run);
      continue;
    }
    for (size_t i = 0; i < run.size(); ++i) {
      if (run[i].rho_in > best[i].rho_in) best[i] = std::move(run[i]);
    }
  }
  return best;
}

CanonicalComponent fit_component(const Matrix& x1, const Matrix& x2, SparsityPair sparsity,
                                 const SolverConfig& config) {
  const SparsityPair grid[] = {sparsity};
  return std::move(fit_component_grid(x1, x2, grid, config).front());
}

CCAModel fit(const Matrix& x1, const Matrix& x2, Index num_components,
             std::span<const SparsityPair> sparsity, const SolverConfig& config) {
  check_shapes(x1, x2);
  config.validate();
  const Index max_k = std::min(x1.cols(), x2.cols());
  if (num_components < 1 || num_components > max_k) {
    throw Error("number of components must lie in [1, " + std::to_string(max_k) + "]");
  }
  if (sparsity.size() != 1 && static_cast<Index>(sparsity.size()) != num_components) {
    throw Error("need one sparsity pair or one per component");
  }
  for (const auto& sp : sparsity) sp.validate(x1.cols(), x2.cols());

  const double x1_frob = x1.norm();
  const double x2_frob = x2.norm();

  CCAModel model;
  Matrix r1 = x1;
  Matrix r2 = x2;
  for (Index k = 0; k < num_components; ++k) {
    SolverConfig cfg = config;
    cfg.seed = config.seed + static_cast<std::uint64_t>(k);
    const SparsityPair sp = sparsity.size() == 1 ? sparsity[0] : sparsity[static_cast<size_t>(k)];
    CanonicalComponent comp = fit_component(r1, r2, sp, cfg);
    if (comp.degenerate) {
      model.truncated = true;
      model.warnings.push_back("component " + std::to_string(k + 1) +
                               " is degenerate; model truncated to " + std::to_string(k) +
                               " component(s)");
      break;
    }
    if (!comp.converged) {
      model.warnings.push_back("component " + std::to_string(k + 1) +
                               " hit the iteration cap without converging");
    }
    comp.x1_loading = deflate_in_place(r1, comp.gamma);
    comp.x2_loading = deflate_in_place(r2, comp.zeta);

    DeflationRecord rec;
    rec.x1_frobenius = r1.norm();
    rec.x2_frobenius = r2.norm();
    rec.x1_orthogonality = linalg::xt_times(r1, comp.gamma).cwiseAbs().maxCoeff() / x1_frob;
    rec.x2_orthogonality = linalg::xt_times(r2, comp.zeta).cwiseAbs().maxCoeff() / x2_frob;
    model.deflation_trail.push_back(rec);
    model.components.push_back(std::move(comp));
  }
  if (!model.components.empty()) attach_diagnostics(model, x1, x2);
  return model;
}

}  // namespace toscca
