#include "toscca/metrics.hpp"

#include "toscca/linalg.hpp"
#include "toscca/parallel.hpp"
#include "toscca/random.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace toscca {

double canonical_correlation(const Vector& alpha, const Vector& beta, const Matrix& x1,
                             const Matrix& x2) {
  if (x1.rows() != x2.rows()) throw Error("canonical_correlation: row count mismatch");
  const Vector g = linalg::x_times(x1, alpha);
  const Vector z = linalg::x_times(x2, beta);
  const double gg = linalg::dot(g, g);
  const double zz = linalg::dot(z, z);
  if (!(gg > 0.0) || !(zz > 0.0)) {
    throw Error("canonical_correlation: degenerate weights give a zero latent variable");
  }
  return std::clamp(linalg::dot(g, z) / (std::sqrt(gg) * std::sqrt(zz)), -1.0, 1.0);
}

Vector deflate_in_place(Matrix& x, const Vector& gamma) {
  if (gamma.size() != x.rows()) throw Error("deflate: gamma length does not match rows");
  const double gg = linalg::dot(gamma, gamma);
  if (!(gg > 0.0)) throw Error("deflate: gamma is zero");
  if (std::abs(std::sqrt(gg) - 1.0) > 1e-8) throw Error("deflate: gamma must have unit norm");
  Vector loading = linalg::xt_times(x, gamma) / gg;
  for (Index j = 0; j < x.cols(); ++j) x.col(j).noalias() -= loading[j] * gamma;
  return loading;
}

Matrix deflate(const Matrix& x, const Vector& gamma) {
  Matrix out = x;
  deflate_in_place(out, gamma);
  return out;
}

double cpev(std::span<const Vector> latents, const Matrix& x_original) {
  if (latents.empty()) throw Error("cpev: no latent variables given");
  const double total = x_original.squaredNorm();
  if (!(total > 0.0)) throw Error("cpev: data matrix has zero total variance");
  double captured = 0.0;
  for (const auto& g : latents) {
    if (g.size() != x_original.rows()) throw Error("cpev: latent length does not match rows");
    captured += linalg::dot(g, g);
  }
  return captured / total;
}

double adjusted_cpev(const CCAModel& model, Index k, Side side) {
  if (k < 1 || k > model.size()) {
    throw Error("adjusted_cpev: component " + std::to_string(k) + " outside [1, " +
                std::to_string(model.size()) + "]");
  }
  const auto& cum = side == Side::x1 ? model.cpev_x1 : model.cpev_x2;
  if (static_cast<Index>(cum.size()) < k) throw Error("adjusted_cpev: cpev not computed");
  const auto latent = [&](Index i) -> const Vector& {
    const auto& c = model.components[static_cast<size_t>(i)];
    return side == Side::x1 ? c.gamma : c.zeta;
  };
  double factor = 1.0;
  for (Index i = 0; i + 1 < k; ++i) {
    factor *= 1.0 - std::abs(linalg::pearson(latent(i), latent(k - 1)));
  }
  return cum[static_cast<size_t>(k - 1)] * factor;
}

std::pair<Matrix, Matrix> cross_component_correlation(const CCAModel& model) {
  const Index k = model.size();
  Matrix g = Matrix::Identity(k, k);
  Matrix z = Matrix::Identity(k, k);
  for (Index i = 0; i < k; ++i) {
    for (Index j = i + 1; j < k; ++j) {
      const auto& ci = model.components[static_cast<size_t>(i)];
      const auto& cj = model.components[static_cast<size_t>(j)];
      g(i, j) = g(j, i) = linalg::pearson(ci.gamma, cj.gamma);
      z(i, j) = z(j, i) = linalg::pearson(ci.zeta, cj.zeta);
    }
  }
  return {std::move(g), std::move(z)};
}

void attach_diagnostics(CCAModel& model, const Matrix& x1_original, const Matrix& x2_original) {
  const Index k = model.size();
  std::vector<Vector> g;
  std::vector<Vector> z;
  model.cpev_x1.clear();
  model.cpev_x2.clear();
  for (const auto& c : model.components) {
    g.push_back(c.gamma_projection);
    z.push_back(c.zeta_projection);
    model.cpev_x1.push_back(cpev(g, x1_original));
    model.cpev_x2.push_back(cpev(z, x2_original));
  }
  model.adj_cpev_x1.clear();
  model.adj_cpev_x2.clear();
  for (Index i = 1; i <= k; ++i) {
    model.adj_cpev_x1.push_back(adjusted_cpev(model, i, Side::x1));
    model.adj_cpev_x2.push_back(adjusted_cpev(model, i, Side::x2));
  }
  std::tie(model.gamma_correlations, model.zeta_correlations) = cross_component_correlation(model);
}

Index SplitSpec::holdout_size(Index n) const {
  return static_cast<Index>(std::llround(static_cast<double>(n) * holdout_fraction));
}

void SplitSpec::validate(Index n) const {
  if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0)) {
    throw Error("holdout fraction must lie in (0, 1)");
  }
  if (repeats < 1) throw Error("split repeats must be at least 1");
  const Index h = holdout_size(n);
  if (h < 3) {
    throw Error("holdout too small: " + std::to_string(h) + " of " + std::to_string(n) +
                " rows (need at least 3)");
  }
  if (n - h < 3) throw Error("training split too small after holding out rows");
}

namespace {

Matrix take_rows(const Matrix& x, const std::vector<Index>& rows) {
  Matrix out(static_cast<Index>(rows.size()), x.cols());
  for (size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = x.row(rows[i]);
  return out;
}

// Standardizes `train` in place and applies the same transform to `holdout`.
// Columns without training variance are centered and left unscaled.
void standardize_pair(Matrix& train, Matrix& holdout) {
  const auto n = static_cast<double>(train.rows());
  for (Index j = 0; j < train.cols(); ++j) {
    const double mean = train.col(j).sum() / n;
    train.col(j).array() -= mean;
    holdout.col(j).array() -= mean;
    const double sd = std::sqrt(train.col(j).squaredNorm() / (n - 1.0));
    if (sd > 1e-12 * (1.0 + std::abs(mean))) {
      train.col(j) /= sd;
      holdout.col(j) /= sd;
    }
  }
}

}  // namespace

OutOfSampleResult out_of_sample_correlations(const Matrix& x1, const Matrix& x2,
                                             Index num_components,
                                             std::span<const SparsityPair> sparsity,
                                             const SolverConfig& config, const SplitSpec& split) {
  if (x1.rows() != x2.rows()) throw Error("out_of_sample: row count mismatch");
  const Index n = x1.rows();
  split.validate(n);
  const Index h = split.holdout_size(n);

  OutOfSampleResult result;
  result.repeats.assign(static_cast<size_t>(split.repeats),
                        std::vector<double>(static_cast<size_t>(num_components), 0.0));

  std::vector<Index> fitted(static_cast<size_t>(split.repeats), 0);
  SolverConfig inner = config;
  inner.threads = 1;
  parallel_for(split.repeats, config.threads, [&](Index r) {
    Rng rng(derive_seed(split.seed, static_cast<std::uint64_t>(r)));
    const auto perm = random_permutation(n, rng);
    std::vector<Index> hold(perm.begin(), perm.begin() + h);
    std::vector<Index> train(perm.begin() + h, perm.end());
    std::sort(hold.begin(), hold.end());
    std::sort(train.begin(), train.end());

    Matrix t1 = take_rows(x1, train), t2 = take_rows(x2, train);
    Matrix h1 = take_rows(x1, hold), h2 = take_rows(x2, hold);
    standardize_pair(t1, h1);
    standardize_pair(t2, h2);

    const CCAModel model = fit(t1, t2, num_components, sparsity, inner);
    fitted[static_cast<size_t>(r)] = model.size();
    auto& row = result.repeats[static_cast<size_t>(r)];
    for (Index k = 0; k < model.size(); ++k) {
      const auto& c = model.components[static_cast<size_t>(k)];
      const Vector g = linalg::x_times(h1, c.alpha.weights);
      const Vector z = linalg::x_times(h2, c.beta.weights);
      row[static_cast<size_t>(k)] = linalg::cosine(g, z);
      // Carry the holdout rows through the training deflation.
      h1.noalias() -= (g / c.gamma_norm) * c.x1_loading.transpose();
      h2.noalias() -= (z / c.zeta_norm) * c.x2_loading.transpose();
    }
  });

  result.mean.assign(static_cast<size_t>(num_components), 0.0);
  result.missing.assign(static_cast<size_t>(num_components), 0);
  for (size_t r = 0; r < fitted.size(); ++r) {
    for (Index k = fitted[r]; k < num_components; ++k) ++result.missing[static_cast<size_t>(k)];
  }
  for (const auto& row : result.repeats) {
    for (size_t k = 0; k < row.size(); ++k) result.mean[k] += row[k];
  }
  for (auto& m : result.mean) m /= static_cast<double>(split.repeats);
  return result;
}

std::pair<double, std::vector<double>> out_of_sample_correlation(const Matrix& x1,
                                                                 const Matrix& x2,
                                                                 SparsityPair sparsity,
                                                                 const SolverConfig& config,
                                                                 const SplitSpec& split) {
  const SparsityPair sp[] = {sparsity};
  auto res = out_of_sample_correlations(x1, x2, 1, sp, config, split);
  std::vector<double> per_repeat;
  per_repeat.reserve(res.repeats.size());
  for (const auto& row : res.repeats) per_repeat.push_back(row.front());
  return {res.mean.front(), std::move(per_repeat)};
}

}  // namespace toscca
