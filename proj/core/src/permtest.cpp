#include "toscca/permtest.hpp"

#include "toscca/parallel.hpp"
#include "toscca/random.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace toscca {

void PermutationSettings::validate() const {
  if (replicates < 19) throw Error("permutation test needs at least 19 replicates");
  if (!(alpha_level > 0.0 && alpha_level < 1.0)) throw Error("alpha level must lie in (0, 1)");
}

double empirical_p_value(double observed, std::span<const double> null_statistics) {
  const auto exceed = std::count_if(null_statistics.begin(), null_statistics.end(),
                                    [observed](double v) { return v >= observed; });
  return (1.0 + static_cast<double>(exceed)) /
         (1.0 + static_cast<double>(null_statistics.size()));
}

void apply_correction(PermutationReport& report) {
  const auto k = static_cast<double>(report.components.size());
  for (auto& c : report.components) {
    c.p_value = empirical_p_value(c.observed, c.null_statistics);
  }
  switch (report.correction) {
    case Correction::none:
      for (auto& c : report.components) c.significant = c.p_value <= report.alpha_level;
      break;
    case Correction::bonferroni:
      for (auto& c : report.components) c.significant = c.p_value <= report.alpha_level / k;
      break;
    case Correction::max_statistic: {
      // Threshold = r-th largest first-component null, r = floor(alpha (B+1)):
      // observed > threshold is equivalent to an add-one p-value <= alpha.
      report.max_threshold = std::numeric_limits<double>::infinity();
      if (!report.components.empty()) {
        auto null1 = report.components.front().null_statistics;
        std::sort(null1.begin(), null1.end(), std::greater<>());
        const auto r = static_cast<size_t>(
            std::floor(report.alpha_level * static_cast<double>(null1.size() + 1) + 1e-9));
        if (r >= 1 && r <= null1.size()) report.max_threshold = null1[r - 1];
      }
      for (auto& c : report.components) c.significant = c.observed > report.max_threshold;
      break;
    }
  }
}

namespace {

struct Fitted {
  std::vector<double> statistics;
  std::vector<bool> flagged;
  std::vector<SparsityPair> sparsity;
  double deflation_residual = 0.0;
  Index fitted_components = 0;
};

Fitted fit_statistics(const Matrix& x1, const Matrix& x2, Index num_components,
                      std::span<const SparsityPair> sparsity, const SolverConfig& config,
                      Statistic statistic, const SplitSpec& split) {
  Fitted out;
  out.statistics.assign(static_cast<size_t>(num_components), 0.0);
  out.flagged.assign(static_cast<size_t>(num_components), true);

  const CCAModel model = fit(x1, x2, num_components, sparsity, config);
  out.fitted_components = model.size();
  for (Index k = 0; k < model.size(); ++k) {
    const auto& c = model.components[static_cast<size_t>(k)];
    out.statistics[static_cast<size_t>(k)] = c.rho_in;
    out.flagged[static_cast<size_t>(k)] = false;
    out.sparsity.push_back(c.sparsity);
  }
  for (const auto& rec : model.deflation_trail) {
    out.deflation_residual =
        std::max({out.deflation_residual, rec.x1_orthogonality, rec.x2_orthogonality});
  }

  if (statistic == Statistic::out_of_sample) {
    const auto oos =
        out_of_sample_correlations(x1, x2, num_components, sparsity, config, split);
    for (Index k = 0; k < num_components; ++k) {
      const auto i = static_cast<size_t>(k);
      out.statistics[i] = oos.mean[i];
      out.flagged[i] = out.flagged[i] || oos.missing[i] > 0;
    }
  }
  return out;
}

Matrix permute_rows(const Matrix& x, const std::vector<Index>& perm) {
  Matrix out(x.rows(), x.cols());
  for (Index i = 0; i < x.rows(); ++i) out.row(i) = x.row(perm[static_cast<size_t>(i)]);
  return out;
}

PermutationReport make_report(const PermutationSettings& settings,
                              const std::vector<double>& observed, Index k_tested) {
  PermutationReport report;
  report.replicates = settings.replicates;
  report.alpha_level = settings.alpha_level;
  report.statistic = settings.statistic;
  report.correction = settings.correction;
  report.null_scheme = settings.null_scheme;
  report.components.resize(static_cast<size_t>(k_tested));
  for (Index k = 0; k < k_tested; ++k) {
    auto& c = report.components[static_cast<size_t>(k)];
    c.observed = observed[static_cast<size_t>(k)];
    c.null_statistics.assign(static_cast<size_t>(settings.replicates), 0.0);
    c.null_flagged.assign(static_cast<size_t>(settings.replicates), 0);
  }
  report.replicate_sparsity.resize(static_cast<size_t>(settings.replicates));
  return report;
}

std::vector<Index> replicate_permutation(const PermutationSettings& settings, Index n, Index b) {
  Rng rng(derive_seed(settings.seed, static_cast<std::uint64_t>(b) + 1));
  return random_permutation(n, rng);
}

PermutationReport run_full_refit(const Matrix& x1, const Matrix& x2, Index num_components,
                                 std::span<const SparsityPair> sparsity,
                                 const SolverConfig& config, const PermutationSettings& settings) {
  SolverConfig observed_config = config;
  observed_config.threads = settings.threads;
  const Fitted observed = fit_statistics(x1, x2, num_components, sparsity, observed_config,
                                         settings.statistic, settings.split);
  // Only components the observed fit produced are tested.
  const Index k_tested = observed.fitted_components;
  PermutationReport report = make_report(settings, observed.statistics, k_tested);
  report.max_deflation_residual = observed.deflation_residual;
  if (k_tested == 0) return report;

  std::vector<double> residuals(static_cast<size_t>(settings.replicates), 0.0);
  const std::span<const SparsityPair> tested_sparsity =
      sparsity.size() == 1 ? sparsity : sparsity.first(static_cast<size_t>(k_tested));

  SolverConfig replicate_config = config;
  replicate_config.threads = 1;
  parallel_for(settings.replicates, settings.threads, [&](Index b) {
    const auto stream = static_cast<std::uint64_t>(b) + 1;
    const auto perm = replicate_permutation(settings, x1.rows(), b);
    SolverConfig cfg = replicate_config;
    cfg.seed = derive_seed(config.seed, stream);
    SplitSpec split = settings.split;
    split.seed = derive_seed(settings.split.seed, stream);

    const bool shuffle_x1 = settings.permute == Side::x1;
    const Matrix shuffled = permute_rows(shuffle_x1 ? x1 : x2, perm);
    const Fitted rep = shuffle_x1 ? fit_statistics(shuffled, x2, k_tested, tested_sparsity, cfg,
                                                   settings.statistic, split)
                                  : fit_statistics(x1, shuffled, k_tested, tested_sparsity, cfg,
                                                   settings.statistic, split);
    for (Index k = 0; k < static_cast<Index>(rep.sparsity.size()); ++k) {
      const auto& requested = tested_sparsity.size() == 1 ? tested_sparsity[0]
                                                          : tested_sparsity[static_cast<size_t>(k)];
      if (!(rep.sparsity[static_cast<size_t>(k)] == requested)) {
        throw Error("permuted fit used a different sparsity than the observed fit");
      }
    }
    const auto bi = static_cast<size_t>(b);
    for (Index k = 0; k < k_tested; ++k) {
      auto& c = report.components[static_cast<size_t>(k)];
      c.null_statistics[bi] = rep.statistics[static_cast<size_t>(k)];
      c.null_flagged[bi] = rep.flagged[static_cast<size_t>(k)] ? 1 : 0;
    }
    report.replicate_sparsity[bi] = rep.sparsity;
    residuals[bi] = rep.deflation_residual;
  });
  for (double r : residuals) {
    report.max_deflation_residual = std::max(report.max_deflation_residual, r);
  }
  return report;
}

// Statistic of one component fitted on (a, b); flagged when degenerate.
std::pair<double, bool> single_statistic(const Matrix& a, const Matrix& b, SparsityPair sp,
                                         const SolverConfig& cfg, const PermutationSettings& settings,
                                         const SplitSpec& split, SparsityPair* used) {
  if (settings.statistic == Statistic::in_sample) {
    const CanonicalComponent comp = fit_component(a, b, sp, cfg);
    if (!(comp.sparsity == sp)) throw Error("permuted fit used a different sparsity than the observed fit");
    if (used != nullptr) *used = comp.sparsity;
    return {comp.degenerate ? 0.0 : comp.rho_in, comp.degenerate};
  }
  const SparsityPair grid[] = {sp};
  const auto oos = out_of_sample_correlations(a, b, 1, grid, cfg, split);
  if (used != nullptr) *used = sp;
  return {oos.mean.front(), oos.missing.front() > 0};
}

PermutationReport run_deflated(const Matrix& x1, const Matrix& x2, Index num_components,
                               std::span<const SparsityPair> sparsity, const SolverConfig& config,
                               const PermutationSettings& settings) {
  SolverConfig observed_config = config;
  observed_config.threads = settings.threads;
  const CCAModel model = fit(x1, x2, num_components, sparsity, observed_config);
  const Index k_tested = model.size();

  PermutationReport report =
      make_report(settings, std::vector<double>(static_cast<size_t>(k_tested), 0.0), k_tested);
  for (const auto& rec : model.deflation_trail) {
    report.max_deflation_residual =
        std::max({report.max_deflation_residual, rec.x1_orthogonality, rec.x2_orthogonality});
  }

  Matrix r1 = x1;
  Matrix r2 = x2;
  SolverConfig replicate_config = config;
  replicate_config.threads = 1;
  for (Index k = 0; k < k_tested; ++k) {
    const auto& comp = model.components[static_cast<size_t>(k)];
    const SparsityPair sp = sparsity.size() == 1 ? sparsity[0] : sparsity[static_cast<size_t>(k)];
    auto& test = report.components[static_cast<size_t>(k)];
    const auto kk = static_cast<std::uint64_t>(k);

    if (settings.statistic == Statistic::in_sample) {
      test.observed = comp.rho_in;
    } else {
      SolverConfig cfg = observed_config;
      cfg.seed = config.seed + kk;
      test.observed = single_statistic(r1, r2, sp, cfg, settings, settings.split, nullptr).first;
    }

    parallel_for(settings.replicates, settings.threads, [&](Index b) {
      const auto stream = static_cast<std::uint64_t>(b) + 1;
      const auto perm = replicate_permutation(settings, x1.rows(), b);
      SolverConfig cfg = replicate_config;
      cfg.seed = derive_seed(config.seed + kk, stream);
      SplitSpec split = settings.split;
      split.seed = derive_seed(settings.split.seed, stream);

      SparsityPair used;
      const bool shuffle_x1 = settings.permute == Side::x1;
      const Matrix shuffled = permute_rows(shuffle_x1 ? r1 : r2, perm);
      const auto [stat, flagged] =
          shuffle_x1 ? single_statistic(shuffled, r2, sp, cfg, settings, split, &used)
                     : single_statistic(r1, shuffled, sp, cfg, settings, split, &used);
      const auto bi = static_cast<size_t>(b);
      test.null_statistics[bi] = stat;
      test.null_flagged[bi] = flagged ? 1 : 0;
      report.replicate_sparsity[bi].push_back(used);
    });

    if (k + 1 < k_tested) {
      deflate_in_place(r1, comp.gamma);
      deflate_in_place(r2, comp.zeta);
    }
  }
  return report;
}

}  // namespace

PermutationReport permutation_test(const Matrix& x1, const Matrix& x2, Index num_components,
                                   std::span<const SparsityPair> sparsity,
                                   const SolverConfig& config,
                                   const PermutationSettings& settings) {
  settings.validate();
  if (settings.statistic == Statistic::out_of_sample) settings.split.validate(x1.rows());
  PermutationReport report =
      settings.null_scheme == NullScheme::deflated
          ? run_deflated(x1, x2, num_components, sparsity, config, settings)
          : run_full_refit(x1, x2, num_components, sparsity, config, settings);
  apply_correction(report);
  return report;
}

}  // namespace toscca
