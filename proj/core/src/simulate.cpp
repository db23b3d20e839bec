#include "toscca/simulate.hpp"

#include "toscca/random.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace toscca {

std::string to_string(WeightPattern pattern) {
  switch (pattern) {
    case WeightPattern::constant: return "constant";
    case WeightPattern::alternating_sign: return "alternating_sign";
    case WeightPattern::decaying: return "decaying";
  }
  return "constant";
}

WeightPattern parse_weight_pattern(const std::string& text) {
  if (text == "constant") return WeightPattern::constant;
  if (text == "alternating_sign" || text == "alternating") return WeightPattern::alternating_sign;
  if (text == "decaying") return WeightPattern::decaying;
  throw Error("unknown weight pattern '" + text + "'");
}

void SimulationDesign::validate() const {
  if (n < 2 || p < 1 || q < 1) throw Error("design dimensions must be n >= 2, p >= 1, q >= 1");
  if (!(noise_sd > 0.0)) throw Error("noise_sd must be positive");
  std::set<Index> used1;
  std::set<Index> used2;
  for (size_t k = 0; k < components.size(); ++k) {
    const auto& c = components[k];
    const std::string label = "planted component " + std::to_string(k + 1);
    if (c.support_x1.empty() || c.support_x2.empty()) throw Error(label + " has an empty support");
    if (!(c.latent_strength > 0.0)) throw Error(label + " needs a positive latent strength");
    if (k > 0 && !(c.latent_strength < components[k - 1].latent_strength)) {
      throw Error("latent strengths must be strictly decreasing across components");
    }
    for (Index j : c.support_x1) {
      if (j < 0 || j >= p) throw Error(label + ": x1 support index out of range");
      if (!used1.insert(j).second) throw Error(label + ": x1 support overlaps another component");
    }
    for (Index j : c.support_x2) {
      if (j < 0 || j >= q) throw Error(label + ": x2 support index out of range");
      if (!used2.insert(j).second) throw Error(label + ": x2 support overlaps another component");
    }
  }
}

namespace {

std::vector<Index> block(Index start, Index count) {
  std::vector<Index> out(static_cast<size_t>(count));
  for (Index i = 0; i < count; ++i) out[static_cast<size_t>(i)] = start + i;
  return out;
}

std::vector<Index> parse_index_list(const std::string& text, const std::string& key) {
  std::vector<Index> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    const auto dash = item.find('-', item.find_first_not_of(" \t") + 1);
    const long long lo = parse_int(item.substr(0, dash), key);
    const long long hi = dash == std::string::npos ? lo : parse_int(item.substr(dash + 1), key);
    if (lo < 1 || hi < lo) throw Error("invalid index range '" + item + "' for " + key);
    for (long long j = lo; j <= hi; ++j) out.push_back(static_cast<Index>(j - 1));
  }
  return out;
}

std::string format_index_list(std::vector<Index> idx) {
  std::sort(idx.begin(), idx.end());
  std::string out;
  for (size_t i = 0; i < idx.size();) {
    size_t j = i;
    while (j + 1 < idx.size() && idx[j + 1] == idx[j] + 1) ++j;
    if (!out.empty()) out += ",";
    out += std::to_string(idx[i] + 1);
    if (j > i) out += "-" + std::to_string(idx[j] + 1);
    i = j + 1;
  }
  return out;
}

std::string format_real(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

SimulationDesign SimulationDesign::reference_design(std::uint64_t seed) {
  SimulationDesign d;
  d.n = 100;
  d.p = 2500;
  d.q = 500;
  d.noise_sd = 1.0;
  d.seed = seed;
  const Index sizes[] = {100, 95, 90};
  const double strengths[] = {36.0, 30.0, 25.0};
  Index offset = 0;
  for (int k = 0; k < 3; ++k) {
    PlantedComponent c;
    c.support_x1 = block(offset, sizes[k]);
    c.support_x2 = block(offset, sizes[k]);
    c.pattern = WeightPattern::constant;
    c.latent_strength = strengths[k];
    d.components.push_back(std::move(c));
    offset += sizes[k];
  }
  return d;
}

SimulationDesign SimulationDesign::from_config(const KeyValueFile& kv) {
  SimulationDesign d;
  d.n = static_cast<Index>(kv.get_int("n", d.n));
  d.p = static_cast<Index>(kv.get_int("p", d.p));
  d.q = static_cast<Index>(kv.get_int("q", d.q));
  d.noise_sd = kv.get_double("noise_sd", d.noise_sd);
  d.seed = static_cast<std::uint64_t>(kv.get_int("seed", 0));
  const auto count = kv.get_int("components", 0);
  if (count < 0) throw Error("components must be non-negative");
  for (long long k = 1; k <= count; ++k) {
    const std::string prefix = "component." + std::to_string(k) + ".";
    PlantedComponent c;
    c.support_x1 = parse_index_list(kv.require(prefix + "support_x1"), prefix + "support_x1");
    c.support_x2 = parse_index_list(kv.require(prefix + "support_x2"), prefix + "support_x2");
    c.pattern = parse_weight_pattern(kv.get(prefix + "pattern").value_or("constant"));
    c.latent_strength = parse_double(kv.require(prefix + "strength"), prefix + "strength");
    d.components.push_back(std::move(c));
  }
  d.validate();
  return d;
}

KeyValueFile SimulationDesign::to_config() const {
  KeyValueFile kv;
  kv.set("n", std::to_string(n));
  kv.set("p", std::to_string(p));
  kv.set("q", std::to_string(q));
  kv.set("noise_sd", format_real(noise_sd));
  kv.set("seed", std::to_string(seed));
  kv.set("components", std::to_string(components.size()));
  for (size_t k = 0; k < components.size(); ++k) {
    const std::string prefix = "component." + std::to_string(k + 1) + ".";
    const auto& c = components[k];
    kv.set(prefix + "support_x1", format_index_list(c.support_x1));
    kv.set(prefix + "support_x2", format_index_list(c.support_x2));
    kv.set(prefix + "pattern", to_string(c.pattern));
    kv.set(prefix + "strength", format_real(c.latent_strength));
  }
  return kv;
}

Vector pattern_weights(WeightPattern pattern, Index m) {
  Vector w(m);
  for (Index i = 0; i < m; ++i) {
    switch (pattern) {
      case WeightPattern::constant: w[i] = 1.0; break;
      case WeightPattern::alternating_sign: w[i] = (i % 2 == 0) ? 1.0 : -1.0; break;
      case WeightPattern::decaying: w[i] = static_cast<double>(m - i) / static_cast<double>(m); break;
    }
  }
  return w / w.norm();
}

SimulatedData generate(const SimulationDesign& design) {
  design.validate();
  const Index n = design.n;
  const auto k_planted = static_cast<Index>(design.components.size());

  Rng rng(design.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  SimulatedData out;
  auto& truth = out.truth;
  truth.latents.resize(n, k_planted);
  for (Index k = 0; k < k_planted; ++k) {
    for (Index i = 0; i < n; ++i) truth.latents(i, k) = normal(rng);
  }

  out.x1.values.resize(n, design.p);
  out.x2.values.resize(n, design.q);
  for (Index j = 0; j < design.p; ++j) {
    for (Index i = 0; i < n; ++i) out.x1.values(i, j) = design.noise_sd * normal(rng);
  }
  for (Index j = 0; j < design.q; ++j) {
    for (Index i = 0; i < n; ++i) out.x2.values(i, j) = design.noise_sd * normal(rng);
  }

  for (Index k = 0; k < k_planted; ++k) {
    const auto& c = design.components[static_cast<size_t>(k)];
    Vector a = Vector::Zero(design.p);
    Vector b = Vector::Zero(design.q);
    const Vector wa = pattern_weights(c.pattern, static_cast<Index>(c.support_x1.size()));
    const Vector wb = pattern_weights(c.pattern, static_cast<Index>(c.support_x2.size()));
    for (size_t i = 0; i < c.support_x1.size(); ++i) a[c.support_x1[i]] = wa[static_cast<Index>(i)];
    for (size_t i = 0; i < c.support_x2.size(); ++i) b[c.support_x2[i]] = wb[static_cast<Index>(i)];
    const Vector u = c.latent_strength * truth.latents.col(k);
    for (Index j : c.support_x1) out.x1.values.col(j) += a[j] * u;
    for (Index j : c.support_x2) out.x2.values.col(j) += b[j] * u;

    auto s1 = c.support_x1;
    auto s2 = c.support_x2;
    std::sort(s1.begin(), s1.end());
    std::sort(s2.begin(), s2.end());
    truth.supports_x1.push_back(std::move(s1));
    truth.supports_x2.push_back(std::move(s2));
    truth.weights_x1.push_back(std::move(a));
    truth.weights_x2.push_back(std::move(b));
  }

  const auto names = [](const std::string& prefix, Index m) {
    std::vector<std::string> v(static_cast<size_t>(m));
    for (Index j = 0; j < m; ++j) v[static_cast<size_t>(j)] = prefix + std::to_string(j + 1);
    return v;
  };
  out.x1.column_names = names("x1_", design.p);
  out.x2.column_names = names("x2_", design.q);
  out.x1.row_ids = names("s", n);
  out.x2.row_ids = out.x1.row_ids;
  return out;
}

SideScore score_support(const std::vector<Index>& estimated, const Vector& estimated_weights,
                        const std::vector<Index>& planted) {
  SideScore s;
  const std::set<Index> truth(planted.begin(), planted.end());
  const auto hits = std::count_if(estimated.begin(), estimated.end(),
                                  [&](Index j) { return truth.count(j) != 0; });
  if (!estimated.empty()) s.precision = static_cast<double>(hits) / static_cast<double>(estimated.size());
  if (!truth.empty()) s.recall = static_cast<double>(hits) / static_cast<double>(truth.size());
  if (s.precision + s.recall > 0.0) s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
  double mass = 0.0;
  double on_support = 0.0;
  for (Index j : estimated) {
    const double w = std::abs(estimated_weights[j]);
    mass += w;
    if (truth.count(j) != 0) on_support += w;
  }
  if (mass > 0.0) s.weighted_precision = on_support / mass;
  return s;
}

RecoveryScore score_recovery(const CCAModel& model, const GroundTruth& truth) {
  const auto k_est = static_cast<size_t>(model.size());
  const size_t k_true = truth.supports_x1.size();

  std::vector<std::vector<Index>> est1(k_est);
  std::vector<std::vector<Index>> est2(k_est);
  for (size_t e = 0; e < k_est; ++e) {
    est1[e] = model.components[e].alpha.support();
    est2[e] = model.components[e].beta.support();
  }

  std::vector<std::vector<double>> f1(k_est, std::vector<double>(k_true, 0.0));
  for (size_t e = 0; e < k_est; ++e) {
    for (size_t t = 0; t < k_true; ++t) {
      f1[e][t] = score_support(est1[e], model.components[e].alpha.weights, truth.supports_x1[t]).f1;
    }
  }

  RecoveryScore score;
  score.components.resize(k_true);
  for (size_t t = 0; t < k_true; ++t) score.components[t].planted = static_cast<Index>(t);

  std::vector<bool> est_used(k_est, false);
  std::vector<bool> true_used(k_true, false);
  for (;;) {
    double best = 0.0;
    size_t be = 0;
    size_t bt = 0;
    for (size_t t = 0; t < k_true; ++t) {
      if (true_used[t]) continue;
      for (size_t e = 0; e < k_est; ++e) {
        if (!est_used[e] && f1[e][t] > best) {
          best = f1[e][t];
          be = e;
          bt = t;
        }
      }
    }
    if (best <= 0.0) break;
    est_used[be] = true;
    true_used[bt] = true;
    auto& rec = score.components[bt];
    rec.matched = true;
    rec.estimated = static_cast<Index>(be);
    rec.x1 = score_support(est1[be], model.components[be].alpha.weights, truth.supports_x1[bt]);
    rec.x2 = score_support(est2[be], model.components[be].beta.weights, truth.supports_x2[bt]);
  }
  return score;
}

}  // namespace toscca
