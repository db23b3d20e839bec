#include "doctest.h"
#include "fixtures.hpp"

#include "toscca/metrics.hpp"
#include "toscca/simulate.hpp"

using namespace toscca;

TEST_CASE("canonical correlation is the cosine of the latents") {
  const Matrix x1 = fixtures::standardized(fixtures::gaussian(30, 6, 1));
  const Matrix x2 = fixtures::standardized(fixtures::gaussian(30, 4, 2));
  const Vector a = fixtures::gaussian(6, 1, 3).col(0);
  const Vector b = fixtures::gaussian(4, 1, 4).col(0);
  const Vector g = x1 * a;
  const Vector z = x2 * b;
  CHECK(canonical_correlation(a, b, x1, x2) ==
        doctest::Approx(g.dot(z) / (g.norm() * z.norm())).epsilon(1e-12));
  CHECK_THROWS_AS(canonical_correlation(Vector::Zero(6), b, x1, x2), Error);
}

TEST_CASE("deflation removes the latent direction") {
  const Matrix x = fixtures::standardized(fixtures::gaussian(20, 7, 5));
  const Vector g = (x * fixtures::gaussian(7, 1, 6).col(0)).normalized();
  const Matrix d = deflate(x, g);
  CHECK((d.transpose() * g).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((deflate(d, g) - d).cwiseAbs().maxCoeff() < 1e-12);
  Matrix in_place = x;
  const Vector loading = deflate_in_place(in_place, g);
  CHECK((in_place - d).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((loading - x.transpose() * g).norm() < 1e-12);
  CHECK_THROWS_AS(deflate(x, 2.0 * g), Error);
  CHECK_THROWS_AS(deflate(x, Vector::Zero(20)), Error);
}

TEST_CASE("cpev of orthogonal latents") {
  const Matrix x = fixtures::standardized(fixtures::gaussian(30, 5, 7));
  Eigen::JacobiSVD<Matrix> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  std::vector<Vector> latents;
  double total = 0.0;
  for (Index k = 0; k < 5; ++k) {
    latents.push_back(x * svd.matrixV().col(k));
    total += svd.singularValues()(k) * svd.singularValues()(k);
    const double expected = total / x.squaredNorm();
    CHECK(cpev(latents, x) == doctest::Approx(expected).epsilon(1e-10));
  }
  CHECK(cpev(latents, x) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK_THROWS_AS(cpev({}, x), Error);
}

TEST_CASE("adjusted cpev discounts by earlier latent correlations") {
  // Centered orthonormal directions.
  Matrix e = fixtures::gaussian(50, 3, 8);
  e = e.rowwise() - e.colwise().mean();
  Eigen::HouseholderQR<Matrix> qr(e);
  Matrix q = qr.householderQ() * Matrix::Identity(50, 3);
  CCAModel model;
  model.components.resize(3);
  model.components[0].gamma = q.col(0);
  model.components[1].gamma = q.col(1);
  model.components[2].gamma = 0.5 * q.col(0) + 0.2 * q.col(1) + std::sqrt(1.0 - 0.29) * q.col(2);
  for (auto& c : model.components) c.zeta = c.gamma;
  model.cpev_x1 = {0.1, 0.2, 0.3};
  model.cpev_x2 = model.cpev_x1;
  CHECK(adjusted_cpev(model, 1, Side::x1) == doctest::Approx(0.1));
  CHECK(adjusted_cpev(model, 2, Side::x1) == doctest::Approx(0.2));
  CHECK(adjusted_cpev(model, 3, Side::x1) == doctest::Approx(0.3 * 0.4).epsilon(1e-9));
  CHECK(adjusted_cpev(model, 3, Side::x2) == doctest::Approx(0.12).epsilon(1e-9));
  CHECK_THROWS_AS(adjusted_cpev(model, 4, Side::x1), Error);
  const auto [g, z] = cross_component_correlation(model);
  CHECK(g(0, 2) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(g(2, 1) == doctest::Approx(0.2).epsilon(1e-9));
  CHECK(g(1, 1) == 1.0);
}

TEST_CASE("fitted model diagnostics are consistent") {
  const Matrix x1 = fixtures::standardized(fixtures::gaussian(40, 30, 9));
  const Matrix x2 = fixtures::standardized(fixtures::gaussian(40, 20, 10));
  const std::vector<SparsityPair> sp{{8, 6}};
  const auto m = fit(x1, x2, 3, sp, SolverConfig{});
  REQUIRE(m.size() == 3);
  for (size_t k = 0; k < 3; ++k) {
    CHECK(m.cpev_x1[k] >= 0.0);
    CHECK(m.cpev_x1[k] <= 1.0);
    CHECK(m.adj_cpev_x1[k] <= m.cpev_x1[k] + 1e-15);
    if (k > 0) CHECK(m.cpev_x1[k] > m.cpev_x1[k - 1]);
  }
}

TEST_CASE("split validation") {
  SplitSpec s;
  CHECK(s.holdout_size(100) == 20);
  CHECK_NOTHROW(s.validate(100));
  CHECK_THROWS_AS(s.validate(10), Error);
  s.holdout_fraction = 1.0;
  CHECK_THROWS_AS(s.validate(100), Error);
}

TEST_CASE("out-of-sample correlation separates signal from noise") {
  SimulationDesign d;
  d.n = 80;
  d.p = 60;
  d.q = 40;
  d.seed = 3;
  PlantedComponent c;
  for (Index j = 0; j < 10; ++j) {
    c.support_x1.push_back(j);
    c.support_x2.push_back(j);
  }
  c.latent_strength = 10.0;
  d.components.push_back(c);
  const auto data = generate(d);
  const Matrix x1 = standardize(data.x1).values;
  const Matrix x2 = standardize(data.x2).values;
  SolverConfig cfg;
  cfg.restarts = 4;
  SplitSpec split;
  split.seed = 5;
  const auto [signal, repeats] = out_of_sample_correlation(x1, x2, {10, 10}, cfg, split);
  CHECK(repeats.size() == 10);
  CHECK(signal > 0.9);
  const auto again = out_of_sample_correlation(x1, x2, {10, 10}, cfg, split);
  CHECK(again.first == signal);

  const Matrix n1 = fixtures::standardized(fixtures::gaussian(80, 60, 30));
  const Matrix n2 = fixtures::standardized(fixtures::gaussian(80, 40, 31));
  const auto noise = out_of_sample_correlation(n1, n2, {10, 10}, cfg, split);
  CHECK(std::abs(noise.first) < 0.35);

  const std::vector<SparsityPair> sp{{10, 10}};
  const auto multi = out_of_sample_correlations(x1, x2, 2, sp, cfg, split);
  CHECK(multi.mean.size() == 2);
  CHECK(multi.repeats.size() == 10);
  CHECK(multi.mean[0] == doctest::Approx(signal));
}
