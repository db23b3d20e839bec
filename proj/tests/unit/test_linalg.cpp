#include "doctest.h"
#include "fixtures.hpp"

#include "toscca/linalg.hpp"

using namespace toscca;

TEST_CASE("dot agrees with Eigen") {
  for (Index n : {0, 1, 3, 4, 7, 64, 1001}) {
    const Vector a = fixtures::gaussian(n, 1, 1).col(0);
    const Vector b = fixtures::gaussian(n, 1, 2).col(0);
    CHECK(linalg::dot(a, b) == doctest::Approx(a.dot(b)).epsilon(1e-12));
  }
}

TEST_CASE("batched cross products equal single ones bit for bit") {
  const Matrix x = fixtures::gaussian(37, 300, 3);
  const Matrix vs = fixtures::gaussian(37, 5, 4);
  for (int threads : {1, 3}) {
    const Matrix batch = linalg::xt_times(x, vs, threads);
    for (Index c = 0; c < vs.cols(); ++c) {
      const Vector single = linalg::xt_times(x, Vector(vs.col(c)));
      CHECK(single == batch.col(c));
    }
  }
  CHECK((linalg::xt_times(x, Vector(vs.col(0))) - x.transpose() * vs.col(0)).norm() < 1e-10);
}

TEST_CASE("x_times skips zero weights") {
  const Matrix x = fixtures::gaussian(10, 6, 5);
  Vector w = Vector::Zero(6);
  w[1] = 2.0;
  w[4] = -1.0;
  CHECK((linalg::x_times(x, w) - x * w).norm() < 1e-12);
}

TEST_CASE("pearson and cosine") {
  const Vector a = fixtures::gaussian(20, 1, 6).col(0);
  const Vector b = fixtures::gaussian(20, 1, 7).col(0);
  CHECK(linalg::pearson(a, b) == doctest::Approx(fixtures::pearson(a, b)).epsilon(1e-12));
  CHECK(linalg::pearson(a, Vector::Constant(20, 3.0)) == 0.0);
  CHECK(linalg::pearson(a, a) == doctest::Approx(1.0));
  CHECK(linalg::pearson(a, -2.0 * a) == doctest::Approx(-1.0));
  CHECK(linalg::cosine(a, b) == doctest::Approx(a.dot(b) / (a.norm() * b.norm())));
}
