#include "doctest.h"
#include "fixtures.hpp"

#include "toscca/core.hpp"
#include "toscca/keyvalue.hpp"
#include "toscca/random.hpp"

#include <algorithm>
#include <set>

using namespace toscca;

TEST_CASE("soft threshold keeps the top k and shrinks by the next magnitude") {
  Vector v(4);
  v << 3.0, -1.0, 2.0, 0.5;
  const auto w = soft_threshold_topk(v, 2);
  Vector expected(4);
  expected << 2.0, 0.0, 1.0, 0.0;
  CHECK(w.weights == expected);
  CHECK(w.nnz == 2);
  CHECK(w.threshold == 1.0);
  CHECK(w.support() == std::vector<Index>{0, 2});
}

TEST_CASE("soft threshold with k equal to the length is the identity") {
  const Vector v = fixtures::gaussian(9, 1, 3).col(0);
  const auto w = soft_threshold_topk(v, 9);
  CHECK(w.weights == v);
  CHECK(w.threshold == 0.0);
  CHECK(w.nnz == 9);
}

TEST_CASE("soft threshold signs follow the input") {
  Vector v(5);
  v << -4.0, 3.0, -2.5, 0.1, 1.0;
  const auto w = soft_threshold_topk(v, 3);
  CHECK(w.weights[0] == doctest::Approx(-3.0));
  CHECK(w.weights[1] == doctest::Approx(2.0));
  CHECK(w.weights[2] == doctest::Approx(-1.5));
  CHECK(w.weights[3] == 0.0);
  CHECK(w.weights[4] == 0.0);
}

TEST_CASE("soft threshold on ties never exceeds k nonzeros") {
  Vector v = Vector::Ones(6);
  for (Index k = 1; k <= 6; ++k) CHECK(soft_threshold_topk(v, k).nnz <= k);
  CHECK(soft_threshold_topk(v, 2).degenerate());
  CHECK(soft_threshold_topk(v, 6).nnz == 6);
}

TEST_CASE("soft threshold of zero is degenerate") {
  const auto w = soft_threshold_topk(Vector::Zero(7), 3);
  CHECK(w.degenerate());
  CHECK(w.weights.isZero(0.0));
  CHECK(w.normalized().isZero(0.0));
}

TEST_CASE("soft threshold rejects k outside [1, m]") {
  const Vector v = Vector::Ones(3);
  CHECK_THROWS_AS(soft_threshold_topk(v, 0), Error);
  CHECK_THROWS_AS(soft_threshold_topk(v, 4), Error);
}

TEST_CASE("soft threshold properties on random vectors") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const Index m = 20 + static_cast<Index>(seed % 17);
    const Vector v = fixtures::gaussian(m, 1, seed).col(0);
    std::set<Index> previous;
    for (Index k = 1; k <= m; ++k) {
      const auto w = soft_threshold_topk(v, k);
      REQUIRE(w.nnz <= k);
      REQUIRE(w.nnz == static_cast<Index>(w.support().size()));
      // Surviving entries keep their sign and are shrunk by exactly the threshold.
      for (Index j : w.support()) {
        REQUIRE(w.weights[j] * v[j] > 0.0);
        REQUIRE(std::abs(w.weights[j]) == doctest::Approx(std::abs(v[j]) - w.threshold));
      }
      // Every dropped entry is no larger than every kept one.
      double min_kept = std::numeric_limits<double>::infinity();
      double max_dropped = 0.0;
      for (Index j = 0; j < m; ++j) {
        if (w.weights[j] != 0.0) {
          min_kept = std::min(min_kept, std::abs(v[j]));
        } else {
          max_dropped = std::max(max_dropped, std::abs(v[j]));
        }
      }
      REQUIRE(max_dropped <= min_kept);
      // Supports grow with k.
      const auto s = w.support();
      REQUIRE(std::includes(s.begin(), s.end(), previous.begin(), previous.end()));
      previous = std::set<Index>(s.begin(), s.end());
    }
  }
}

TEST_CASE("raw matrix validation names the bad cell") {
  RawMatrix m;
  m.values = Matrix::Ones(3, 2);
  CHECK_NOTHROW(m.validate());
  m.values(1, 0) = std::numeric_limits<double>::quiet_NaN();
  try {
    m.validate();
    FAIL("expected an error");
  } catch (const Error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("row 2") != std::string::npos);
    CHECK(msg.find("column 1") != std::string::npos);
  }
  RawMatrix one_row;
  one_row.values = Matrix::Ones(1, 3);
  CHECK_THROWS_AS(one_row.validate(), Error);
  RawMatrix bad_names;
  bad_names.values = Matrix::Ones(3, 2);
  bad_names.column_names = {"a"};
  CHECK_THROWS_AS(bad_names.validate(), Error);
}

TEST_CASE("standardize centers, scales and is idempotent") {
  RawMatrix raw;
  raw.values = fixtures::gaussian(25, 6, 4) * 3.0;
  raw.values.array() += 5.0;
  const auto s = standardize(raw);
  for (Index j = 0; j < s.cols(); ++j) {
    CHECK(std::abs(s.values.col(j).mean()) < 1e-12);
    CHECK(s.values.col(j).squaredNorm() / 24.0 == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK((s.values - fixtures::standardized(raw.values)).cwiseAbs().maxCoeff() < 1e-12);
  RawMatrix again;
  again.values = s.values;
  CHECK((standardize(again).values - s.values).cwiseAbs().maxCoeff() < 1e-12);
  const Matrix reapplied = apply_standardization(raw.values, s.col_means, s.col_scales);
  CHECK((reapplied - s.values).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("zero-variance columns error or are dropped") {
  RawMatrix raw;
  raw.values = fixtures::gaussian(10, 4, 5);
  raw.values.col(2).setConstant(7.0);
  raw.column_names = {"a", "b", "c", "d"};
  CHECK_THROWS_AS(standardize(raw), Error);
  const auto s = standardize(raw, ZeroVariancePolicy::drop);
  CHECK(s.cols() == 3);
  CHECK(s.dropped_columns == std::vector<Index>{2});
  CHECK(s.kept_columns == std::vector<Index>{0, 1, 3});
  CHECK(s.column_names == std::vector<std::string>{"a", "b", "d"});
}

TEST_CASE("sparsity pair validation") {
  CHECK_NOTHROW(SparsityPair{3, 2}.validate(3, 2));
  CHECK_THROWS_AS((SparsityPair{4, 2}.validate(3, 2)), Error);
  CHECK_THROWS_AS((SparsityPair{0, 1}.validate(3, 2)), Error);
}

TEST_CASE("key=value files round-trip") {
  const auto kv = KeyValueFile::parse("# comment\n[section]\n a = 1 \nb=\"two words\"\n; x\nc=3.5\n");
  CHECK(kv.require("a") == "1");
  CHECK(kv.require("b") == "two words");
  CHECK(kv.get_double("c", 0.0) == 3.5);
  CHECK(kv.get_int("missing", 9) == 9);
  CHECK_THROWS_AS(kv.require("missing"), Error);
  CHECK_THROWS_AS(kv.get_int("c", 0), Error);
  const auto again = KeyValueFile::parse(kv.format());
  CHECK(again.entries() == kv.entries());
  CHECK_THROWS_AS(parse_double("1.5x", "v"), Error);
  CHECK(parse_int("-12", "v") == -12);
}

TEST_CASE("seed derivation and permutations") {
  std::set<std::uint64_t> seeds;
  for (std::uint64_t s = 0; s < 100; ++s) seeds.insert(derive_seed(42, s));
  CHECK(seeds.size() == 100);
  CHECK(derive_seed(1, 2) == derive_seed(1, 2));
  CHECK(derive_seed(1, 2) != derive_seed(2, 1));

  Rng a(5);
  Rng b(5);
  const auto p = random_permutation(50, a);
  CHECK(p == random_permutation(50, b));
  auto sorted = p;
  std::sort(sorted.begin(), sorted.end());
  for (Index i = 0; i < 50; ++i) CHECK(sorted[static_cast<size_t>(i)] == i);

  Rng c(9);
  std::vector<int> counts(3, 0);
  for (int i = 0; i < 3000; ++i) ++counts[uniform_index(c, 3)];
  for (int n : counts) CHECK(std::abs(n - 1000) < 150);
}
