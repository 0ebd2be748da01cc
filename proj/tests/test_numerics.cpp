// Deterministic RNG, matrix containers, and the reverse-mode tape.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "oracles.hpp"
#include "voltwatch/matrix.hpp"
#include "voltwatch/rng.hpp"
#include "voltwatch/tape.hpp"

using namespace voltwatch::numerics;
using voltwatch::rng::Rng;
using voltwatch::rng::substream;

TEST_CASE("rng streams are deterministic and seed-separated") {
  Rng a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) {
    const double x = a.uniform();
    CHECK(x == b.uniform());
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
  }
  // Different seed, different stream.
  Rng a2(42);
  bool any_diff = false;
  for (int i = 0; i < 10; ++i) any_diff |= a2.uniform() != c.uniform();
  CHECK(any_diff);
}

TEST_CASE("rng substreams depend on every component") {
  const auto s1 = substream(42, "init");
  const auto s2 = substream(42, "shuffle");
  const auto s3 = substream(42, "shuffle", 1);
  const auto s4 = substream(42, "shuffle", 2);
  const auto s5 = substream(43, "shuffle", 1);
  std::set<std::uint64_t> all{s1, s2, s3, s4, s5};
  CHECK(all.size() == 5);
  CHECK(substream(42, "shuffle", 1) == s3);  // stable
}

TEST_CASE("rng uniform range and normal moments") {
  Rng r(substream(1, "moments"));
  double sum = 0.0, sum2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = r.normal();
    sum += x;
    sum2 += x * x;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  CHECK(std::abs(mean) < 0.02);
  CHECK(std::abs(var - 1.0) < 0.03);

  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform(-2.0, 3.0);
    CHECK(u >= -2.0);
    CHECK(u < 3.0);
    CHECK(r.below(7) < 7);
  }
}

TEST_CASE("rng shuffle is a seeded permutation") {
  std::vector<int> v{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::vector<int> w = v;
  Rng r1(substream(9, "perm")), r2(substream(9, "perm"));
  r1.shuffle(v.begin(), v.end());
  r2.shuffle(w.begin(), w.end());
  CHECK(v == w);
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
}

TEST_CASE("matrix shape checks and accessors") {
  Matrix m(2, 3, {1, 2, 3, 4, 5, 6});
  CHECK(m(0, 0) == 1);
  CHECK(m(1, 2) == 6);
  CHECK(m.row_as_column(1).values() == std::vector<double>{4, 5, 6});
  CHECK_THROWS_AS(Matrix(2, 2, {1.0, 2.0, 3.0}), DimensionError);
  CHECK_THROWS_AS(m.row_as_column(2), DimensionError);

  Matrix bad(1, 2, {1.0, std::numeric_limits<double>::infinity()});
  CHECK(!bad.all_finite());
  CHECK_THROWS_WITH_AS(bad.require_finite("unit test"),
                       "non-finite value produced by unit test", NumericError);
}

TEST_CASE("parameter store is lexicographic and guards duplicates") {
  ParameterStore p;
  p.create("b", Matrix(1, 1, {2.0}));
  p.create("a", Matrix(2, 1, {1.0, 3.0}));
  p.create("c", Matrix(1, 2, {4.0, 5.0}));
  CHECK(p.names() == std::vector<std::string>{"a", "b", "c"});
  CHECK(p.count() == 3);
  CHECK(p.scalar_count() == 5);
  CHECK_THROWS_AS(p.create("a", Matrix(1, 1)), DimensionError);
  CHECK_THROWS_AS(p.get("missing"), DimensionError);

  auto g = GradientStore::zeros_like(p);
  CHECK(g.count() == 3);
  g.at("a")[0] = 3.0;
  g.at("a")[1] = 4.0;
  CHECK(g.global_norm() == doctest::Approx(5.0));
  g.scale_all(2.0);
  CHECK(g.at("a")[1] == 8.0);
  g.reset();
  CHECK(g.global_norm() == 0.0);
}

TEST_CASE("tape forward values match hand computation") {
  ParameterStore p;
  p.create("w", Matrix(2, 2, {1.0, 2.0, 3.0, 4.0}));
  p.create("b", Matrix::column({0.5, -0.5}));
  Tape t(&p);
  const auto x = t.constant(Matrix::column({1.0, -1.0}));
  const auto y = t.affine(t.param("w"), x, t.param("b"));
  CHECK(t.value(y).values() == std::vector<double>{-0.5, -1.5});

  const auto s = t.activation(y, Activation::kSigmoid);
  CHECK(t.value(s)[0] == doctest::Approx(1.0 / (1.0 + std::exp(0.5))));

  const auto h = t.hadamard(s, s);
  const auto sum2 = t.sq_err(h, Matrix::column({0.0, 0.0}));
  const double v0 = t.value(h)[0], v1 = t.value(h)[1];
  CHECK(t.scalar(sum2) == doctest::Approx(v0 * v0 + v1 * v1));

  const auto cat = t.concat(x, h);
  CHECK(t.value(cat).rows() == 4);
  CHECK(t.value(cat)[0] == 1.0);
  CHECK(t.value(cat)[2] == v0);

  const auto sc = t.scale(sum2, 0.25);
  CHECK(t.scalar(sc) == doctest::Approx(0.25 * t.scalar(sum2)));
  const auto total = t.sum({sum2, sc});
  CHECK(t.scalar(total) == doctest::Approx(1.25 * t.scalar(sum2)));
}

TEST_CASE("tape gradients match finite differences for every op") {
  Rng r(substream(3, "tape-fd"));
  ParameterStore p;
  p.create("w1", oracle::random_matrix(r, 3, 4));
  p.create("b1", oracle::random_matrix(r, 3, 1));
  p.create("w2", oracle::random_matrix(r, 3, 3));
  p.create("gate", oracle::random_matrix(r, 6, 6, -0.5, 0.5));
  p.create("gb", oracle::random_matrix(r, 6, 1, -0.5, 0.5));
  const Matrix x0 = oracle::random_matrix(r, 4, 1);
  const Matrix target = oracle::random_matrix(r, 6, 1);

  // One graph touching every differentiable op: affine, matvec, all three
  // activations, hadamard, add, concat, sq_err, scale, sum.
  auto build = [&](Tape& t) {
    const auto x = t.constant(x0);
    const auto a = t.affine(t.param("w1"), x, t.param("b1"));
    const auto sg = t.activation(a, Activation::kSigmoid);
    const auto th = t.activation(a, Activation::kTanh);
    const auto rl = t.activation(t.matvec(t.param("w2"), a), Activation::kRelu);
    const auto had = t.hadamard(sg, th);
    const auto mix = t.add(had, rl);
    const auto cat = t.concat(mix, th);
    const auto gated =
        t.hadamard(cat, t.activation(t.affine(t.param("gate"), cat,
                                              t.param("gb")),
                                     Activation::kSigmoid));
    const auto e1 = t.sq_err(gated, target);
    const auto e2 = t.sq_err(mix, Matrix(3, 1));
    return t.scale(t.sum({e1, e2}), 1.0 / 7.0);
  };

  const auto got = gradient_of(p, build);
  const auto want = oracle::fd_gradient(
      p, [&](const ParameterStore& q) { return loss_value(q, build); }, 1e-6);
  CHECK(oracle::max_rel_gap(got.gradients, want) < 1e-6);

  // Untouched parameters keep zero gradients.
  ParameterStore p2 = p;
  p2.create("unused", Matrix(2, 2, {1, 2, 3, 4}));
  const auto got2 = gradient_of(p2, build);
  CHECK(got2.gradients.at("unused").values() ==
        std::vector<double>{0, 0, 0, 0});
}

TEST_CASE("tape error paths") {
  ParameterStore p;
  p.create("w", Matrix(2, 2, {1, 2, 3, 4}));
  Tape t(&p);
  const auto x = t.constant(Matrix::column({1.0, 2.0}));
  const auto y = t.matvec(t.param("w"), x);
  CHECK_THROWS_AS(t.gradients(y), GraphError);  // non-scalar source

  Tape unbound;
  CHECK_THROWS_AS(unbound.param("w"), GraphError);

  // Shape mismatches surface as DimensionError at build time.
  const auto bad = Matrix::column({1.0, 2.0, 3.0});
  Tape t2(&p);
  const auto xb = t2.constant(bad);
  CHECK_THROWS_AS(t2.matvec(t2.param("w"), xb), DimensionError);
  const auto wide = t2.constant(Matrix(2, 3));
  CHECK_THROWS_AS(t2.concat(xb, wide), DimensionError);

  // Non-finite forward values are rejected at the producing node.
  Tape t3(&p);
  const auto big = t3.constant(Matrix::column({1e308, 1e308}));
  CHECK_THROWS_AS(t3.hadamard(big, big), NumericError);
}

TEST_CASE("forward helpers agree with oracles") {
  Rng r(substream(5, "helpers"));
  for (int rep = 0; rep < 20; ++rep) {
    const auto w = oracle::random_matrix(r, 5, 3);
    const auto x = oracle::random_matrix(r, 3, 1);
    const auto b = oracle::random_matrix(r, 5, 1);
    CHECK(oracle::max_abs_gap(affine(w, x, b), oracle::affine(w, x, b)) <
          1e-14);
    CHECK(oracle::max_abs_gap(matvec(w, x), oracle::matvec(w, x)) < 1e-14);
  }
  const auto v = Matrix::column({-0.9, 0.0, 2.5});
  const auto s = activate(v, Activation::kSigmoid);
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(s[i] == doctest::Approx(oracle::sigmoid(v[i])).epsilon(1e-14));
}
