#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "swarmseek/field.hpp"

using namespace swarmseek;
using doctest::Approx;

namespace {

// Field from the simulation section, source path applied to both coordinates.
QuadraticField reference_field(bool moving) {
  Matrix q(2, 2);
  q << 2.66, -0.36, -0.35, 1.74;
  Vector zeta(2);
  zeta << -1.28, 4.66;
  CoordinatePath cp;
  if (moving) {
    cp.terms = {{10.0, std::sqrt(2.0) / 100.0, 0.0}, {10.0, std::sqrt(3.0) / 100.0, 0.0}};
    cp.drift = 0.01;
  }
  return {q, zeta, 6.26, SourcePath{{cp}}};
}

QuadraticField scalar_field(double q, double zeta, double p, double centre) {
  CoordinatePath cp;
  cp.offset = centre;
  return {Matrix::Constant(1, 1, q), Vector::Constant(1, zeta), p, SourcePath{{cp}}};
}

Box box2(double lo, double hi) {
  return {Vector::Constant(2, lo), Vector::Constant(2, hi)};
}

}  // namespace

TEST_CASE("value at the centre is the offset p") {
  const auto f = reference_field(true);
  for (long k : {0L, 17L, 1234L}) CHECK(f.value(k, f.centre(k)) == Approx(6.26).epsilon(1e-14));

  CHECK(scalar_field(2.0, 0.0, 0.0, 0.0).value(0, Vector::Constant(1, 3.0)) == 9.0);
}

TEST_CASE("gradient uses the symmetric part") {
  const auto f = reference_field(true);
  const Vector g = f.gradient(5, f.centre(5));
  CHECK(g[0] == Approx(-1.28));
  CHECK(g[1] == Approx(4.66));
  CHECK(f.q_sym()(0, 1) == Approx(-0.355));

  const auto s = scalar_field(2.0, 1.0, 0.0, 0.0);
  CHECK(s.gradient(0, Vector::Constant(1, 1.0))[0] == 3.0);
}

TEST_CASE("gradient matches central differences") {
  PortableRng rng(11);
  const auto f = reference_field(true);
  for (int t = 0; t < 100; ++t) {
    const long k = static_cast<long>(rng.uniform(0, 3000));
    const Vector x = testing::random_vector(rng, 2, 40.0);
    const Vector g = f.gradient(k, x);
    for (int i = 0; i < 2; ++i) {
      const double h = 1e-5 * std::max(1.0, std::abs(x[i]));
      Vector xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      const double fd = (f.value(k, xp) - f.value(k, xm)) / (2 * h);
      CHECK(std::abs(fd - g[i]) <= 1e-6 * std::max(1.0, g.norm()));
    }
  }
}

TEST_CASE("constants of the reference field") {
  // Eigenvalues of (Q + Q^T)/2 from an independent symmetric eigensolver.
  const auto f = reference_field(true);
  CHECK(f.pl_constant() == Approx(1.618944925157692).epsilon(1e-13));
  CHECK(f.lipschitz() == Approx(2.781055074842308).epsilon(1e-13));

  const Vector m = f.minimizer(0);
  CHECK(m[0] == Approx(0.12724395457952747).epsilon(1e-12));
  CHECK(m[1] == Approx(-2.6522002276576253).epsilon(1e-12));
  CHECK(f.optimal_value(0) == Approx(-0.0010626613731652412).epsilon(1e-9));
  CHECK(f.gradient(0, m).norm() < 1e-12);
}

TEST_CASE("minimizer of scalar fields") {
  CHECK(scalar_field(2.0, 4.0, 0.0, 5.0).minimizer(0)[0] == Approx(3.0));
  const auto f = scalar_field(3.0, 0.0, 1.0, -2.0);
  CHECK(f.minimizer(9)[0] == Approx(-2.0));
  CHECK(f.optimal_value(9) == Approx(1.0));
}

TEST_CASE("source path") {
  const auto f = reference_field(true);
  const Vector c1 = f.centre(1);
  CHECK(c1[0] == Approx(0.3246130628719946).epsilon(1e-14));
  CHECK(c1[1] == c1[0]);
  CHECK(f.centre(0).norm() == 0.0);
  CHECK(f.centre(77) == f.centre(77));
  CHECK_FALSE(f.path().is_static());
  CHECK(reference_field(false).path().is_static());

  CoordinatePath a, b;
  a.offset = 1.0;
  b.drift = 2.0;
  const SourcePath per_axis{{a, b}};
  const Vector c = per_axis.at(3, 2);
  CHECK(c[0] == 1.0);
  CHECK(c[1] == 6.0);
  CHECK_THROWS_AS(per_axis.at(3, 3), DimensionError);
}

TEST_CASE("rejects indefinite Q and wrong dimensions") {
  Matrix q(2, 2);
  q << 1.0, 0.0, 0.0, -1.0;
  CHECK_THROWS_AS(QuadraticField(q, Vector::Zero(2), 0.0, SourcePath{{CoordinatePath{}}}),
                  PreconditionError);
  // Skew part does not matter: Qs = I here.
  q << 1.0, 5.0, -5.0, 1.0;
  CHECK_NOTHROW(QuadraticField(q, Vector::Zero(2), 0.0, SourcePath{{CoordinatePath{}}}));

  const auto f = reference_field(false);
  CHECK_THROWS_AS(f.value(0, Vector::Zero(3)), DimensionError);
  CHECK_THROWS_AS(f.gradient(0, Vector::Zero(1)), DimensionError);
}

TEST_CASE("PL, descent lemma and squeeze hold on random points") {
  PortableRng rng(5);
  const auto f = reference_field(true);
  const double L = f.lipschitz(), mu = f.pl_constant();
  for (int t = 0; t < 1000; ++t) {
    const long k = static_cast<long>(rng.uniform(0, 3000));
    const Vector x = testing::random_vector(rng, 2, 50.0);
    const Vector y = testing::random_vector(rng, 2, 50.0);
    const double gap = f.value(k, x) - f.optimal_value(k);
    const Vector g = f.gradient(k, x);
    const double tol = 1e-9 * std::max(1.0, gap);
    CHECK(0.5 * g.squaredNorm() >= mu * gap - tol);
    CHECK(f.value(k, y) <= f.value(k, x) + g.dot(y - x) + 0.5 * L * (y - x).squaredNorm() +
                               1e-9 * std::max(1.0, std::abs(f.value(k, y))));
    const double dist_sq = (x - f.minimizer(k)).squaredNorm();
    CHECK(0.5 * mu * dist_sq <= gap + tol);
    CHECK(gap <= 0.5 * L * dist_sq + tol);
  }
}

TEST_CASE("drift constants") {
  SUBCASE("static path has no drift") {
    const auto c = field_constants(reference_field(false), box2(-50, 50), 100);
    CHECK(c.value_drift == 0.0);
    CHECK(c.optimal_drift == 0.0);
  }
  SUBCASE("translation keeps the optimal value") {
    const auto c = field_constants(reference_field(true), box2(-60, 80), 3000);
    CHECK(c.optimal_drift < 1e-12);
    CHECK(c.value_drift > 0.0);
  }
  SUBCASE("value drift is attained at a box corner") {
    // Brute force over a grid of the box, which includes the corners.
    const auto f = reference_field(true);
    const Box box = box2(-10, 30);
    const auto c = field_constants(f, box, 50);
    double grid = 0.0;
    for (long k = 0; k < 50; ++k) {
      for (int i = 0; i <= 20; ++i) {
        for (int j = 0; j <= 20; ++j) {
          Vector x(2);
          x << -10 + 2.0 * i, -10 + 2.0 * j;
          grid = std::max(grid, std::abs(f.value(k + 1, x) - f.value(k, x)));
        }
      }
    }
    CHECK(c.value_drift == Approx(grid).epsilon(1e-12));
  }
  SUBCASE("bad horizon or box") {
    CHECK_THROWS_AS(field_constants(reference_field(true), box2(-1, 1), 0), PreconditionError);
    CHECK_THROWS_AS(field_constants(reference_field(true), box2(1, -1), 10), PreconditionError);
  }
}
