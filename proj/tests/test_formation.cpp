#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "swarmseek/formation.hpp"

using namespace swarmseek;
using doctest::Approx;

namespace {

Vector v1(double a) { return Vector::Constant(1, a); }

// Two agents on a line, agent 1 one unit to the right of agent 0.
Formation pair_formation() {
  return Formation(2, 1, {{0, 1, v1(-1.0)}, {1, 0, v1(1.0)}});
}

Positions line(double a, double b) {
  Positions x(2, 1);
  x << a, b;
  return x;
}

Vector fd_gradient(const Formation& f, const Positions& x, double L_f) {
  Vector g(x.size());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      Positions xp = x, xm = x;
      const double h = 1e-5;
      xp(r, c) += h;
      xm(r, c) -= h;
      g[r * x.cols() + c] = (potential(f, xp, L_f, 0.0) - potential(f, xm, L_f, 0.0)) / (2 * h);
    }
  }
  return g;
}

}  // namespace

TEST_CASE("potential of the two-agent line") {
  const auto f = pair_formation();
  CHECK(potential(f, line(0, 1), 1.0, 0.0) == 0.0);
  CHECK(potential(f, line(0, 2), 1.0, 0.0) == Approx(2.0));
  CHECK(potential(f, line(5, 6), 1.0, 0.7) == Approx(0.7));
  CHECK(gradient_component(f, line(0, 2), 0, 1.0)[0] == Approx(-4.0));
  CHECK(gradient_component(f, line(0, 2), 1, 1.0)[0] == Approx(4.0));
}

TEST_CASE("two-agent constants") {
  // Hessian 2 L_f [[2,-2],[-2,2]]: nonzero eigenvalue 8 L_f. This pairs with
  // the potential value 2 and gradient -4 L_f above.
  const auto c = lipschitz_pl_constants(pair_formation(), 1.0);
  CHECK(c.lipschitz == Approx(8.0));
  CHECK(c.pl == Approx(8.0));
  const Matrix H = potential_hessian(pair_formation(), 1.0);
  CHECK(H(0, 0) == Approx(4.0));
  CHECK(H(0, 1) == Approx(-4.0));
}

TEST_CASE("hexagon and rectangle presets") {
  const auto hex = make_hexagon(3.0);
  const auto rect = make_rectangle(3.0);
  CHECK(hex.agents() == 6);
  CHECK(rect.agents() == 6);
  for (int i = 0; i < 6; ++i) CHECK(hex.neighbours(i).size() == 2);
  // Corners 0, 2, 3, 5 have two grid neighbours; the middle column has three.
  const int expected[] = {2, 3, 2, 2, 3, 2};
  for (int i = 0; i < 6; ++i) CHECK(rect.neighbours(i).size() == expected[i]);

  for (const auto* f : {&hex, &rect}) {
    for (const auto& e : f->edges()) {
      bool found = false;
      for (const auto& back : f->edges()) {
        if (back.to == e.from && back.from == e.to) {
          found = true;
          CHECK((back.displacement + e.displacement).norm() == 0.0);
        }
      }
      CHECK(found);
    }
    CHECK(f->ideal_positions().colwise().sum().norm() < 1e-12);
  }
  // Neighbouring hexagon vertices are one side length apart.
  const Positions& p = hex.ideal_positions();
  CHECK((p.row(0) - p.row(1)).norm() == Approx(3.0));
  CHECK(p.row(0).norm() == Approx(3.0));
}

TEST_CASE("Hessian spectra of the presets") {
  // Eigenvalues of 2 M / L_f from an independent eigensolver:
  // hexagon {0,4,4,12,12,16}, rectangle {0,4,8,12,12,20} (each doubled in 2-D).
  const double L_f = 2.781055074842308;
  const auto hex = lipschitz_pl_constants(make_hexagon(3.0), L_f);
  CHECK(hex.lipschitz == Approx(16 * L_f).epsilon(1e-12));
  CHECK(hex.pl == Approx(4 * L_f).epsilon(1e-12));
  const auto rect = lipschitz_pl_constants(make_rectangle(3.0), L_f);
  CHECK(rect.lipschitz == Approx(20 * L_f).epsilon(1e-12));
  CHECK(rect.pl == Approx(4 * L_f).epsilon(1e-12));

  Eigen::SelfAdjointEigenSolver<Matrix> eig(potential_hessian(make_hexagon(1.0), 1.0));
  const double want[] = {0, 0, 4, 4, 4, 4, 12, 12, 12, 12, 16, 16};
  for (int i = 0; i < 12; ++i) CHECK(eig.eigenvalues()[i] == Approx(want[i]).epsilon(1e-12));

  const auto scaled = lipschitz_pl_constants(make_hexagon(3.0), 3 * L_f);
  CHECK(scaled.lipschitz == Approx(3 * hex.lipschitz));
  CHECK(scaled.pl == Approx(3 * hex.pl));
}

TEST_CASE("gradient matches finite differences and the Hessian") {
  PortableRng rng(3);
  for (const auto& f : {make_hexagon(2.0), make_rectangle(1.5)}) {
    const Matrix H = potential_hessian(f, 1.7);
    for (int t = 0; t < 20; ++t) {
      Positions x = f.ideal_positions();
      for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] += rng.uniform(-2, 2);
      const Vector g = potential_gradient(f, x, 1.7);
      const Vector fd = fd_gradient(f, x, 1.7);
      CHECK((g - fd).norm() <= 1e-6 * std::max(1.0, g.norm()));
      // phi is quadratic with minimum at the ideal positions.
      CHECK((g - H * (stacked(x) - stacked(f.ideal_positions()))).norm() < 1e-9);
    }
  }
}

TEST_CASE("translation invariance and PL on the quotient") {
  PortableRng rng(8);
  const auto f = make_rectangle(2.0);
  const double L_f = 1.3;
  const auto c = lipschitz_pl_constants(f, L_f);
  for (int t = 0; t < 200; ++t) {
    Positions x = f.ideal_positions();
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] += rng.uniform(-3, 3);
    Positions shifted = x;
    shifted.rowwise() += testing::random_vector(rng, 2, 50).transpose();
    const double phi = potential(f, x, L_f, 0.5);
    CHECK(potential(f, shifted, L_f, 0.5) == Approx(phi).epsilon(1e-9));
    CHECK(0.5 * potential_gradient(f, x, L_f).squaredNorm() >= c.pl * (phi - 0.5) - 1e-9);
  }
}

TEST_CASE("in formation the gradient vanishes") {
  const auto f = make_hexagon(3.0);
  Positions x = f.ideal_positions();
  x.rowwise() += Eigen::RowVector2d(4, -7);
  CHECK(potential_gradient(f, x, 2.0).norm() < 1e-12);
}

TEST_CASE("gradient component reads only neighbours") {
  const auto f = make_rectangle(1.0);
  const Positions x = f.ideal_positions();
  for (int i = 0; i < 6; ++i) {
    std::vector<int> touched;
    gradient_component_at(f, i, 1.0, [&](int j) -> Vector {
      touched.push_back(j);
      return x.row(j).transpose();
    });
    for (int j : touched) {
      bool allowed = j == i;
      for (const auto& link : f.neighbours(i)) allowed = allowed || link.agent == j;
      CHECK(allowed);
    }
  }
}

TEST_CASE("formation validation") {
  SUBCASE("asymmetric edges") {
    CHECK_THROWS_AS(Formation(2, 1, {{0, 1, v1(-1.0)}}), PreconditionError);
  }
  SUBCASE("non-antisymmetric displacement") {
    CHECK_THROWS_AS(Formation(2, 1, {{0, 1, v1(-1.0)}, {1, 0, v1(2.0)}}), PreconditionError);
  }
  SUBCASE("disconnected graph") {
    CHECK_THROWS_AS(Formation(4, 1, {{0, 1, v1(-1)}, {1, 0, v1(1)}, {2, 3, v1(-1)}, {3, 2, v1(1)}}),
                    PreconditionError);
  }
  SUBCASE("unrealisable triangle") {
    // 0->1 and 1->2 each one unit, but 0->2 claims three units.
    CHECK_THROWS_AS(Formation(3, 1,
                              {{0, 1, v1(-1)}, {1, 0, v1(1)}, {1, 2, v1(-1)}, {2, 1, v1(1)},
                               {0, 2, v1(-3)}, {2, 0, v1(3)}}),
                    PreconditionError);
  }
  SUBCASE("self loop and range") {
    CHECK_THROWS_AS(Formation(2, 1, {{0, 0, v1(0)}}), PreconditionError);
    CHECK_THROWS_AS(Formation(2, 1, {{0, 5, v1(0)}, {5, 0, v1(0)}}), PreconditionError);
  }
  SUBCASE("scale") {
    CHECK_THROWS_AS(make_hexagon(0.0), PreconditionError);
    CHECK_THROWS_AS(make_rectangle(-1.0), PreconditionError);
  }
}

TEST_CASE("phi* from the estimation error bound") {
  SUBCASE("two orthogonal unit neighbours") {
    // a = (1, 1) for L_f = 2, sigma_min = 1, so B = sqrt 2 and (c/2) n B^2 = 1.
    Vector xi = Vector::Zero(2);
    const double B = geometric_error_bound(xi, {Vector::Unit(2, 0), Vector::Unit(2, 1)}, 2.0);
    CHECK(B == Approx(std::sqrt(2.0)));
    CHECK(0.5 * 1.0 * 1 * B * B == Approx(1.0));
  }
  SUBCASE("reference formations") {
    const double L_f = 2.781055074842308;
    const double c = 2.0 / 1.618944925157692;
    CHECK(phi_star_from_error_bound(make_hexagon(3.0), L_f, c) ==
          Approx(257.9769263873209).epsilon(1e-12));
    CHECK(phi_star_from_error_bound(make_rectangle(3.0), L_f, c) ==
          Approx(193.48269479049057).epsilon(1e-12));
  }
  SUBCASE("scaling the formation by t scales phi* by t^2") {
    const double a = phi_star_from_error_bound(make_rectangle(1.0), 2.0, 3.0);
    CHECK(phi_star_from_error_bound(make_rectangle(2.5), 2.0, 3.0) == Approx(6.25 * a));
  }
  SUBCASE("collinear ideal neighbours") {
    const Vector e = Vector::Unit(2, 0);
    const Formation f(3, 2, {{0, 1, -e}, {1, 0, e}, {1, 2, -e}, {2, 1, e}});
    CHECK_THROWS_AS(phi_star_from_error_bound(f, 1.0, 1.0), RankDeficientError);
  }
}

TEST_CASE("formation spec checks") {
  const double L_f = 2.781055074842308, mu_f = 1.618944925157692;
  const auto spec = make_formation_spec(make_hexagon(3.0), L_f, mu_f);
  CHECK(spec.c_const == Approx(2.0 / mu_f));
  CHECK(spec.lipschitz == Approx(16 * L_f));
  CHECK_THROWS_AS(make_formation_spec(make_hexagon(3.0), L_f, mu_f, 0.5 / mu_f),
                  PreconditionError);
  // mu_phi = 4 L_f must not fall below mu_f.
  CHECK_THROWS_AS(make_formation_spec(make_hexagon(3.0), 0.1, 1.0), PreconditionError);
}
