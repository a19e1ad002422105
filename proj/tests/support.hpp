#pragma once

// Random instances and small oracles shared by the unit and acceptance tests.

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "swarmseek/field.hpp"
#include "swarmseek/gradestim.hpp"
#include "swarmseek/rng.hpp"

namespace swarmseek::testing {

inline Matrix random_orthogonal(PortableRng& rng, Eigen::Index d) {
  Matrix m(d, d);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-1.0, 1.0);
  Eigen::HouseholderQR<Matrix> qr(m);
  return qr.householderQ() * Matrix::Identity(d, d);
}

/// Symmetric positive definite matrix with eigenvalues in [lo, lo * cond].
inline Matrix random_spd(PortableRng& rng, Eigen::Index d, double lo, double cond) {
  const Matrix u = random_orthogonal(rng, d);
  Vector ev(d);
  for (Eigen::Index i = 0; i < d; ++i) ev[i] = lo * std::pow(cond, rng.uniform());
  ev[0] = lo;
  if (d > 1) ev[d - 1] = lo * cond;
  return u * ev.asDiagonal() * u.transpose();
}

inline Vector random_vector(PortableRng& rng, Eigen::Index d, double scale) {
  Vector v(d);
  for (Eigen::Index i = 0; i < d; ++i) v[i] = rng.uniform(-scale, scale);
  return v;
}

/// Static quadratic with condition number <= cond and a random centre.
inline QuadraticField random_field(PortableRng& rng, Eigen::Index d, double cond = 1e3) {
  const double lo = rng.uniform(0.01, 1.0);
  Matrix q = random_spd(rng, d, lo, rng.uniform(1.0, cond));
  SourcePath path;
  for (Eigen::Index i = 0; i < d; ++i) {
    CoordinatePath cp;
    cp.offset = rng.uniform(-5.0, 5.0);
    path.coordinates.push_back(cp);
  }
  return {q, random_vector(rng, d, 3.0), rng.uniform(-2.0, 2.0), path};
}

/// m neighbour points around x_i whose directions span R^d, with distances
/// in [0.1, 2]. The first d directions are random unit vectors kept away
/// from degeneracy; further ones are arbitrary.
inline std::vector<Vector> random_neighbours(PortableRng& rng, const Vector& xi,
                                             Eigen::Index m) {
  const Eigen::Index d = xi.size();
  for (;;) {
    std::vector<Vector> out;
    Matrix V(m, d);
    for (Eigen::Index j = 0; j < m; ++j) {
      Vector dir = rng.in_ball(d, 1.0);
      while (dir.norm() < 0.2) dir = rng.in_ball(d, 1.0);
      dir.normalize();
      V.row(j) = dir.transpose();
      out.push_back(xi + rng.uniform(0.1, 2.0) * dir);
    }
    const Vector sv = singular_values(V);
    if (sv[d - 1] > 1e-3 * sv[0]) return out;
  }
}

inline LocalSamples sample_field(const QuadraticField& f, const Vector& xi,
                                 const std::vector<Vector>& neighbours) {
  LocalSamples s{{xi, f.value(0, xi)}, {}, f.lipschitz()};
  for (const auto& xj : neighbours) s.neighbours.push_back({xj, f.value(0, xj)});
  return s;
}

/// The 2^d sign vectors as +-1 entries.
inline std::vector<Vector> sign_vectors(Eigen::Index d) {
  std::vector<Vector> out;
  for (long mask = 0; mask < (1L << d); ++mask) {
    Vector s(d);
    for (Eigen::Index i = 0; i < d; ++i) s[i] = (mask >> i) & 1 ? 1.0 : -1.0;
    out.push_back(s);
  }
  return out;
}

/// Parallelotope vertices A^{-1}(s + diag(sigma) a) for m = d.
inline std::vector<Vector> parallelotope_vertices(const EdgeQuantities& eq) {
  std::vector<Vector> out;
  const Eigen::PartialPivLU<Matrix> lu(eq.V);
  for (const auto& sigma : sign_vectors(eq.dimension())) {
    out.push_back(lu.solve(eq.s + sigma.cwiseProduct(eq.a)));
  }
  return out;
}

}  // namespace swarmseek::testing
