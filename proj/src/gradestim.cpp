#include "swarmseek/gradestim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace swarmseek {

EdgeQuantities edge_quantities(const LocalSamples& samples) {
  const Eigen::Index d = samples.self.x.size();
  const auto m = static_cast<Eigen::Index>(samples.neighbours.size());
  if (m == 0) throw PreconditionError("agent has no neighbours");
  if (!(samples.lipschitz > 0.0)) {
    throw PreconditionError("gradient Lipschitz constant must be positive");
  }

  EdgeQuantities eq{Vector(m), Matrix(m, d), Vector(m)};
  for (Eigen::Index j = 0; j < m; ++j) {
    const auto& nb = samples.neighbours[static_cast<std::size_t>(j)];
    require_dimension(nb.x.size(), d, "neighbour sample");
    const Vector diff = nb.x - samples.self.x;
    const double dist = diff.norm();
    if (!(dist > 0.0)) {
      throw PreconditionError("neighbour " + std::to_string(j) +
                              " coincides with the sampling agent");
    }
    eq.s[j] = (nb.value - samples.self.value) / dist;
    eq.V.row(j) = diff.transpose() / dist;
    eq.a[j] = 0.5 * samples.lipschitz * dist;
  }
  return eq;
}

Vector singular_values(const Matrix& V) {
  return Eigen::JacobiSVD<Matrix>(V).singularValues();
}

int numerical_rank(const Matrix& V) {
  const Vector sv = singular_values(V);
  if (sv.size() == 0 || sv[0] == 0.0) return 0;
  return static_cast<int>((sv.array() > kRankTolerance * sv[0]).count());
}

Vector simplex_gradient(const EdgeQuantities& eq) {
  Eigen::JacobiSVD<Matrix> svd(eq.V, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(kRankTolerance);
  return svd.solve(eq.s);
}

Vector GradientPolytope::centres() const {
  const Eigen::Index m = rows();
  return 0.5 * (b.head(m) - b.tail(m));
}

Vector GradientPolytope::half_widths() const {
  const Eigen::Index m = rows();
  return 0.5 * (b.head(m) + b.tail(m));
}

bool GradientPolytope::is_bounded() const {
  return numerical_rank(A) == dimension();
}

double GradientPolytope::max_violation(const Vector& x) const {
  require_dimension(x.size(), dimension(), "polytope point");
  const Eigen::Index m = rows();
  const Vector ax = A * x;
  const double upper = (ax - b.head(m)).maxCoeff();
  const double lower = (-ax - b.tail(m)).maxCoeff();
  return std::max(upper, lower);
}

bool GradientPolytope::contains(const Vector& x, double tol) const {
  const double scale = 1.0 + b.cwiseAbs().maxCoeff();
  return max_violation(x) <= tol * scale;
}

GradientPolytope gradient_polytope(const EdgeQuantities& eq) {
  const Eigen::Index m = eq.neighbours();
  GradientPolytope poly{eq.V, Vector(2 * m)};
  poly.b.head(m) = eq.s + eq.a;
  poly.b.tail(m) = eq.a - eq.s;
  return poly;
}

double Ellipsoid::form(const Vector& x) const {
  require_dimension(x.size(), centre.size(), "ellipsoid point");
  return (shape * (x - centre)).squaredNorm();
}

bool Ellipsoid::contains(const Vector& x, double tol) const {
  return form(x) <= 1.0 + tol;
}

double Ellipsoid::max_radius() const {
  const Vector sv = singular_values(shape);
  return 1.0 / sv[sv.size() - 1];
}

double Ellipsoid::relative_volume() const {
  return 1.0 / std::sqrt((shape.transpose() * shape).determinant());
}

namespace {

Vector scaled_residuals(const EdgeQuantities& eq, const Vector& g) {
  require_dimension(g.size(), eq.dimension(), "ellipse centre");
  return (eq.s - eq.V * g).cwiseAbs() + eq.a;
}

void require_full_rank(const EdgeQuantities& eq, const char* what) {
  if (numerical_rank(eq.V) < eq.dimension()) {
    throw RankDeficientError(std::string(what) +
                             ": neighbour directions do not span the space");
  }
}

}  // namespace

double ellipse_scale(const EdgeQuantities& eq, const Vector& g) {
  return scaled_residuals(eq, g).norm();
}

Ellipsoid uniform_scaling_ellipse(const EdgeQuantities& eq, const Vector& g) {
  require_full_rank(eq, "uniform scaling ellipse");
  return {eq.V / ellipse_scale(eq, g), g};
}

Ellipsoid row_scaling_ellipse(const EdgeQuantities& eq, const Vector& g) {
  require_full_rank(eq, "row scaling ellipse");
  const Vector widths = scaled_residuals(eq, g);
  const double root_m = std::sqrt(static_cast<double>(eq.neighbours()));
  Matrix B = eq.V;
  for (Eigen::Index j = 0; j < B.rows(); ++j) B.row(j) /= root_m * widths[j];
  return {std::move(B), g};
}

double error_bound(const EdgeQuantities& eq, const Vector& g) {
  require_full_rank(eq, "gradient error bound");
  const Vector sv = singular_values(eq.V);
  return ellipse_scale(eq, g) / sv[sv.size() - 1];
}

double geometric_error_bound(const EdgeQuantities& eq) {
  require_full_rank(eq, "geometric error bound");
  const Vector sv = singular_values(eq.V);
  return eq.a.norm() / sv[sv.size() - 1];
}

double geometric_error_bound(const Vector& x_i,
                             const std::vector<Vector>& neighbours,
                             double lipschitz) {
  LocalSamples samples{{x_i, 0.0}, {}, lipschitz};
  for (const auto& x : neighbours) samples.neighbours.push_back({x, 0.0});
  return geometric_error_bound(edge_quantities(samples));
}

GradientEstimate estimate_gradient(const EdgeQuantities& eq) {
  GradientEstimate est;
  est.g = simplex_gradient(eq);
  est.m_scale = ellipse_scale(eq, est.g);
  est.rank = numerical_rank(eq.V);
  if (est.rank == eq.dimension()) {
    est.uniform_ellipse = uniform_scaling_ellipse(eq, est.g);
    est.row_ellipse = row_scaling_ellipse(eq, est.g);
    est.error_bound = error_bound(eq, est.g);
  }
  return est;
}

GradientEstimate estimate_gradient(const LocalSamples& samples) {
  return estimate_gradient(edge_quantities(samples));
}

Ball smallest_ball_oracle(const GradientPolytope& poly) {
  const Eigen::Index d = poly.dimension();
  if (poly.rows() != d) {
    throw PreconditionError("smallest ball oracle needs exactly d constraint pairs");
  }
  if (d > 16) throw PreconditionError("smallest ball oracle limited to d <= 16");
  Eigen::FullPivLU<Matrix> lu(poly.A);
  if (!lu.isInvertible()) {
    throw RankDeficientError("parallelotope is unbounded");
  }
  const Vector a = poly.half_widths();
  Ball ball{lu.solve(poly.centres()), 0.0};
  const Matrix inv = lu.inverse();
  Vector signed_a(d);
  for (long mask = 0; mask < (1L << d); ++mask) {
    for (Eigen::Index i = 0; i < d; ++i) signed_a[i] = (mask >> i) & 1 ? -a[i] : a[i];
    ball.radius = std::max(ball.radius, (inv * signed_a).norm());
  }
  return ball;
}

std::vector<Vector> polytope_vertices(const GradientPolytope& poly) {
  const Eigen::Index d = poly.dimension();
  const Eigen::Index rows = 2 * poly.rows();
  Matrix normals(rows, d);
  normals << poly.A, -poly.A;

  const double scale = 1.0 + poly.b.cwiseAbs().maxCoeff();
  std::vector<Vector> vertices;
  std::vector<Eigen::Index> pick(static_cast<std::size_t>(d));
  for (Eigen::Index i = 0; i < d; ++i) pick[static_cast<std::size_t>(i)] = i;

  Matrix sub(d, d);
  Vector rhs(d);
  while (true) {
    for (Eigen::Index r = 0; r < d; ++r) {
      sub.row(r) = normals.row(pick[static_cast<std::size_t>(r)]);
      rhs[r] = poly.b[pick[static_cast<std::size_t>(r)]];
    }
    Eigen::FullPivLU<Matrix> lu(sub);
    if (lu.isInvertible()) {
      const Vector x = lu.solve(rhs);
      if ((normals * x - poly.b).maxCoeff() <= 1e-9 * scale) {
        const bool seen = std::any_of(vertices.begin(), vertices.end(),
                                      [&](const Vector& v) {
                                        return (v - x).norm() <= 1e-9 * scale;
                                      });
        if (!seen) vertices.push_back(x);
      }
    }
    // next d-combination of [0, rows)
    Eigen::Index pos = d - 1;
    while (pos >= 0 && pick[static_cast<std::size_t>(pos)] == rows - d + pos) --pos;
    if (pos < 0) break;
    ++pick[static_cast<std::size_t>(pos)];
    for (Eigen::Index r = pos + 1; r < d; ++r) {
      pick[static_cast<std::size_t>(r)] = pick[static_cast<std::size_t>(r - 1)] + 1;
    }
  }
  return vertices;
}

Vector maximize_linear(const std::vector<Vector>& vertices, const Vector& c) {
  if (vertices.empty()) throw PreconditionError("empty vertex list");
  return *std::max_element(vertices.begin(), vertices.end(),
                           [&](const Vector& u, const Vector& v) {
                             return c.dot(u) < c.dot(v);
                           });
}

}  // namespace swarmseek
