#pragma once

#include <optional>
#include <vector>

#include "swarmseek/types.hpp"

namespace swarmseek {

/// Singular values below this fraction of the largest are treated as zero.
inline constexpr double kRankTolerance = 1e-12;
/// Default containment slack for geometric membership tests.
inline constexpr double kContainmentTolerance = 1e-9;

struct Sample {
  Vector x;
  double value = 0.0;
};

/// Everything agent i knows at one iteration: its own sample, its
/// neighbours' samples, and the field's gradient Lipschitz constant.
struct LocalSamples {
  Sample self;
  std::vector<Sample> neighbours;
  double lipschitz = 0.0;
};

/// Per-neighbour difference quotient s, unit direction (row of V) and
/// worst-case directional error a = (L_f/2) * distance.
struct EdgeQuantities {
  Vector s;
  Matrix V;  // m x d
  Vector a;

  Eigen::Index neighbours() const { return V.rows(); }
  Eigen::Index dimension() const { return V.cols(); }
};

EdgeQuantities edge_quantities(const LocalSamples& samples);

/// Singular values of V, descending.
Vector singular_values(const Matrix& V);
int numerical_rank(const Matrix& V);

/// Minimum-norm least-squares solution of V g = s (the simplex gradient).
Vector simplex_gradient(const EdgeQuantities& eq);

/// {x : [V; -V] x <= b}, b = [s + a; a - s].
struct GradientPolytope {
  Matrix A;
  Vector b;

  Eigen::Index rows() const { return A.rows(); }
  Eigen::Index dimension() const { return A.cols(); }
  /// s and a recovered from b.
  Vector centres() const;
  Vector half_widths() const;
  bool is_bounded() const;
  /// Largest constraint violation (<= 0 inside).
  double max_violation(const Vector& x) const;
  bool contains(const Vector& x, double tol = kContainmentTolerance) const;
};

GradientPolytope gradient_polytope(const EdgeQuantities& eq);

/// {x : ||shape (x - centre)||^2 <= 1}
struct Ellipsoid {
  Matrix shape;
  Vector centre;

  double form(const Vector& x) const;
  bool contains(const Vector& x, double tol = kContainmentTolerance) const;
  /// Longest semi-axis, 1 / sigma_min(shape).
  double max_radius() const;
  /// Volume divided by the unit-ball volume, 1 / sqrt(det(shape^T shape)).
  double relative_volume() const;
};

/// m = sqrt(sum_j (|s_j - g^T v_j| + a_j)^2).
double ellipse_scale(const EdgeQuantities& eq, const Vector& g);

/// {x : ||V (x - g) / m||^2 <= 1}. Throws RankDeficientError if V is not
/// full column rank.
Ellipsoid uniform_scaling_ellipse(const EdgeQuantities& eq, const Vector& g);

/// Rows v_j^T / (sqrt(m) (|s_j - g^T v_j| + a_j)). Throws RankDeficientError
/// if V is not full column rank.
Ellipsoid row_scaling_ellipse(const EdgeQuantities& eq, const Vector& g);

/// ||g - grad f(x_i)|| <= m / sigma_min(V). Throws RankDeficientError when
/// sigma_min vanishes.
double error_bound(const EdgeQuantities& eq, const Vector& g);

/// ||a|| / sigma_min(V): the bound for the worst L_f-smooth field on this
/// geometry (independent of measured values).
double geometric_error_bound(const EdgeQuantities& eq);
double geometric_error_bound(const Vector& x_i,
                             const std::vector<Vector>& neighbours,
                             double lipschitz);

struct GradientEstimate {
  Vector g;
  double m_scale = 0.0;
  int rank = 0;
  std::optional<Ellipsoid> uniform_ellipse;
  std::optional<Ellipsoid> row_ellipse;
  std::optional<double> error_bound;

  bool full_rank() const { return error_bound.has_value(); }
};

/// Simplex gradient plus both ellipsoids and the error bound. Rank-deficient
/// geometry still yields g; the bound and ellipsoids are then absent.
GradientEstimate estimate_gradient(const LocalSamples& samples);
GradientEstimate estimate_gradient(const EdgeQuantities& eq);

struct Ball {
  Vector centre;
  double radius = 0.0;
};

/// Exact smallest enclosing ball of a parallelotope (m = d): centre solves
/// A c = s, radius is the farthest of the 2^d vertices A^{-1} diag(sign) a.
Ball smallest_ball_oracle(const GradientPolytope& poly);

/// All vertices of a bounded polytope, by enumerating d-subsets of the
/// constraints. Intended for small d and few constraints.
std::vector<Vector> polytope_vertices(const GradientPolytope& poly);

/// argmax c^T x over the polytope, solved exactly over the vertex list.
Vector maximize_linear(const std::vector<Vector>& vertices, const Vector& c);

}  // namespace swarmseek
