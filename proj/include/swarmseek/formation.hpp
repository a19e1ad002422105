#pragma once

#include <utility>
#include <vector>

#include "swarmseek/types.hpp"

namespace swarmseek {

/// Agent states, one row per agent. Row-major so the underlying buffer is
/// the stacked vector [x^(1); x^(2); ...].
using Positions =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline Vector stacked(const Positions& x) {
  return Eigen::Map<const Vector>(x.data(), x.size());
}

inline Positions unstacked(const Vector& v, Eigen::Index n, Eigen::Index d) {
  require_dimension(v.size(), n * d, "stacked state");
  return Eigen::Map<const Positions>(v.data(), n, d);
}

/// Directed edge: `from` is a neighbour of `to` (agent `to` receives from
/// `from`), with ideal displacement x^(to) - x^(from).
struct Edge {
  int to = 0;
  int from = 0;
  Vector displacement;
};

/// Connected, symmetric neighbour graph with realisable ideal displacements.
class Formation {
 public:
  struct Link {
    int agent;
    Vector displacement;  // x^(self) - x^(agent) in the ideal formation
  };

  /// Validates symmetry, antisymmetry, connectivity and realisability.
  Formation(int agents, Eigen::Index dim, const std::vector<Edge>& edges);

  int agents() const { return static_cast<int>(neighbours_.size()); }
  Eigen::Index dimension() const { return dim_; }
  const std::vector<Link>& neighbours(int i) const { return neighbours_.at(i); }
  /// Ideal positions, centroid at the origin.
  const Positions& ideal_positions() const { return ideal_; }
  std::vector<Edge> edges() const;

 private:
  Eigen::Index dim_;
  std::vector<std::vector<Link>> neighbours_;
  Positions ideal_;
};

/// Formation together with the constants that tie it to a field.
struct FormationSpec {
  Formation formation;
  double lipschitz = 0.0;   // L_phi
  double pl = 0.0;          // mu_phi on the complement of translations
  double phi_star = 0.0;
  double c_const = 0.0;
};

/// phi(x) = phi* + L_f sum_i sum_{j in N(i)} ||x^(i) - x^(j) - xhat^(ij)||^2
double potential(const Formation& formation, const Positions& x, double L_f,
                 double phi_star);

/// Gradient of phi with respect to x^(i). `position_of(j)` is called only
/// for j in {i} and the agents linked to i.
template <class PositionOf>
Vector gradient_component_at(const Formation& formation, int i, double L_f,
                             PositionOf&& position_of) {
  const Vector xi = position_of(i);
  Vector g = Vector::Zero(formation.dimension());
  // With symmetric edges the out- and in-terms coincide: 4 L_f sum (residual).
  for (const auto& link : formation.neighbours(i)) {
    g += xi - position_of(link.agent) - link.displacement;
  }
  return 4.0 * L_f * g;
}

Vector gradient_component(const Formation& formation, const Positions& x,
                          int i, double L_f);
/// Stacked gradient of phi over all agents.
Vector potential_gradient(const Formation& formation, const Positions& x,
                          double L_f);

/// Constant Hessian of phi (nd x nd).
Matrix potential_hessian(const Formation& formation, double L_f);

struct PotentialConstants {
  double lipschitz;  // largest Hessian eigenvalue
  double pl;         // smallest eigenvalue orthogonal to translations
};
PotentialConstants lipschitz_pl_constants(const Formation& formation,
                                          double L_f);

/// Worst agent error bound ||a|| / sigma_min(A) at the given geometry, which
/// caps ||g - grad f|| for every L_f-smooth field.
double formation_error_bound(const Formation& formation, const Positions& x,
                             double L_f);

/// phi* = (c/2) n B^2 with B from `formation_error_bound` at the ideal
/// positions, so that phi(x) >= (c/2) sum ||eps||^2 holds in formation.
double phi_star_from_error_bound(const Formation& formation, double L_f,
                                 double c_const);

/// Builds the spec, checking c > 1/mu_f and mu_phi >= mu_f.
/// c_const <= 0 selects the default 2/mu_f.
FormationSpec make_formation_spec(Formation formation, double L_f, double mu_f,
                                  double c_const = 0.0);

/// Regular hexagon of circumradius (= side length) `scale`, each vertex
/// linked to its two adjacent vertices.
Formation make_hexagon(double scale);
/// 2 x 3 grid with spacing `scale`, linked to horizontal and vertical
/// neighbours.
Formation make_rectangle(double scale);

}  // namespace swarmseek
