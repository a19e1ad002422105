#include "swarmseek/formation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>
#include <string>

#include "swarmseek/gradestim.hpp"

namespace swarmseek {

namespace {

const Formation::Link* find_link(const std::vector<Formation::Link>& links,
                                 int agent) {
  auto it = std::find_if(links.begin(), links.end(),
                         [agent](const auto& l) { return l.agent == agent; });
  return it == links.end() ? nullptr : &*it;
}

bool connected(const std::vector<std::vector<Formation::Link>>& adj) {
  const std::size_t n = adj.size();
  std::vector<bool> seen(n, false);
  std::queue<std::size_t> todo;
  todo.push(0);
  seen[0] = true;
  std::size_t count = 1;
  while (!todo.empty()) {
    const auto i = todo.front();
    todo.pop();
    for (const auto& link : adj[i]) {
      const auto j = static_cast<std::size_t>(link.agent);
      if (!seen[j]) {
        seen[j] = true;
        ++count;
        todo.push(j);
      }
    }
  }
  return count == n;
}

}  // namespace

Formation::Formation(int agents, Eigen::Index dim,
                     const std::vector<Edge>& edges)
    : dim_(dim) {
  if (agents < 1) throw PreconditionError("formation needs at least one agent");
  if (dim < 1) throw DimensionError("formation dimension must be >= 1");
  neighbours_.resize(static_cast<std::size_t>(agents));

  double disp_scale = 0.0;
  for (const auto& e : edges) {
    if (e.to < 0 || e.to >= agents || e.from < 0 || e.from >= agents) {
      throw PreconditionError("edge " + std::to_string(e.from) + "->" +
                              std::to_string(e.to) + " references a missing agent");
    }
    if (e.to == e.from) {
      throw PreconditionError("self loop at agent " + std::to_string(e.to));
    }
    require_dimension(e.displacement.size(), dim, "edge displacement");
    auto& links = neighbours_[static_cast<std::size_t>(e.to)];
    if (find_link(links, e.from)) {
      throw PreconditionError("duplicate edge " + std::to_string(e.from) +
                              "->" + std::to_string(e.to));
    }
    links.push_back({e.from, e.displacement});
    disp_scale = std::max(disp_scale, e.displacement.cwiseAbs().maxCoeff());
  }

  const double tol = 1e-12 * (1.0 + disp_scale);
  for (int i = 0; i < agents; ++i) {
    for (const auto& link : neighbours_[static_cast<std::size_t>(i)]) {
      const auto* back =
          find_link(neighbours_[static_cast<std::size_t>(link.agent)], i);
      if (!back) {
        throw PreconditionError("edge set is not symmetric: " +
                                std::to_string(link.agent) + " is a neighbour of " +
                                std::to_string(i) + " but not vice versa");
      }
      if ((back->displacement + link.displacement).cwiseAbs().maxCoeff() > tol) {
        throw PreconditionError("displacements between agents " + std::to_string(i) +
                                " and " + std::to_string(link.agent) +
                                " are not antisymmetric");
      }
    }
  }

  if (!connected(neighbours_)) {
    throw PreconditionError("neighbour graph is not connected");
  }

  // Realisation: x_i - x_j = xhat^(ij) on every edge, anchored at x_0 = 0.
  ideal_ = Positions::Zero(agents, dim);
  if (agents > 1) {
    std::size_t rows = 0;
    for (const auto& links : neighbours_) rows += links.size();
    Matrix incidence = Matrix::Zero(static_cast<Eigen::Index>(rows), agents - 1);
    Matrix rhs(static_cast<Eigen::Index>(rows), dim);
    Eigen::Index r = 0;
    for (int i = 0; i < agents; ++i) {
      for (const auto& link : neighbours_[static_cast<std::size_t>(i)]) {
        if (i > 0) incidence(r, i - 1) += 1.0;
        if (link.agent > 0) incidence(r, link.agent - 1) -= 1.0;
        rhs.row(r) = link.displacement.transpose();
        ++r;
      }
    }
    const Matrix sol = incidence.colPivHouseholderQr().solve(rhs);
    const double residual = (incidence * sol - rhs).cwiseAbs().maxCoeff();
    if (residual > 1e-9 * (1.0 + disp_scale)) {
      throw PreconditionError("ideal displacements are not simultaneously realisable "
                              "(residual " + std::to_string(residual) + ")");
    }
    ideal_.bottomRows(agents - 1) = sol;
  }
  ideal_.rowwise() -= ideal_.colwise().mean();
}

std::vector<Edge> Formation::edges() const {
  std::vector<Edge> out;
  for (int i = 0; i < agents(); ++i) {
    for (const auto& link : neighbours(i)) out.push_back({i, link.agent, link.displacement});
  }
  return out;
}

double potential(const Formation& formation, const Positions& x, double L_f,
                 double phi_star) {
  require_dimension(x.rows(), formation.agents(), "state agent count");
  require_dimension(x.cols(), formation.dimension(), "state dimension");
  double sum = 0.0;
  for (int i = 0; i < formation.agents(); ++i) {
    for (const auto& link : formation.neighbours(i)) {
      sum += (x.row(i) - x.row(link.agent) - link.displacement.transpose())
                 .squaredNorm();
    }
  }
  return phi_star + L_f * sum;
}

Vector gradient_component(const Formation& formation, const Positions& x,
                          int i, double L_f) {
  require_dimension(x.rows(), formation.agents(), "state agent count");
  require_dimension(x.cols(), formation.dimension(), "state dimension");
  if (i < 0 || i >= formation.agents()) throw PreconditionError("agent index out of range");
  return gradient_component_at(formation, i, L_f, [&x](int j) -> Vector {
    return x.row(j).transpose();
  });
}

Vector potential_gradient(const Formation& formation, const Positions& x,
                          double L_f) {
  const Eigen::Index d = formation.dimension();
  Vector g(formation.agents() * d);
  for (int i = 0; i < formation.agents(); ++i) {
    g.segment(i * d, d) = gradient_component(formation, x, i, L_f);
  }
  return g;
}

namespace {

Matrix edge_laplacian(const Formation& formation) {
  const int n = formation.agents();
  Matrix M = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (const auto& link : formation.neighbours(i)) {
      const int j = link.agent;
      M(i, i) += 1.0;
      M(j, j) += 1.0;
      M(i, j) -= 1.0;
      M(j, i) -= 1.0;
    }
  }
  return M;
}

}  // namespace

Matrix potential_hessian(const Formation& formation, double L_f) {
  const Matrix M = 2.0 * L_f * edge_laplacian(formation);
  const Eigen::Index d = formation.dimension();
  Matrix H = Matrix::Zero(M.rows() * d, M.cols() * d);
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      H.block(i * d, j * d, d, d) = M(i, j) * Matrix::Identity(d, d);
    }
  }
  return H;
}

PotentialConstants lipschitz_pl_constants(const Formation& formation,
                                          double L_f) {
  if (formation.agents() < 2) {
    throw PreconditionError("potential constants need at least two agents");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(2.0 * L_f * edge_laplacian(formation),
                                            Eigen::EigenvaluesOnly);
  const Vector& ev = eig.eigenvalues();  // ascending
  const double top = ev[ev.size() - 1];
  if (!(ev[1] > 1e-12 * top)) {
    throw PreconditionError("neighbour graph is disconnected; PL constant is zero");
  }
  return {top, ev[1]};
}

double formation_error_bound(const Formation& formation, const Positions& x,
                             double L_f) {
  double worst = 0.0;
  for (int i = 0; i < formation.agents(); ++i) {
    std::vector<Vector> nbs;
    for (const auto& link : formation.neighbours(i)) {
      nbs.push_back(x.row(link.agent).transpose());
    }
    try {
      worst = std::max(worst, geometric_error_bound(x.row(i).transpose(), nbs, L_f));
    } catch (const RankDeficientError& e) {
      throw RankDeficientError(std::string(e.what()) + " (agent " +
                                   std::to_string(i) + ")",
                               i);
    }
  }
  return worst;
}

double phi_star_from_error_bound(const Formation& formation, double L_f,
                                 double c_const) {
  const double B = formation_error_bound(formation, formation.ideal_positions(), L_f);
  return 0.5 * c_const * formation.agents() * B * B;
}

FormationSpec make_formation_spec(Formation formation, double L_f, double mu_f,
                                  double c_const) {
  if (c_const <= 0.0) c_const = 2.0 / mu_f;
  if (!(c_const > 1.0 / mu_f)) {
    throw PreconditionError("formation constant c must exceed 1/mu_f");
  }
  const auto constants = lipschitz_pl_constants(formation, L_f);
  if (constants.pl < mu_f) {
    throw PreconditionError("formation PL constant is below mu_f");
  }
  const double phi_star = phi_star_from_error_bound(formation, L_f, c_const);
  return {std::move(formation), constants.lipschitz, constants.pl, phi_star, c_const};
}

namespace {

Formation from_ideal(const Positions& p, const std::vector<std::pair<int, int>>& pairs) {
  std::vector<Edge> edges;
  for (const auto& [i, j] : pairs) {
    const Vector dij = (p.row(i) - p.row(j)).transpose();
    edges.push_back({i, j, dij});
    edges.push_back({j, i, -dij});
  }
  return Formation(static_cast<int>(p.rows()), p.cols(), edges);
}

}  // namespace

Formation make_hexagon(double scale) {
  if (!(scale > 0.0)) throw PreconditionError("formation scale must be positive");
  Positions p(6, 2);
  for (int i = 0; i < 6; ++i) {
    const double theta = 2.0 * std::numbers::pi * i / 6.0;
    p(i, 0) = scale * std::cos(theta);
    p(i, 1) = scale * std::sin(theta);
  }
  return from_ideal(p, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 0}});
}

Formation make_rectangle(double scale) {
  if (!(scale > 0.0)) throw PreconditionError("formation scale must be positive");
  // agent = row * 3 + col
  Positions p(6, 2);
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 3; ++c) {
      p(r * 3 + c, 0) = scale * c;
      p(r * 3 + c, 1) = scale * r;
    }
  }
  return from_ideal(p, {{0, 1}, {1, 2}, {3, 4}, {4, 5}, {0, 3}, {1, 4}, {2, 5}});
}

}  // namespace swarmseek
