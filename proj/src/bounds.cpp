#include "swarmseek/bounds.hpp"

#include <algorithm>
#include <cmath>

namespace swarmseek {

AffineSet quadratic_minimizer_set(const Matrix& q_sym, const Vector& centre,
                                  const Vector& zeta) {
  const Eigen::Index d = centre.size();
  require_dimension(q_sym.rows(), d, "Q rows");
  require_dimension(zeta.size(), d, "zeta");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(q_sym);
  const Vector& ev = eig.eigenvalues();
  const double top = std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
  if (ev.minCoeff() < -1e-12 * top) {
    throw PreconditionError("quadratic is not convex");
  }
  Vector shift = Vector::Zero(d);
  std::vector<Eigen::Index> null_cols;
  for (Eigen::Index i = 0; i < d; ++i) {
    const Vector u = eig.eigenvectors().col(i);
    if (ev[i] > 1e-12 * top) {
      shift += (u.dot(zeta) / ev[i]) * u;
    } else {
      if (std::abs(u.dot(zeta)) > 1e-9 * (1.0 + zeta.norm())) {
        throw PreconditionError("quadratic is unbounded below (zeta has a null-space part)");
      }
      null_cols.push_back(i);
    }
  }
  AffineSet set{centre - shift, Matrix(d, static_cast<Eigen::Index>(null_cols.size()))};
  for (std::size_t c = 0; c < null_cols.size(); ++c) {
    set.directions.col(static_cast<Eigen::Index>(c)) = eig.eigenvectors().col(null_cols[c]);
  }
  return set;
}

double tracking_error(const Vector& x, const AffineSet& set) {
  require_dimension(x.size(), set.point.size(), "tracking point");
  Vector r = x - set.point;
  if (set.directions.cols() > 0) r -= set.directions * (set.directions.transpose() * r);
  return 0.5 * r.squaredNorm();
}

double tracking_error(const Vector& x, const QuadraticField& field, long k) {
  require_dimension(x.size(), field.dimension(), "tracking point");
  return 0.5 * (x - field.minimizer(k)).squaredNorm();
}

namespace {

void require_valid(const BoundParams& p) {
  if (!(p.alpha > 0.0) || !(p.mu_f > 0.0) || !(p.L_f >= p.mu_f)) {
    throw PreconditionError("bound parameters need alpha > 0 and 0 < mu_f <= L_f");
  }
  if (p.eta0 < 0.0 || p.eta_star < 0.0) {
    throw PreconditionError("drift constants must be non-negative");
  }
}

double power(double q, long k) { return std::pow(q, static_cast<double>(k)); }

}  // namespace

double lemma1_bound_from_sum(const BoundParams& p, double d0_sq,
                             double discounted_eps_sq, long k) {
  require_valid(p);
  const double mu = p.mu_f;
  const double eta = p.eta0 + p.eta_star;
  const double q = discount(p.alpha, mu);
  return power(q, k) / mu * (0.5 * p.L_f * d0_sq - eta) +
         p.alpha / (2.0 * mu) * discounted_eps_sq + eta / (mu * mu * p.alpha);
}

double lemma1_bound(const BoundParams& p, double d0_sq,
                    std::span<const double> eps_norms, long k) {
  if (k < 0 || eps_norms.size() < static_cast<std::size_t>(k + 1)) {
    throw PreconditionError("lemma1_bound needs |eps_t| for t = 0..k");
  }
  const double q = discount(p.alpha, p.mu_f);
  double sum = 0.0;
  for (long t = 0; t <= k; ++t) {
    const double e = eps_norms[static_cast<std::size_t>(t)];
    sum = q * sum + e * e;
  }
  return lemma1_bound_from_sum(p, d0_sq, sum, k);
}

double lemma1_limit(const BoundParams& p, double eps) {
  require_valid(p);
  const double mu = p.mu_f;
  return eps * eps / (2.0 * mu * mu) + (p.eta0 + p.eta_star) / (mu * mu * p.alpha);
}

namespace {

double require_mu_prime(const BoundParams& p) {
  require_valid(p);
  const double mu_prime = p.mu_prime();
  if (!(p.c_const > 0.0) || !(mu_prime > 0.0)) {
    throw PreconditionError("composite bound needs mu' = mu_f - 1/c > 0");
  }
  return mu_prime;
}

}  // namespace

double theorem1_bound_from_sum(const BoundParams& p, double d0_sq,
                               double discounted_fhat, long k) {
  const double mu_prime = require_mu_prime(p);
  const double mu = p.mu_f;
  const double eta = p.eta0 + p.eta_star;
  const double q = discount(p.alpha, mu_prime);
  return power(q, k) / mu * (0.5 * p.composite_lipschitz() * d0_sq - eta) +
         p.alpha / (p.c_const * mu) * discounted_fhat + eta / (mu * mu_prime * p.alpha);
}

double theorem1_bound(const BoundParams& p, double d0_sq,
                      std::span<const double> fhat_star, long k) {
  if (k < 0 || fhat_star.size() < static_cast<std::size_t>(k + 1)) {
    throw PreconditionError("theorem1_bound needs fhat*_t for t = 0..k");
  }
  const double q = discount(p.alpha, require_mu_prime(p));
  double sum = 0.0;
  for (long t = 0; t <= k; ++t) sum = q * sum + fhat_star[static_cast<std::size_t>(t)];
  return theorem1_bound_from_sum(p, d0_sq, sum, k);
}

double theorem1_limit(const BoundParams& p, double fhat_sup) {
  const double mu_prime = require_mu_prime(p);
  const double eta = p.eta0 + p.eta_star;
  return fhat_sup / (p.c_const * p.mu_f * mu_prime) + eta / (p.mu_f * mu_prime * p.alpha);
}

double theorem1_limit_displayed(const BoundParams& p, double fhat_sup) {
  const double mu_prime = require_mu_prime(p);
  const double eta = p.eta0 + p.eta_star;
  return fhat_sup / mu_prime + eta / (p.mu_f * mu_prime * p.alpha);
}

double minimiser_set_distance_sq(const Vector& x_star, const Formation& formation) {
  require_dimension(x_star.size(), formation.dimension(), "minimiser point");
  // Optimal translation puts the formation centroid on x_star; the ideal
  // positions are stored centred, so the residuals are the ideal rows.
  return formation.ideal_positions().squaredNorm();
}

double lemma2_fhat_star_bound(const FormationSpec& spec,
                              const QuadraticField& field, long k) {
  const double L_f = field.lipschitz();
  const double dist_sq = minimiser_set_distance_sq(field.minimizer(k), spec.formation);
  return spec.phi_star + 0.5 * std::min(L_f, spec.lipschitz) * dist_sq;
}

CompositeMinimum composite_minimizer(const QuadraticField& field,
                                     const FormationSpec& spec, long k) {
  const Formation& formation = spec.formation;
  const int n = formation.agents();
  const Eigen::Index d = formation.dimension();
  require_dimension(field.dimension(), d, "field dimension");
  const double L_f = field.lipschitz();

  Matrix system = potential_hessian(formation, L_f);
  const Vector c = field.centre(k);
  const Vector grad_phi_zero = potential_gradient(formation, Positions::Zero(n, d), L_f);
  Vector rhs = -grad_phi_zero;
  const Vector per_agent = field.q_sym() * c - field.zeta();
  for (int i = 0; i < n; ++i) {
    system.block(i * d, i * d, d, d) += field.q_sym();
    rhs.segment(i * d, d) += per_agent;
  }
  const Vector x = system.ldlt().solve(rhs);

  CompositeMinimum out{unstacked(x, n, d), 0.0};
  out.value = potential(formation, out.x, L_f, spec.phi_star);
  for (int i = 0; i < n; ++i) out.value += field.value(k, out.x.row(i).transpose());
  return out;
}

}  // namespace swarmseek
