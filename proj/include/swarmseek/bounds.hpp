#pragma once

#include <algorithm>
#include <limits>
#include <span>

#include "swarmseek/field.hpp"
#include "swarmseek/formation.hpp"

namespace swarmseek {

/// Constants of the tracking bounds. For the composite bound, L_f is read
/// together with L_phi as the composite constant L_f + L_phi, and the drift
/// constants are those of the composite function.
struct BoundParams {
  double alpha = 0.0;
  double L_f = 0.0;
  double mu_f = 0.0;
  double L_phi = 0.0;
  double mu_phi = 0.0;
  double c_const = 0.0;
  double eta0 = 0.0;
  double eta_star = 0.0;

  double mu_prime() const { return mu_f - 1.0 / c_const; }
  double composite_lipschitz() const { return L_f + L_phi; }
};

/// Affine set point + span(directions). Minimiser sets of convex quadratics.
struct AffineSet {
  Vector point;
  Matrix directions;  // d x r, orthonormal columns (r may be 0)
};

/// Minimiser set of 1/2 (x-c)^T Qs (x-c) + zeta^T (x-c) for symmetric PSD Qs
/// with zeta in range(Qs).
AffineSet quadratic_minimizer_set(const Matrix& q_sym, const Vector& centre,
                                  const Vector& zeta);

/// 1/2 d(x, S)^2.
double tracking_error(const Vector& x, const AffineSet& set);
double tracking_error(const Vector& x, const QuadraticField& field, long k);

/// Bound on 1/2 d(x_{k+1}, X*_{k+1})^2 for the noisy gradient dynamics:
///   q^k/mu (L/2 d0^2 - eta* - eta0) + alpha/(2 mu) sum_{t<=k} q^{k-t} |eps_t|^2
///   + (eta* + eta0)/(mu^2 alpha),        q = 1 - alpha mu.
/// eps_norms holds |eps_t| for t = 0..k (at least k+1 entries).
double lemma1_bound(const BoundParams& p, double d0_sq,
                    std::span<const double> eps_norms, long k);
/// Same, given the discounted sum S_k = sum_{t<=k} q^{k-t} |eps_t|^2.
double lemma1_bound_from_sum(const BoundParams& p, double d0_sq,
                             double discounted_eps_sq, long k);
/// k -> infinity with |eps_t| = eps for all t.
double lemma1_limit(const BoundParams& p, double eps);

/// Bound on 1/2 d(x_{k+1}, X*_{fhat_{k+1}})^2 for the composite dynamics:
///   q^k/mu_f (Lhat/2 d0^2 - eta* - eta0) + alpha/(c mu_f) sum q^{k-t} fhat*_t
///   + (eta* + eta0)/(mu_f mu' alpha),    q = 1 - alpha mu', mu' = mu_f - 1/c.
/// Throws PreconditionError if mu' <= 0.
double theorem1_bound(const BoundParams& p, double d0_sq,
                      std::span<const double> fhat_star, long k);
double theorem1_bound_from_sum(const BoundParams& p, double d0_sq,
                               double discounted_fhat, long k);
/// Limit of the explicit series with fhat*_t = fhat_sup:
///   fhat_sup/(c mu_f mu') + (eta* + eta0)/(mu_f mu' alpha).
double theorem1_limit(const BoundParams& p, double fhat_sup);
/// The closed form as usually displayed:
///   fhat_sup/mu' + (eta* + eta0)/(mu_f mu' alpha).
/// Kept for comparison with theorem1_limit; the two differ by 1/(c mu_f).
double theorem1_limit_displayed(const BoundParams& p, double fhat_sup);

/// Squared distance from "every agent at x_star" to the nearest ideal
/// formation placement (optimal translation): sum_i |delta_i|^2 with delta_i
/// the ideal offsets from the formation centroid.
double minimiser_set_distance_sq(const Vector& x_star, const Formation& formation);

/// phi* + min(L_f, L_phi)/2 d(X*_F, X*_phi)^2. This bounds fhat*_k - F*_k,
/// which equals fhat*_k when the field's minimum value is zero.
double lemma2_fhat_star_bound(const FormationSpec& spec,
                              const QuadraticField& field, long k);

struct CompositeMinimum {
  Positions x;
  double value = 0.0;  // fhat*_k
};

/// Exact minimiser of F_k + phi (a strictly convex quadratic on R^{nd}).
CompositeMinimum composite_minimizer(const QuadraticField& field,
                                     const FormationSpec& spec, long k);

/// Absolute slack for comparing a measured 1/2 d^2 at x against a bound.
/// Once the bound decays below the spacing of doubles near x the measured
/// distance cannot follow it; a few ulps of |x| squared covers that floor.
inline double rounding_slack(const Vector& x) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  return 8.0 * eps * eps * std::max(1.0, x.squaredNorm());
}

/// Discount factor q = 1 - alpha mu.
inline double discount(double alpha, double mu) { return 1.0 - alpha * mu; }

}  // namespace swarmseek
