#pragma once

#include <vector>

#include "swarmseek/types.hpp"

namespace swarmseek {

struct SinusoidTerm {
  double amplitude = 0.0;
  double frequency = 0.0;  // radians per iteration
  double phase = 0.0;
};

/// Scalar trajectory of one coordinate of the source centre:
/// offset + drift*k + sum_j amplitude_j * sin(frequency_j * k + phase_j).
struct CoordinatePath {
  std::vector<SinusoidTerm> terms;
  double drift = 0.0;
  double offset = 0.0;

  double at(long k) const;
};

/// Path of the source centre c(k). A single coordinate path is applied to
/// every coordinate; otherwise there must be one per coordinate.
struct SourcePath {
  std::vector<CoordinatePath> coordinates;

  Vector at(long k, Eigen::Index dim) const;
  bool is_static() const;
};

/// Time-varying quadratic
///   f_k(x) = 1/2 (x - c(k))^T Q (x - c(k)) + zeta^T (x - c(k)) + p.
///
/// Q is used verbatim for values. Gradients, eigenvalues and minimisers use
/// the symmetric part Qs = (Q + Q^T)/2, which is what the quadratic form sees.
class QuadraticField {
 public:
  QuadraticField(Matrix q, Vector zeta, double p, SourcePath path);

  Eigen::Index dimension() const { return zeta_.size(); }
  const Matrix& q() const { return q_; }
  const Matrix& q_sym() const { return q_sym_; }
  const Vector& zeta() const { return zeta_; }
  double offset_value() const { return p_; }
  const SourcePath& path() const { return path_; }

  Vector centre(long k) const { return path_.at(k, dimension()); }

  double value(long k, const Vector& x) const;
  /// Analytic gradient. Ground truth only; agents never see it in closed loop.
  Vector gradient(long k, const Vector& x) const;
  Vector minimizer(long k) const;
  double optimal_value(long k) const;

  double lipschitz() const { return eig_max_; }
  double pl_constant() const { return eig_min_; }

 private:
  Matrix q_;
  Matrix q_sym_;
  Vector zeta_;
  double p_;
  SourcePath path_;
  Eigen::LLT<Matrix> q_sym_llt_;
  Vector static_shift_;  // Qs^{-1} zeta
  double eig_min_ = 0.0;
  double eig_max_ = 0.0;
};

struct Box {
  Vector lower;
  Vector upper;

  bool contains(const Vector& x) const;
};

/// Regularity constants consumed by the tracking bounds.
struct FieldConstants {
  double lipschitz = 0.0;     // L_f
  double pl = 0.0;            // mu_f
  double value_drift = 0.0;   // eta_0, over the declared box
  double optimal_drift = 0.0; // eta^*
};

/// L_f and mu_f from the spectrum of Qs; eta_0 and eta^* maximised over
/// k in [0, horizon). The per-step value change is affine in x, so its
/// extreme over a box is attained at a corner.
FieldConstants field_constants(const QuadraticField& field, const Box& region,
                               long horizon);

}  // namespace swarmseek
