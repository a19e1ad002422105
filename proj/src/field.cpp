#include "swarmseek/field.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace swarmseek {

double CoordinatePath::at(long k) const {
  const double t = static_cast<double>(k);
  double c = offset + drift * t;
  for (const auto& term : terms) {
    c += term.amplitude * std::sin(term.frequency * t + term.phase);
  }
  return c;
}

Vector SourcePath::at(long k, Eigen::Index dim) const {
  Vector c = Vector::Zero(dim);
  if (coordinates.empty()) return c;
  if (coordinates.size() == 1) {
    c.setConstant(coordinates.front().at(k));
    return c;
  }
  require_dimension(static_cast<Eigen::Index>(coordinates.size()), dim,
                    "source path coordinates");
  for (Eigen::Index i = 0; i < dim; ++i) c[i] = coordinates[i].at(k);
  return c;
}

bool SourcePath::is_static() const {
  return std::all_of(coordinates.begin(), coordinates.end(),
                     [](const CoordinatePath& p) {
                       if (p.drift != 0.0) return false;
                       return std::all_of(p.terms.begin(), p.terms.end(),
                                          [](const SinusoidTerm& t) {
                                            return t.amplitude == 0.0 ||
                                                   t.frequency == 0.0;
                                          });
                     });
}

QuadraticField::QuadraticField(Matrix q, Vector zeta, double p, SourcePath path)
    : q_(std::move(q)), zeta_(std::move(zeta)), p_(p), path_(std::move(path)) {
  if (zeta_.size() < 1) throw DimensionError("field dimension must be >= 1");
  require_dimension(q_.rows(), zeta_.size(), "Q rows");
  require_dimension(q_.cols(), zeta_.size(), "Q cols");
  if (path_.coordinates.size() > 1) {
    require_dimension(static_cast<Eigen::Index>(path_.coordinates.size()),
                      zeta_.size(), "source path coordinates");
  }
  q_sym_ = 0.5 * (q_ + q_.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(q_sym_, Eigen::EigenvaluesOnly);
  eig_min_ = eig.eigenvalues().minCoeff();
  eig_max_ = eig.eigenvalues().maxCoeff();
  if (!(eig_min_ > 0.0)) {
    throw PreconditionError("symmetrised Q is not positive definite (min eigenvalue " +
                            std::to_string(eig_min_) + ")");
  }
  q_sym_llt_.compute(q_sym_);
  static_shift_ = q_sym_llt_.solve(zeta_);
}

double QuadraticField::value(long k, const Vector& x) const {
  require_dimension(x.size(), dimension(), "field point");
  const Vector y = x - centre(k);
  return 0.5 * y.dot(q_ * y) + zeta_.dot(y) + p_;
}

Vector QuadraticField::gradient(long k, const Vector& x) const {
  require_dimension(x.size(), dimension(), "field point");
  return q_sym_ * (x - centre(k)) + zeta_;
}

Vector QuadraticField::minimizer(long k) const {
  return centre(k) - static_shift_;
}

double QuadraticField::optimal_value(long k) const {
  return value(k, minimizer(k));
}

bool Box::contains(const Vector& x) const {
  return x.size() == lower.size() && (x.array() >= lower.array()).all() &&
         (x.array() <= upper.array()).all();
}

FieldConstants field_constants(const QuadraticField& field, const Box& region,
                               long horizon) {
  const Eigen::Index d = field.dimension();
  require_dimension(region.lower.size(), d, "operating box lower");
  require_dimension(region.upper.size(), d, "operating box upper");
  if (horizon < 1) throw PreconditionError("horizon must be >= 1");
  if ((region.lower.array() > region.upper.array()).any()) {
    throw PreconditionError("operating box has lower > upper");
  }

  FieldConstants out;
  out.lipschitz = field.lipschitz();
  out.pl = field.pl_constant();

  const long corners = 1L << d;
  Vector corner(d);
  for (long k = 0; k < horizon; ++k) {
    out.optimal_drift = std::max(
        out.optimal_drift,
        std::abs(field.optimal_value(k + 1) - field.optimal_value(k)));
    for (long mask = 0; mask < corners; ++mask) {
      for (Eigen::Index i = 0; i < d; ++i) {
        corner[i] = (mask >> i) & 1 ? region.upper[i] : region.lower[i];
      }
      out.value_drift =
          std::max(out.value_drift, std::abs(field.value(k + 1, corner) -
                                             field.value(k, corner)));
    }
  }
  return out;
}

}  // namespace swarmseek
