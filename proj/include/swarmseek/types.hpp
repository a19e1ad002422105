#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace swarmseek {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A contract on an input (definiteness, step size, topology) does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Neighbour directions fail to span the space, so the estimate has no bound.
class RankDeficientError : public Error {
 public:
  RankDeficientError(const std::string& what, int agent = -1)
      : Error(what), agent_(agent) {}
  int agent() const { return agent_; }

 private:
  int agent_;
};

inline void require_dimension(Eigen::Index got, Eigen::Index want,
                              const char* what) {
  if (got != want) {
    throw DimensionError(std::string(what) + ": expected dimension " +
                         std::to_string(want) + ", got " +
                         std::to_string(got));
  }
}

}  // namespace swarmseek
