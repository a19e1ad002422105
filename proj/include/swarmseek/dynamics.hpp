#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "swarmseek/field.hpp"
#include "swarmseek/formation.hpp"
#include "swarmseek/gradestim.hpp"
#include "swarmseek/rng.hpp"

namespace swarmseek {

struct SwarmState {
  long k = 0;
  Positions x;

  int agents() const { return static_cast<int>(x.rows()); }
};

/// Bounded additive gradient noise, uniform in a ball of radius `bound`.
class NoiseModel {
 public:
  NoiseModel(std::uint64_t seed, double bound);

  double bound() const { return bound_; }
  Vector draw(Eigen::Index dim) { return rng_.in_ball(dim, bound_); }

 private:
  PortableRng rng_;
  double bound_;
};

struct NaiveStepResult {
  SwarmState next;
  std::vector<Vector> noise;  // realised eps per agent
};

/// x <- x - alpha (grad f_k(x) + eps), every agent independently.
/// Requires 0 < alpha <= 1/L_f.
NaiveStepResult naive_step(const SwarmState& state, const QuadraticField& field,
                           double alpha, NoiseModel& noise);

/// What an agent may read during a composite step: positions and
/// measurements from the current snapshot.
class NeighbourhoodReader {
 public:
  virtual ~NeighbourhoodReader() = default;
  virtual Vector position(int agent) const = 0;
  virtual double measurement(int agent) const = 0;
};

/// Reader over a full snapshot.
class SnapshotReader final : public NeighbourhoodReader {
 public:
  SnapshotReader(const Positions& x, const std::vector<double>& values)
      : x_(x), values_(values) {}
  Vector position(int agent) const override { return x_.row(agent).transpose(); }
  double measurement(int agent) const override {
    return values_[static_cast<std::size_t>(agent)];
  }

 private:
  const Positions& x_;
  const std::vector<double>& values_;
};

struct AgentDirection {
  GradientEstimate estimate;
  Vector potential_gradient;
};

/// Simplex-gradient estimate and formation gradient for one agent, reading
/// only the agent itself and its neighbours through `reader`.
AgentDirection composite_agent_direction(const FormationSpec& spec, double L_f,
                                         int agent,
                                         const NeighbourhoodReader& reader);

enum class RankPolicy { kContinue, kStrict };

struct CompositeStepResult {
  SwarmState next;
  std::vector<double> measurements;
  std::vector<AgentDirection> directions;
  std::vector<int> rank_deficient;  // agents whose bound is undefined
};

/// One synchronous step of the distributed composite dynamics:
/// every estimate is formed from the k-snapshot, then all positions move by
/// -alpha (g + grad_i phi). Requires 0 < alpha <= 1/(L_f + L_phi).
/// `order` permutes the per-agent evaluation order (results must not
/// depend on it). Under kStrict a rank-deficient agent raises
/// RankDeficientError carrying the agent id.
CompositeStepResult composite_step(const SwarmState& state,
                                   const QuadraticField& field,
                                   const FormationSpec& spec, double alpha,
                                   RankPolicy policy = RankPolicy::kContinue,
                                   std::span<const int> order = {});

double composite_step_limit(double L_f, const FormationSpec& spec);

struct CircularParams {
  double radius = 3.0;         // D
  double omega = 1.0;          // rotation per iteration
  double epsilon = 0.5;        // centre relaxation
  double filter_alpha = 1.0;   // low-pass weight on fresh estimates
  Matrix consensus;            // P, symmetric row-stochastic
};

/// The 6-agent ring consensus matrix with 1/2 self weight and 1/4 to each
/// ring neighbour.
Matrix ring_consensus_matrix(int agents);

/// Per-agent memory of the circular source-seeking baseline.
struct CircularState {
  Positions centres;        // c_{k}
  Positions filtered;       // g~_{k}
  Positions filtered_prev;  // g~_{k-1}
  Positions h;              // h_{k}
  Vector phases;            // phi^(i) = i 2 pi / n, i = 1..n
};

/// Raw per-agent estimate c - (2/D^2) f(x) (x - c), i.e. the circular
/// estimator applied to the signal -f so that the centres descend f.
Vector circular_estimate(const Vector& centre, const Vector& x, double value,
                         double radius);

/// Initialises every agent's centre at `centre`, places the agents on the
/// circle and seeds h, g~ and their lags with the first estimate.
std::pair<CircularState, SwarmState> circular_init(const CircularParams& params,
                                                   const Vector& centre,
                                                   const QuadraticField& field,
                                                   int agents);

struct CircularStepResult {
  CircularState cstate;
  SwarmState next;
  std::vector<double> measurements;  // f_k at the pre-step positions
};

CircularStepResult circular_step(const CircularParams& params,
                                 const CircularState& cstate,
                                 const SwarmState& swarm,
                                 const QuadraticField& field);

void validate_circular_params(const CircularParams& params, int agents);

}  // namespace swarmseek
