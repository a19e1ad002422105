#include "swarmseek/dynamics.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace swarmseek {

namespace {

// Step-size limits are compared with a relative slack so that alpha set to
// exactly 1/L by the caller is never rejected for rounding.
void require_step_size(double alpha, double limit, const char* what) {
  if (!(alpha > 0.0) || alpha > limit * (1.0 + 1e-12)) {
    throw PreconditionError(std::string(what) + ": step size " +
                            std::to_string(alpha) + " outside (0, " +
                            std::to_string(limit) + "]");
  }
}

}  // namespace

NoiseModel::NoiseModel(std::uint64_t seed, double bound)
    : rng_(seed), bound_(bound) {
  if (!(bound >= 0.0)) throw PreconditionError("noise bound must be >= 0");
}

NaiveStepResult naive_step(const SwarmState& state, const QuadraticField& field,
                           double alpha, NoiseModel& noise) {
  require_step_size(alpha, 1.0 / field.lipschitz(), "naive dynamics");
  require_dimension(state.x.cols(), field.dimension(), "swarm state dimension");

  NaiveStepResult out{{state.k + 1, state.x}, {}};
  out.noise.reserve(static_cast<std::size_t>(state.agents()));
  for (int i = 0; i < state.agents(); ++i) {
    const Vector xi = state.x.row(i).transpose();
    Vector eps = noise.draw(field.dimension());
    out.next.x.row(i) = (xi - alpha * (field.gradient(state.k, xi) + eps)).transpose();
    out.noise.push_back(std::move(eps));
  }
  return out;
}

AgentDirection composite_agent_direction(const FormationSpec& spec, double L_f,
                                         int agent,
                                         const NeighbourhoodReader& reader) {
  const auto& links = spec.formation.neighbours(agent);
  LocalSamples samples{{reader.position(agent), reader.measurement(agent)}, {}, L_f};
  samples.neighbours.reserve(links.size());
  for (const auto& link : links) {
    samples.neighbours.push_back({reader.position(link.agent),
                                  reader.measurement(link.agent)});
  }
  return {estimate_gradient(samples),
          gradient_component_at(spec.formation, agent, L_f,
                                [&reader](int j) { return reader.position(j); })};
}

double composite_step_limit(double L_f, const FormationSpec& spec) {
  return 1.0 / (L_f + spec.lipschitz);
}

CompositeStepResult composite_step(const SwarmState& state,
                                   const QuadraticField& field,
                                   const FormationSpec& spec, double alpha,
                                   RankPolicy policy, std::span<const int> order) {
  const double L_f = field.lipschitz();
  require_step_size(alpha, composite_step_limit(L_f, spec), "composite dynamics");
  const int n = state.agents();
  require_dimension(n, spec.formation.agents(), "swarm agent count");
  require_dimension(state.x.cols(), field.dimension(), "swarm state dimension");
  if (!order.empty()) require_dimension(static_cast<Eigen::Index>(order.size()), n, "update order");

  CompositeStepResult out;
  out.measurements.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    out.measurements[static_cast<std::size_t>(i)] =
        field.value(state.k, state.x.row(i).transpose());
  }

  const SnapshotReader reader(state.x, out.measurements);
  out.directions.resize(static_cast<std::size_t>(n));
  for (int idx = 0; idx < n; ++idx) {
    const int i = order.empty() ? idx : order[static_cast<std::size_t>(idx)];
    auto dir = composite_agent_direction(spec, L_f, i, reader);
    if (!dir.estimate.full_rank()) {
      if (policy == RankPolicy::kStrict) {
        throw RankDeficientError("agent " + std::to_string(i) +
                                     ": neighbour directions do not span the space at k=" +
                                     std::to_string(state.k),
                                 i);
      }
    }
    out.directions[static_cast<std::size_t>(i)] = std::move(dir);
  }
  for (int i = 0; i < n; ++i) {
    if (!out.directions[static_cast<std::size_t>(i)].estimate.full_rank()) {
      out.rank_deficient.push_back(i);
    }
  }

  out.next = {state.k + 1, state.x};
  for (int i = 0; i < n; ++i) {
    const auto& dir = out.directions[static_cast<std::size_t>(i)];
    out.next.x.row(i) -= alpha * (dir.estimate.g + dir.potential_gradient).transpose();
  }
  return out;
}

Matrix ring_consensus_matrix(int agents) {
  if (agents < 3) throw PreconditionError("ring consensus needs at least 3 agents");
  Matrix P = Matrix::Zero(agents, agents);
  for (int i = 0; i < agents; ++i) {
    P(i, i) = 0.5;
    P(i, (i + 1) % agents) = 0.25;
    P(i, (i + agents - 1) % agents) = 0.25;
  }
  return P;
}

void validate_circular_params(const CircularParams& params, int agents) {
  if (!(params.radius > 0.0)) throw PreconditionError("circle radius D must be positive");
  if (!(params.epsilon > 0.0 && params.epsilon <= 1.0)) {
    throw PreconditionError("centre relaxation epsilon must lie in (0, 1]");
  }
  if (!(params.filter_alpha > 0.0 && params.filter_alpha <= 1.0)) {
    throw PreconditionError("filter weight alpha must lie in (0, 1]");
  }
  const Matrix& P = params.consensus;
  require_dimension(P.rows(), agents, "consensus matrix rows");
  require_dimension(P.cols(), agents, "consensus matrix cols");
  if ((P.array() < 0.0).any()) throw PreconditionError("consensus matrix has negative entries");
  if ((P - P.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw PreconditionError("consensus matrix is not symmetric");
  }
  if ((P.rowwise().sum().array() - 1.0).abs().maxCoeff() > 1e-12) {
    throw PreconditionError("consensus matrix is not row-stochastic");
  }
}

Vector circular_estimate(const Vector& centre, const Vector& x, double value,
                         double radius) {
  return centre - (2.0 / (radius * radius)) * value * (x - centre);
}

namespace {

Vector on_circle(const Vector& centre, double radius, double angle) {
  Vector x = centre;
  x[0] += radius * std::cos(angle);
  x[1] += radius * std::sin(angle);
  return x;
}

}  // namespace

std::pair<CircularState, SwarmState> circular_init(const CircularParams& params,
                                                   const Vector& centre,
                                                   const QuadraticField& field,
                                                   int agents) {
  if (field.dimension() != 2) throw DimensionError("circular baseline requires d = 2");
  require_dimension(centre.size(), 2, "circle centre");
  validate_circular_params(params, agents);

  CircularState cs;
  cs.centres = Positions(agents, 2);
  cs.phases = Vector(agents);
  SwarmState swarm{0, Positions(agents, 2)};
  Positions est(agents, 2);
  for (int i = 0; i < agents; ++i) {
    cs.phases[i] = (i + 1) * 2.0 * std::numbers::pi / agents;
    cs.centres.row(i) = centre.transpose();
    const Vector xi = on_circle(centre, params.radius, cs.phases[i]);
    swarm.x.row(i) = xi.transpose();
    est.row(i) = circular_estimate(centre, xi, field.value(0, xi), params.radius).transpose();
  }
  cs.filtered = est;
  cs.filtered_prev = est;
  cs.h = est;
  return {std::move(cs), std::move(swarm)};
}

CircularStepResult circular_step(const CircularParams& params,
                                 const CircularState& cstate,
                                 const SwarmState& swarm,
                                 const QuadraticField& field) {
  if (field.dimension() != 2) throw DimensionError("circular baseline requires d = 2");
  const int n = swarm.agents();
  require_dimension(swarm.x.cols(), 2, "swarm state dimension");
  require_dimension(params.consensus.rows(), n, "consensus matrix rows");

  CircularStepResult out;
  out.measurements.resize(static_cast<std::size_t>(n));
  Positions fresh(n, 2);
  for (int i = 0; i < n; ++i) {
    const Vector xi = swarm.x.row(i).transpose();
    const double value = field.value(swarm.k, xi);
    out.measurements[static_cast<std::size_t>(i)] = value;
    fresh.row(i) = circular_estimate(cstate.centres.row(i).transpose(), xi, value,
                                     params.radius)
                       .transpose();
  }

  const double a = params.filter_alpha;
  const Positions filtered = (1.0 - a) * cstate.filtered + a * fresh;
  // Dynamic consensus on the lagged filter increment.
  const Positions h_tilde = cstate.h + cstate.filtered - cstate.filtered_prev;
  const Positions h = params.consensus * h_tilde;

  out.cstate = cstate;
  out.cstate.h = h;
  out.cstate.filtered_prev = cstate.filtered;
  out.cstate.filtered = filtered;
  out.cstate.centres = (1.0 - params.epsilon) * cstate.centres + params.epsilon * h;

  out.next = {swarm.k + 1, Positions(n, 2)};
  const double angle_step = params.omega * static_cast<double>(out.next.k);
  for (int i = 0; i < n; ++i) {
    out.next.x.row(i) = on_circle(out.cstate.centres.row(i).transpose(), params.radius,
                                  cstate.phases[i] + angle_step)
                            .transpose();
  }
  return out;
}

}  // namespace swarmseek
