#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "swarmseek/scenario.hpp"

namespace swarmseek {

namespace {

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

bool all_finite(const SimTrace& trace) {
  for (const auto& row : trace.rows) {
    for (const auto& a : row.agents) {
      if (!a.x.allFinite() || !std::isfinite(a.tracking_error)) return false;
    }
  }
  return trace.final_state.x.allFinite();
}

/// First row with phi < 2 phi*, or the configured start.
std::size_t transient_end(const SimTrace& trace, const VerifyOptions& options) {
  if (options.transient_end >= 0) {
    return std::min(trace.rows.size(), static_cast<std::size_t>(options.transient_end));
  }
  const double threshold = 2.0 * trace.constants.phi_star;
  for (std::size_t r = 0; r < trace.rows.size(); ++r) {
    if (trace.rows[r].phi < threshold) return r;
  }
  return trace.rows.size();
}

CheckResult check_theorem1(const SimTrace& trace) {
  double worst = -std::numeric_limits<double>::infinity();
  long at = -1;
  for (const auto& row : trace.rows) {
    const double gap = row.stacked_error - row.theorem1_bound;
    if (!(gap <= 0.0) && at < 0) at = row.k;
    worst = std::max(worst, gap);
  }
  return {"theorem1_dominance", at < 0,
          at < 0 ? fmt("max(measured - bound) = %.3e", worst)
                 : fmt("bound exceeded first at k=%.0f, max excess %.3e", static_cast<double>(at), worst)};
}

CheckResult check_lemma1(const SimTrace& trace) {
  double worst = -std::numeric_limits<double>::infinity();
  long at = -1;
  for (const auto& row : trace.rows) {
    for (const auto& a : row.agents) {
      const double gap = a.tracking_error - a.lemma1_bound;
      if (!(gap <= rounding_slack(a.x)) && at < 0) at = row.k;
      worst = std::max(worst, gap);
    }
  }
  return {"lemma1_dominance", at < 0,
          at < 0 ? fmt("max(measured - bound) = %.3e", worst)
                 : fmt("bound exceeded first at k=%.0f, max excess %.3e", static_cast<double>(at), worst)};
}

std::vector<CheckResult> check_error_bound(const SimTrace& trace, std::size_t start,
                                           double factor_limit) {
  long violations = 0;
  long undefined = 0;
  for (const auto& row : trace.rows) {
    for (const auto& a : row.agents) {
      if (std::isnan(a.error_bound)) ++undefined;
      else if (!(a.gradient_error <= a.error_bound)) ++violations;
    }
  }
  double bound_sum = 0.0;
  double error_sum = 0.0;
  for (std::size_t r = start; r < trace.rows.size(); ++r) {
    for (const auto& a : trace.rows[r].agents) {
      if (std::isnan(a.error_bound)) continue;
      bound_sum += a.error_bound;
      error_sum += a.gradient_error;
    }
  }
  const double factor = error_sum > 0.0 ? bound_sum / error_sum
                                        : std::numeric_limits<double>::infinity();
  std::vector<CheckResult> out;
  out.push_back({"error_bound_validity", violations == 0 && undefined == 0,
                 fmt("%.0f violations, %.0f undefined bounds", static_cast<double>(violations),
                     static_cast<double>(undefined))});
  out.push_back({"error_bound_factor", factor <= factor_limit,
                 fmt("mean bound / mean error = %.3f over post-transient window (limit %.0f)",
                     factor, factor_limit)});
  return out;
}

CheckResult check_assumption5(const SimTrace& trace, std::size_t start) {
  long violations = 0;
  double worst_ratio = 0.0;
  for (std::size_t r = start; r < trace.rows.size(); ++r) {
    const auto& row = trace.rows[r];
    if (!(row.phi >= row.assumption5_rhs)) ++violations;
    worst_ratio = std::max(worst_ratio, row.assumption5_rhs / row.phi);
  }
  return {"assumption5", violations == 0 && start < trace.rows.size(),
          fmt("from k=%.0f: %.0f violations, max rhs/phi = %.4f", static_cast<double>(start),
              static_cast<double>(violations), worst_ratio)};
}

CheckResult check_circle(const ScenarioConfig& config) {
  const QuadraticField field = config.field();
  const int n = scenario_formation(config).agents();
  auto [cstate, swarm] = circular_init(config.circular, start_centroid(config), field, n);
  // Radius error relative to the coordinate magnitude, which sets the
  // rounding floor of x - c.
  double worst = 0.0;
  auto measure = [&](const CircularState& cs, const SwarmState& s) {
    for (int i = 0; i < n; ++i) {
      const double r = (s.x.row(i) - cs.centres.row(i)).norm();
      const double scale = std::max({1.0, config.circular.radius, cs.centres.row(i).norm()});
      const double err = std::abs(r - config.circular.radius) / scale;
      worst = std::isnan(err) ? std::numeric_limits<double>::infinity() : std::max(worst, err);
    }
  };
  measure(cstate, swarm);
  for (long k = 0; k < config.steps; ++k) {
    auto step = circular_step(config.circular, cstate, swarm, field);
    cstate = std::move(step.cstate);
    swarm = std::move(step.next);
    measure(cstate, swarm);
  }
  return {"circle_constraint", worst <= 1e-12,
          fmt("max | |x - c| - D | / max(1, D, |c|) = %.3e", worst)};
}

}  // namespace

std::vector<CheckResult> verify_scenario(const ScenarioConfig& config,
                                         const VerifyOptions& options) {
  std::vector<CheckResult> out;
  const SimTrace trace = run_scenario(config);
  out.push_back({"finite_trace", all_finite(trace),
                 fmt("%.0f rows", static_cast<double>(trace.rows.size()))});
  out.push_back({"operating_box", trace.box_exits == 0,
                 fmt("%.0f agent-iterations outside the box", static_cast<double>(trace.box_exits))});

  switch (config.method) {
    case Method::kComposite: {
      const std::size_t start = transient_end(trace, options);
      out.push_back(check_theorem1(trace));
      for (auto& c : check_error_bound(trace, start, options.bound_factor_limit)) {
        out.push_back(std::move(c));
      }
      out.push_back(check_assumption5(trace, start));
      break;
    }
    case Method::kNaive:
      out.push_back(check_lemma1(trace));
      break;
    case Method::kCircular:
      out.push_back(check_circle(config));
      break;
  }

  const std::string first = trace_csv(trace);
  const std::string second = trace_csv(run_scenario(config));
  out.push_back({"replay_determinism", first == second,
                 fmt("%.0f bytes compared", static_cast<double>(first.size()))});
  return out;
}

}  // namespace swarmseek
