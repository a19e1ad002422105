#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "swarmseek/bounds.hpp"
#include "swarmseek/dynamics.hpp"
#include "swarmseek/field.hpp"
#include "swarmseek/formation.hpp"

namespace swarmseek {

enum class Method { kComposite, kNaive, kCircular };

const char* method_name(Method m);

/// Raised by load_config / parse_config with every violation found.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

struct FormationConfig {
  std::string preset = "hexagon";  // "hexagon", "rectangle" or "explicit"
  double scale = 3.0;
  int agents = 0;                  // explicit only
  std::vector<Edge> edges;         // explicit only
};

struct ScenarioConfig {
  std::string name = "scenario";
  Method method = Method::kComposite;
  long steps = 3000;
  std::uint64_t seed = 1;

  Matrix q;
  Vector zeta;
  double p = 0.0;
  SourcePath path;

  FormationConfig formation;
  double c_const = 0.0;             // <= 0: default 2/mu_f
  std::optional<double> alpha;      // default: largest admissible step
  Vector initial_offset;            // start centroid = c(0) + offset (+ jitter)
  double initial_jitter = 0.0;      // radius of seeded start perturbation
  Box operating_box;                // region for eta_0
  double noise_bound = 0.0;         // naive only
  CircularParams circular;
  RankPolicy rank_policy = RankPolicy::kContinue;
  std::string output_dir;

  QuadraticField field() const;
};

ScenarioConfig load_config(const std::filesystem::path& path);

/// Formation built from the config's preset or explicit edge list.
Formation scenario_formation(const ScenarioConfig& config);
/// Start centroid c(0) + offset, plus a seeded jitter when configured.
Vector start_centroid(const ScenarioConfig& config);
ScenarioConfig parse_config(const std::string& text, const std::string& name = "scenario");
/// Canonical JSON text of the config; parsing it back reproduces the run.
std::string config_to_json(const ScenarioConfig& config);

struct AgentRow {
  Vector x;
  double value = 0.0;
  Vector estimate;       // gradient estimate / oracle output (empty if none)
  Vector true_gradient;
  double gradient_error = 0.0;
  double error_bound = 0.0;
  double tracking_error = 0.0;   // 1/2 |x_i - x*_f(k)|^2
  double composite_error = 0.0;  // 1/2 |x_i - (x*_fhat(k))_i|^2
  double lemma1_bound = 0.0;
};

/// One iteration. Quantities that do not apply to the method are NaN.
struct IterationRow {
  long k = 0;
  std::vector<AgentRow> agents;
  double phi = 0.0;
  double assumption5_rhs = 0.0;  // (c/2) sum |g - grad f|^2
  double stacked_error = 0.0;    // 1/2 |x - x*_fhat(k)|^2 over all agents
  double theorem1_bound = 0.0;
  int rank_deficient = 0;
};

struct RunConstants {
  double alpha = 0.0;
  double L_f = 0.0;
  double mu_f = 0.0;
  double L_phi = 0.0;
  double mu_phi = 0.0;
  double c_const = 0.0;
  double phi_star = 0.0;
  double field_eta0 = 0.0;
  double field_eta_star = 0.0;
  double eta0 = 0.0;       // as used by the bound of this method
  double eta_star = 0.0;
  double fhat_surrogate = 0.0;
  double theorem1_limit = 0.0;
  double theorem1_limit_displayed = 0.0;
};

struct SimTrace {
  Method method = Method::kComposite;
  int agents = 0;
  Eigen::Index dim = 0;
  std::vector<IterationRow> rows;  // one per executed step, pre-update state
  SwarmState initial;
  SwarmState final_state;
  RunConstants constants;
  long box_exits = 0;
  long rank_deficient_events = 0;
  double wall_seconds = 0.0;
};

SimTrace run_scenario(const ScenarioConfig& config);

/// Column order of the CSV trace.
std::vector<std::string> trace_columns(Eigen::Index dim);
std::string trace_csv(const SimTrace& trace);
std::string trace_json(const SimTrace& trace);

struct TraceStats {
  double final_tracking_error = 0.0;       // mean over agents, final state
  double steady_tracking_error = 0.0;      // mean over last 20% of rows
  double steady_gradient_error = 0.0;
  double steady_error_bound = 0.0;
  double max_bound_violation = 0.0;        // max(0, measured - bound)
};
TraceStats trace_stats(const SimTrace& trace, const QuadraticField& field);

std::string summary_json(const ScenarioConfig& config, const SimTrace& trace);

enum class TraceFormat { kCsv, kJson };

/// Writes trace.{csv,json} and summary.json under `dir`.
void emit(const ScenarioConfig& config, const SimTrace& trace,
          const std::filesystem::path& dir, TraceFormat format);

struct ComparisonEntry {
  std::string name;
  Method method;
  TraceStats stats;
};

struct Comparison {
  std::vector<ComparisonEntry> entries;
  std::string merged_csv;
  std::string summary_json;
};

/// Runs every config (in parallel) on the same field and aligns the
/// per-iteration mean tracking error and mean error bound.
Comparison compare(const std::vector<ScenarioConfig>& configs);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct VerifyOptions {
  /// First iteration of the post-transient window; negative selects the
  /// first k with phi < 2 phi*.
  long transient_end = -1;
  double bound_factor_limit = 10.0;
};

/// Trace-level checks for one scenario: bound dominance, error-bound
/// validity, the phi >= (c/2) sum |eps|^2 relation, finiteness, replay
/// determinism.
std::vector<CheckResult> verify_scenario(const ScenarioConfig& config,
                                         const VerifyOptions& options = {});

}  // namespace swarmseek
