#include "swarmseek/scenario.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace swarmseek {

using json = nlohmann::ordered_json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace

const char* method_name(Method m) {
  switch (m) {
    case Method::kComposite: return "composite";
    case Method::kNaive: return "naive";
    case Method::kCircular: return "circular";
  }
  return "?";
}

ConfigError::ConfigError(std::vector<std::string> problems)
    : Error("invalid scenario config: " + join(problems, "; ")),
      problems_(std::move(problems)) {}

QuadraticField ScenarioConfig::field() const { return {q, zeta, p, path}; }

// ---------------------------------------------------------------- parsing

namespace {

/// Collects every problem instead of stopping at the first.
class Reader {
 public:
  std::vector<std::string> problems;

  const json* child(const json& obj, const std::string& key, const std::string& where,
                    bool required) {
    if (!obj.is_object()) {
      problems.push_back(where + ": expected an object");
      return nullptr;
    }
    auto it = obj.find(key);
    if (it == obj.end()) {
      if (required) problems.push_back(where + "." + key + ": missing");
      return nullptr;
    }
    return &*it;
  }

  std::optional<double> number(const json& obj, const std::string& key,
                               const std::string& where, bool required) {
    const json* v = child(obj, key, where, required);
    if (!v) return std::nullopt;
    if (!v->is_number()) {
      problems.push_back(where + "." + key + ": expected a number");
      return std::nullopt;
    }
    return v->get<double>();
  }

  std::optional<Vector> vector(const json& v, const std::string& where) {
    if (!v.is_array() || v.empty()) {
      problems.push_back(where + ": expected a non-empty array of numbers");
      return std::nullopt;
    }
    Vector out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) {
        problems.push_back(where + "[" + std::to_string(i) + "]: expected a number");
        return std::nullopt;
      }
      out[static_cast<Eigen::Index>(i)] = v[i].get<double>();
    }
    return out;
  }

  std::optional<Matrix> matrix(const json& v, const std::string& where) {
    if (!v.is_array() || v.empty()) {
      problems.push_back(where + ": expected a non-empty array of rows");
      return std::nullopt;
    }
    std::vector<Vector> rows;
    for (std::size_t i = 0; i < v.size(); ++i) {
      auto r = vector(v[i], where + "[" + std::to_string(i) + "]");
      if (!r) return std::nullopt;
      if (!rows.empty() && r->size() != rows.front().size()) {
        problems.push_back(where + ": rows have different lengths");
        return std::nullopt;
      }
      rows.push_back(*r);
    }
    Matrix out(static_cast<Eigen::Index>(rows.size()), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      out.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    }
    return out;
  }

  CoordinatePath coordinate_path(const json& v, const std::string& where) {
    CoordinatePath path;
    if (!v.is_object()) {
      problems.push_back(where + ": expected an object");
      return path;
    }
    path.drift = number(v, "drift", where, false).value_or(0.0);
    path.offset = number(v, "offset", where, false).value_or(0.0);
    if (const json* terms = child(v, "terms", where, false)) {
      if (!terms->is_array()) {
        problems.push_back(where + ".terms: expected an array");
        return path;
      }
      for (std::size_t i = 0; i < terms->size(); ++i) {
        const std::string w = where + ".terms[" + std::to_string(i) + "]";
        SinusoidTerm t;
        t.amplitude = number((*terms)[i], "amplitude", w, true).value_or(0.0);
        t.frequency = number((*terms)[i], "frequency", w, true).value_or(0.0);
        t.phase = number((*terms)[i], "phase", w, false).value_or(0.0);
        path.terms.push_back(t);
      }
    }
    return path;
  }
};

json vector_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

json matrix_json(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(vector_json(m.row(i).transpose()));
  return out;
}

json coordinate_path_json(const CoordinatePath& p) {
  json out;
  json terms = json::array();
  for (const auto& t : p.terms) {
    terms.push_back({{"amplitude", t.amplitude}, {"frequency", t.frequency}, {"phase", t.phase}});
  }
  out["terms"] = std::move(terms);
  out["drift"] = p.drift;
  out["offset"] = p.offset;
  return out;
}

json field_json(const ScenarioConfig& c) {
  json path;
  if (c.path.coordinates.size() == 1) {
    path = coordinate_path_json(c.path.coordinates.front());
  } else {
    json coords = json::array();
    for (const auto& cp : c.path.coordinates) coords.push_back(coordinate_path_json(cp));
    path["coordinates"] = std::move(coords);
  }
  return {{"Q", matrix_json(c.q)}, {"zeta", vector_json(c.zeta)}, {"p", c.p}, {"path", path}};
}

Formation build_formation(const FormationConfig& fc, Eigen::Index dim) {
  if (fc.preset == "hexagon") {
    if (dim != 2) throw PreconditionError("hexagon formation is two-dimensional");
    return make_hexagon(fc.scale);
  }
  if (fc.preset == "rectangle") {
    if (dim != 2) throw PreconditionError("rectangle formation is two-dimensional");
    return make_rectangle(fc.scale);
  }
  return Formation(fc.agents, dim, fc.edges);
}

}  // namespace

ScenarioConfig parse_config(const std::string& text, const std::string& name) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError({std::string("parse error: ") + e.what()});
  }
  Reader rd;
  ScenarioConfig cfg;
  cfg.name = name;
  if (!root.is_object()) throw ConfigError({"config root must be an object"});

  if (auto it = root.find("name"); it != root.end() && it->is_string()) cfg.name = it->get<std::string>();

  if (const json* m = rd.child(root, "method", "config", true)) {
    const std::string s = m->is_string() ? m->get<std::string>() : "";
    if (s == "composite") cfg.method = Method::kComposite;
    else if (s == "naive") cfg.method = Method::kNaive;
    else if (s == "circular") cfg.method = Method::kCircular;
    else rd.problems.push_back("config.method: expected composite, naive or circular");
  }
  if (auto steps = rd.number(root, "steps", "config", false)) {
    if (*steps < 0 || std::floor(*steps) != *steps) rd.problems.push_back("config.steps: expected a non-negative integer");
    else cfg.steps = static_cast<long>(*steps);
  }
  if (const json* s = rd.child(root, "seed", "config", false)) {
    if (!s->is_number_unsigned()) rd.problems.push_back("config.seed: expected a non-negative integer");
    else cfg.seed = s->get<std::uint64_t>();
  }

  if (const json* f = rd.child(root, "field", "config", true)) {
    if (const json* q = rd.child(*f, "Q", "field", true)) {
      if (auto m = rd.matrix(*q, "field.Q")) cfg.q = *m;
    }
    if (const json* z = rd.child(*f, "zeta", "field", true)) {
      if (auto v = rd.vector(*z, "field.zeta")) cfg.zeta = *v;
    }
    cfg.p = rd.number(*f, "p", "field", true).value_or(0.0);
    if (const json* path = rd.child(*f, "path", "field", false)) {
      if (const json* coords = rd.child(*path, "coordinates", "field.path", false)) {
        if (!coords->is_array() || coords->empty()) {
          rd.problems.push_back("field.path.coordinates: expected a non-empty array");
        } else {
          for (std::size_t i = 0; i < coords->size(); ++i) {
            cfg.path.coordinates.push_back(rd.coordinate_path(
                (*coords)[i], "field.path.coordinates[" + std::to_string(i) + "]"));
          }
        }
      } else {
        cfg.path.coordinates.push_back(rd.coordinate_path(*path, "field.path"));
      }
    }
  }
  if (cfg.path.coordinates.empty()) cfg.path.coordinates.emplace_back();
  const Eigen::Index dim = cfg.zeta.size();

  if (const json* fm = rd.child(root, "formation", "config", false)) {
    if (auto it = fm->find("preset"); it != fm->end() && it->is_string()) {
      cfg.formation.preset = it->get<std::string>();
    }
    cfg.formation.scale = rd.number(*fm, "scale", "formation", false).value_or(3.0);
    if (cfg.formation.preset == "explicit") {
      cfg.formation.agents = static_cast<int>(rd.number(*fm, "agents", "formation", true).value_or(0));
      if (const json* edges = rd.child(*fm, "edges", "formation", true)) {
        if (!edges->is_array()) {
          rd.problems.push_back("formation.edges: expected an array");
        } else {
          for (std::size_t i = 0; i < edges->size(); ++i) {
            const std::string w = "formation.edges[" + std::to_string(i) + "]";
            Edge e;
            e.to = static_cast<int>(rd.number((*edges)[i], "to", w, true).value_or(0));
            e.from = static_cast<int>(rd.number((*edges)[i], "from", w, true).value_or(0));
            if (const json* d = rd.child((*edges)[i], "displacement", w, true)) {
              if (auto v = rd.vector(*d, w + ".displacement")) e.displacement = *v;
            }
            cfg.formation.edges.push_back(std::move(e));
          }
        }
      }
    } else if (cfg.formation.preset != "hexagon" && cfg.formation.preset != "rectangle") {
      rd.problems.push_back("formation.preset: expected hexagon, rectangle or explicit");
    }
  }

  cfg.c_const = rd.number(root, "c_const", "config", false).value_or(0.0);
  if (auto a = rd.number(root, "alpha", "config", false)) cfg.alpha = *a;
  cfg.initial_offset = dim > 0 ? Vector::Constant(dim, 20.0) : Vector();
  if (const json* o = rd.child(root, "initial_offset", "config", false)) {
    if (auto v = rd.vector(*o, "config.initial_offset")) cfg.initial_offset = *v;
  }
  cfg.initial_jitter = rd.number(root, "initial_jitter", "config", false).value_or(0.0);
  if (cfg.initial_jitter < 0) rd.problems.push_back("config.initial_jitter: must be >= 0");
  cfg.noise_bound = rd.number(root, "noise_bound", "config", false).value_or(0.0);
  if (cfg.noise_bound < 0) rd.problems.push_back("config.noise_bound: must be >= 0");

  cfg.operating_box = {Vector::Constant(std::max<Eigen::Index>(dim, 0), -100.0),
                       Vector::Constant(std::max<Eigen::Index>(dim, 0), 100.0)};
  if (const json* box = rd.child(root, "operating_box", "config", false)) {
    if (const json* lo = rd.child(*box, "lower", "operating_box", true)) {
      if (auto v = rd.vector(*lo, "operating_box.lower")) cfg.operating_box.lower = *v;
    }
    if (const json* hi = rd.child(*box, "upper", "operating_box", true)) {
      if (auto v = rd.vector(*hi, "operating_box.upper")) cfg.operating_box.upper = *v;
    }
  }

  bool custom_consensus = false;
  if (const json* c = rd.child(root, "circular", "config", false)) {
    cfg.circular.radius = rd.number(*c, "D", "circular", false).value_or(3.0);
    cfg.circular.omega = rd.number(*c, "omega", "circular", false).value_or(1.0);
    cfg.circular.epsilon = rd.number(*c, "epsilon", "circular", false).value_or(0.5);
    cfg.circular.filter_alpha = rd.number(*c, "alpha", "circular", false).value_or(1.0);
    if (const json* P = rd.child(*c, "P", "circular", false)) {
      if (auto m = rd.matrix(*P, "circular.P")) {
        cfg.circular.consensus = *m;
        custom_consensus = true;
      }
    }
  }

  if (auto it = root.find("rank_policy"); it != root.end()) {
    const std::string s = it->is_string() ? it->get<std::string>() : "";
    if (s == "continue") cfg.rank_policy = RankPolicy::kContinue;
    else if (s == "strict") cfg.rank_policy = RankPolicy::kStrict;
    else rd.problems.push_back("config.rank_policy: expected continue or strict");
  }
  if (auto it = root.find("output_dir"); it != root.end() && it->is_string()) {
    cfg.output_dir = it->get<std::string>();
  }

  if (!rd.problems.empty()) throw ConfigError(rd.problems);

  // Semantic validation against the module preconditions.
  auto check = [&rd](const char* where, auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      rd.problems.push_back(std::string(where) + ": " + e.what());
    }
  };
  if (cfg.q.rows() != dim || cfg.q.cols() != dim) {
    rd.problems.push_back("field.Q: must be " + std::to_string(dim) + "x" + std::to_string(dim));
  }
  if (cfg.path.coordinates.size() > 1 &&
      static_cast<Eigen::Index>(cfg.path.coordinates.size()) != dim) {
    rd.problems.push_back("field.path.coordinates: need one entry per dimension");
  }
  if (cfg.initial_offset.size() != dim) rd.problems.push_back("config.initial_offset: dimension mismatch");
  if (cfg.operating_box.lower.size() != dim || cfg.operating_box.upper.size() != dim) {
    rd.problems.push_back("operating_box: dimension mismatch");
  } else if ((cfg.operating_box.lower.array() > cfg.operating_box.upper.array()).any()) {
    rd.problems.push_back("operating_box: lower exceeds upper");
  }
  if (!rd.problems.empty()) throw ConfigError(rd.problems);

  std::optional<QuadraticField> field;
  check("field", [&] { field.emplace(cfg.field()); });
  std::optional<Formation> formation;
  check("formation", [&] { formation.emplace(build_formation(cfg.formation, dim)); });
  if (field && formation) {
    if (cfg.method == Method::kComposite) {
      check("formation", [&] {
        auto spec = make_formation_spec(*formation, field->lipschitz(), field->pl_constant(),
                                        cfg.c_const);
        if (cfg.alpha && (*cfg.alpha <= 0.0 ||
                          *cfg.alpha > composite_step_limit(field->lipschitz(), spec) * (1 + 1e-12))) {
          throw PreconditionError("alpha exceeds 1/(L_f + L_phi)");
        }
      });
    } else if (cfg.method == Method::kNaive) {
      if (cfg.alpha && (*cfg.alpha <= 0.0 || *cfg.alpha > (1.0 / field->lipschitz()) * (1 + 1e-12))) {
        rd.problems.push_back("config.alpha: exceeds 1/L_f");
      }
    } else {
      if (!custom_consensus) {
        check("circular", [&] { cfg.circular.consensus = ring_consensus_matrix(formation->agents()); });
      }
      check("circular", [&] {
        if (dim != 2) throw DimensionError("circular baseline requires d = 2");
        validate_circular_params(cfg.circular, formation->agents());
      });
    }
  }
  if (!rd.problems.empty()) throw ConfigError(rd.problems);
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot open " + path.string()});
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.stem().string());
}

std::string config_to_json(const ScenarioConfig& c) {
  json root;
  root["name"] = c.name;
  root["method"] = method_name(c.method);
  root["steps"] = c.steps;
  root["seed"] = c.seed;
  root["field"] = field_json(c);
  json fm;
  fm["preset"] = c.formation.preset;
  fm["scale"] = c.formation.scale;
  if (c.formation.preset == "explicit") {
    fm["agents"] = c.formation.agents;
    json edges = json::array();
    for (const auto& e : c.formation.edges) {
      edges.push_back({{"to", e.to}, {"from", e.from}, {"displacement", vector_json(e.displacement)}});
    }
    fm["edges"] = std::move(edges);
  }
  root["formation"] = std::move(fm);
  root["c_const"] = c.c_const;
  if (c.alpha) root["alpha"] = *c.alpha;
  root["initial_offset"] = vector_json(c.initial_offset);
  root["initial_jitter"] = c.initial_jitter;
  root["operating_box"] = {{"lower", vector_json(c.operating_box.lower)},
                           {"upper", vector_json(c.operating_box.upper)}};
  root["noise_bound"] = c.noise_bound;
  json circ{{"D", c.circular.radius}, {"omega", c.circular.omega},
            {"epsilon", c.circular.epsilon}, {"alpha", c.circular.filter_alpha}};
  if (c.circular.consensus.size() > 0) circ["P"] = matrix_json(c.circular.consensus);
  root["circular"] = std::move(circ);
  root["rank_policy"] = c.rank_policy == RankPolicy::kStrict ? "strict" : "continue";
  if (!c.output_dir.empty()) root["output_dir"] = c.output_dir;
  return root.dump(2);
}

// ---------------------------------------------------------------- running

namespace {

AgentRow empty_row(Eigen::Index d) {
  AgentRow r;
  r.x = Vector::Constant(d, kNaN);
  r.value = kNaN;
  r.true_gradient = Vector::Constant(d, kNaN);
  r.gradient_error = kNaN;
  r.error_bound = kNaN;
  r.tracking_error = kNaN;
  r.composite_error = kNaN;
  r.lemma1_bound = kNaN;
  return r;
}

IterationRow empty_iteration(long k) {
  IterationRow row;
  row.k = k;
  row.phi = kNaN;
  row.assumption5_rhs = kNaN;
  row.stacked_error = kNaN;
  row.theorem1_bound = kNaN;
  return row;
}

Positions placed(const Formation& formation, const Vector& centroid) {
  Positions x = formation.ideal_positions();
  x.rowwise() += centroid.transpose();
  return x;
}

long count_box_exits(const Box& box, const Positions& x) {
  long exits = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    if (!box.contains(x.row(i).transpose())) ++exits;
  }
  return exits;
}

void fill_common(AgentRow& r, const QuadraticField& field, long k, const Vector& x,
                 double value) {
  r.x = x;
  r.value = value;
  r.true_gradient = field.gradient(k, x);
  r.tracking_error = tracking_error(x, field, k);
}

SimTrace run_composite(const ScenarioConfig& cfg, const QuadraticField& field) {
  const long horizon = std::max(cfg.steps, 1L);
  const FieldConstants fc = field_constants(field, cfg.operating_box, horizon);
  const FormationSpec spec = make_formation_spec(build_formation(cfg.formation, field.dimension()),
                                                 fc.lipschitz, fc.pl, cfg.c_const);
  const int n = spec.formation.agents();
  const Eigen::Index d = field.dimension();
  const double alpha = cfg.alpha.value_or(composite_step_limit(fc.lipschitz, spec));

  std::vector<CompositeMinimum> minima;
  minima.reserve(static_cast<std::size_t>(cfg.steps + 1));
  double fhat_drift = 0.0;
  for (long k = 0; k <= cfg.steps; ++k) {
    minima.push_back(composite_minimizer(field, spec, k));
    if (k > 0) fhat_drift = std::max(fhat_drift, std::abs(minima[k].value - minima[k - 1].value));
  }

  // The composite function sums n copies of f_k, so its value drift is n eta_0.
  const BoundParams params{alpha, fc.lipschitz, fc.pl, spec.lipschitz, spec.pl,
                           spec.c_const, n * fc.value_drift, fhat_drift};

  SimTrace trace;
  trace.method = Method::kComposite;
  trace.agents = n;
  trace.dim = d;
  trace.constants = {alpha, fc.lipschitz, fc.pl, spec.lipschitz, spec.pl, spec.c_const,
                     spec.phi_star, fc.value_drift, fc.optimal_drift, params.eta0,
                     params.eta_star, lemma2_fhat_star_bound(spec, field, 0), 0.0, 0.0};
  trace.constants.theorem1_limit = theorem1_limit(params, trace.constants.fhat_surrogate);
  trace.constants.theorem1_limit_displayed =
      theorem1_limit_displayed(params, trace.constants.fhat_surrogate);

  SwarmState state{0, placed(spec.formation, start_centroid(cfg))};
  trace.initial = state;
  // Summed per agent, in the same order as the measured stacked error.
  double d0_sq = 0.0;
  for (int i = 0; i < n; ++i) d0_sq += (state.x.row(i) - minima[0].x.row(i)).squaredNorm();
  const double q = discount(alpha, params.mu_prime());
  double fhat_sum = 0.0;

  trace.rows.reserve(static_cast<std::size_t>(cfg.steps));
  for (long k = 0; k < cfg.steps; ++k) {
    CompositeStepResult step = composite_step(state, field, spec, alpha, cfg.rank_policy);
    IterationRow row = empty_iteration(k);
    row.agents.resize(static_cast<std::size_t>(n), empty_row(d));
    double err_sq_sum = 0.0;
    double stacked_err = 0.0;
    for (int i = 0; i < n; ++i) {
      auto& r = row.agents[static_cast<std::size_t>(i)];
      const auto& dir = step.directions[static_cast<std::size_t>(i)];
      const Vector xi = state.x.row(i).transpose();
      fill_common(r, field, k, xi, step.measurements[static_cast<std::size_t>(i)]);
      r.estimate = dir.estimate.g;
      r.gradient_error = (dir.estimate.g - r.true_gradient).norm();
      r.error_bound = dir.estimate.error_bound.value_or(kNaN);
      r.composite_error = 0.5 * (xi - minima[k].x.row(i).transpose()).squaredNorm();
      err_sq_sum += r.gradient_error * r.gradient_error;
      stacked_err += r.composite_error;
    }
    row.phi = potential(spec.formation, state.x, fc.lipschitz, spec.phi_star);
    row.assumption5_rhs = 0.5 * spec.c_const * err_sq_sum;
    row.stacked_error = stacked_err;
    row.theorem1_bound = k == 0 ? 0.5 * d0_sq
                                : theorem1_bound_from_sum(params, d0_sq, fhat_sum, k - 1);
    row.rank_deficient = static_cast<int>(step.rank_deficient.size());
    trace.rank_deficient_events += row.rank_deficient;
    trace.box_exits += count_box_exits(cfg.operating_box, state.x);
    fhat_sum = q * fhat_sum + lemma2_fhat_star_bound(spec, field, k);
    trace.rows.push_back(std::move(row));
    state = std::move(step.next);
  }
  trace.final_state = std::move(state);
  return trace;
}

SimTrace run_naive(const ScenarioConfig& cfg, const QuadraticField& field) {
  const long horizon = std::max(cfg.steps, 1L);
  const FieldConstants fc = field_constants(field, cfg.operating_box, horizon);
  const Formation formation = build_formation(cfg.formation, field.dimension());
  const int n = formation.agents();
  const Eigen::Index d = field.dimension();
  const double alpha = cfg.alpha.value_or(1.0 / fc.lipschitz);
  const BoundParams params{alpha, fc.lipschitz, fc.pl, 0.0, 0.0, 0.0,
                           fc.value_drift, fc.optimal_drift};

  SimTrace trace;
  trace.method = Method::kNaive;
  trace.agents = n;
  trace.dim = d;
  trace.constants.alpha = alpha;
  trace.constants.L_f = fc.lipschitz;
  trace.constants.mu_f = fc.pl;
  trace.constants.field_eta0 = trace.constants.eta0 = fc.value_drift;
  trace.constants.field_eta_star = trace.constants.eta_star = fc.optimal_drift;

  SwarmState state{0, placed(formation, start_centroid(cfg))};
  trace.initial = state;
  NoiseModel noise(cfg.seed, cfg.noise_bound);
  const double q = discount(alpha, fc.pl);
  std::vector<double> d0_sq(static_cast<std::size_t>(n));
  std::vector<double> eps_sum(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    d0_sq[static_cast<std::size_t>(i)] =
        (state.x.row(i).transpose() - field.minimizer(0)).squaredNorm();
  }

  trace.rows.reserve(static_cast<std::size_t>(cfg.steps));
  for (long k = 0; k < cfg.steps; ++k) {
    NaiveStepResult step = naive_step(state, field, alpha, noise);
    IterationRow row = empty_iteration(k);
    row.agents.resize(static_cast<std::size_t>(n), empty_row(d));
    for (int i = 0; i < n; ++i) {
      const auto si = static_cast<std::size_t>(i);
      auto& r = row.agents[si];
      const Vector xi = state.x.row(i).transpose();
      fill_common(r, field, k, xi, field.value(k, xi));
      r.estimate = r.true_gradient + step.noise[si];
      r.gradient_error = step.noise[si].norm();
      r.error_bound = noise.bound();
      r.lemma1_bound = k == 0 ? 0.5 * d0_sq[si]
                              : lemma1_bound_from_sum(params, d0_sq[si], eps_sum[si], k - 1);
      eps_sum[si] = q * eps_sum[si] + r.gradient_error * r.gradient_error;
    }
    trace.box_exits += count_box_exits(cfg.operating_box, state.x);
    trace.rows.push_back(std::move(row));
    state = std::move(step.next);
  }
  trace.final_state = std::move(state);
  return trace;
}

SimTrace run_circular(const ScenarioConfig& cfg, const QuadraticField& field) {
  const Formation formation = build_formation(cfg.formation, field.dimension());
  const int n = formation.agents();
  SimTrace trace;
  trace.method = Method::kCircular;
  trace.agents = n;
  trace.dim = field.dimension();
  trace.constants.L_f = field.lipschitz();
  trace.constants.mu_f = field.pl_constant();

  auto [cstate, state] = circular_init(cfg.circular, start_centroid(cfg), field, n);
  trace.initial = state;
  trace.rows.reserve(static_cast<std::size_t>(cfg.steps));
  for (long k = 0; k < cfg.steps; ++k) {
    CircularStepResult step = circular_step(cfg.circular, cstate, state, field);
    IterationRow row = empty_iteration(k);
    row.agents.resize(static_cast<std::size_t>(n), empty_row(trace.dim));
    for (int i = 0; i < n; ++i) {
      fill_common(row.agents[static_cast<std::size_t>(i)], field, k, state.x.row(i).transpose(),
                  step.measurements[static_cast<std::size_t>(i)]);
    }
    trace.box_exits += count_box_exits(cfg.operating_box, state.x);
    trace.rows.push_back(std::move(row));
    cstate = std::move(step.cstate);
    state = std::move(step.next);
  }
  trace.final_state = std::move(state);
  return trace;
}

}  // namespace

Formation scenario_formation(const ScenarioConfig& config) {
  return build_formation(config.formation, config.zeta.size());
}

Vector start_centroid(const ScenarioConfig& config) {
  Vector start = config.field().centre(0) + config.initial_offset;
  if (config.initial_jitter > 0.0) {
    PortableRng rng(config.seed ^ 0x5DEECE66DULL);
    start += rng.in_ball(config.zeta.size(), config.initial_jitter);
  }
  return start;
}

SimTrace run_scenario(const ScenarioConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  const QuadraticField field = config.field();
  SimTrace trace;
  switch (config.method) {
    case Method::kComposite: trace = run_composite(config, field); break;
    case Method::kNaive: trace = run_naive(config, field); break;
    case Method::kCircular: trace = run_circular(config, field); break;
  }
  trace.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return trace;
}

// ---------------------------------------------------------------- output

namespace {

void append_number(std::string& out, double v) {
  if (std::isnan(v)) return;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

json number_json(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

std::vector<double> row_values(const IterationRow& row, std::size_t agent, Eigen::Index d) {
  const AgentRow& r = row.agents[agent];
  std::vector<double> v;
  v.push_back(static_cast<double>(row.k));
  v.push_back(static_cast<double>(agent));
  for (Eigen::Index j = 0; j < d; ++j) v.push_back(r.x[j]);
  v.push_back(r.value);
  for (Eigen::Index j = 0; j < d; ++j) v.push_back(r.estimate.size() ? r.estimate[j] : kNaN);
  for (Eigen::Index j = 0; j < d; ++j) v.push_back(r.true_gradient[j]);
  v.push_back(r.gradient_error);
  v.push_back(r.error_bound);
  v.push_back(r.tracking_error);
  v.push_back(r.composite_error);
  v.push_back(row.stacked_error);
  v.push_back(row.phi);
  v.push_back(row.assumption5_rhs);
  v.push_back(r.lemma1_bound);
  v.push_back(row.theorem1_bound);
  return v;
}

double mean_over_agents(const IterationRow& row, double AgentRow::*member) {
  double s = 0.0;
  for (const auto& a : row.agents) s += a.*member;
  return s / static_cast<double>(row.agents.size());
}

}  // namespace

std::vector<std::string> trace_columns(Eigen::Index dim) {
  std::vector<std::string> cols{"k", "agent"};
  for (Eigen::Index j = 0; j < dim; ++j) cols.push_back("x" + std::to_string(j));
  cols.push_back("value");
  for (Eigen::Index j = 0; j < dim; ++j) cols.push_back("g" + std::to_string(j));
  for (Eigen::Index j = 0; j < dim; ++j) cols.push_back("grad" + std::to_string(j));
  for (const char* c : {"gradient_error", "error_bound", "tracking_error", "composite_error",
                        "stacked_error", "phi", "assumption5_rhs", "lemma1_bound",
                        "theorem1_bound"}) {
    cols.emplace_back(c);
  }
  return cols;
}

std::string trace_csv(const SimTrace& trace) {
  std::string out = join(trace_columns(trace.dim), ",") + "\n";
  for (const auto& row : trace.rows) {
    for (std::size_t i = 0; i < row.agents.size(); ++i) {
      const auto values = row_values(row, i, trace.dim);
      for (std::size_t c = 0; c < values.size(); ++c) {
        if (c) out += ',';
        if (c < 2) out += std::to_string(static_cast<long>(values[c]));
        else append_number(out, values[c]);
      }
      out += '\n';
    }
  }
  return out;
}

std::string trace_json(const SimTrace& trace) {
  json root;
  root["method"] = method_name(trace.method);
  root["columns"] = trace_columns(trace.dim);
  json rows = json::array();
  for (const auto& row : trace.rows) {
    for (std::size_t i = 0; i < row.agents.size(); ++i) {
      json r = json::array();
      for (double v : row_values(row, i, trace.dim)) r.push_back(number_json(v));
      rows.push_back(std::move(r));
    }
  }
  root["rows"] = std::move(rows);
  return root.dump();
}

TraceStats trace_stats(const SimTrace& trace, const QuadraticField& field) {
  TraceStats s;
  const auto& fx = trace.final_state.x;
  for (Eigen::Index i = 0; i < fx.rows(); ++i) {
    s.final_tracking_error += tracking_error(fx.row(i).transpose(), field, trace.final_state.k);
  }
  if (fx.rows() > 0) s.final_tracking_error /= static_cast<double>(fx.rows());

  const std::size_t total = trace.rows.size();
  if (total == 0) {
    s.steady_tracking_error = s.steady_gradient_error = s.steady_error_bound = kNaN;
    return s;
  }
  const std::size_t window = std::max<std::size_t>(1, total / 5);
  for (std::size_t r = total - window; r < total; ++r) {
    s.steady_tracking_error += mean_over_agents(trace.rows[r], &AgentRow::tracking_error);
    s.steady_gradient_error += mean_over_agents(trace.rows[r], &AgentRow::gradient_error);
    s.steady_error_bound += mean_over_agents(trace.rows[r], &AgentRow::error_bound);
  }
  s.steady_tracking_error /= static_cast<double>(window);
  s.steady_gradient_error /= static_cast<double>(window);
  s.steady_error_bound /= static_cast<double>(window);

  auto violation = [&s](double measured, double bound) {
    if (!std::isnan(measured) && !std::isnan(bound)) {
      s.max_bound_violation = std::max(s.max_bound_violation, measured - bound);
    }
  };
  for (const auto& row : trace.rows) {
    violation(row.stacked_error, row.theorem1_bound);
    for (const auto& a : row.agents) {
      violation(a.gradient_error, a.error_bound);
      violation(a.tracking_error, a.lemma1_bound);
    }
  }
  return s;
}

std::string summary_json(const ScenarioConfig& config, const SimTrace& trace) {
  const TraceStats s = trace_stats(trace, config.field());
  const RunConstants& c = trace.constants;
  json root;
  root["name"] = config.name;
  root["method"] = method_name(trace.method);
  root["seed"] = config.seed;
  root["steps"] = config.steps;
  root["agents"] = trace.agents;
  root["final_tracking_error"] = number_json(s.final_tracking_error);
  root["steady_tracking_error"] = number_json(s.steady_tracking_error);
  root["steady_gradient_error"] = number_json(s.steady_gradient_error);
  root["steady_error_bound"] = number_json(s.steady_error_bound);
  root["max_bound_violation"] = s.max_bound_violation;
  root["box_exits"] = trace.box_exits;
  root["rank_deficient_events"] = trace.rank_deficient_events;
  root["constants"] = {{"alpha", c.alpha}, {"L_f", c.L_f}, {"mu_f", c.mu_f},
                       {"L_phi", c.L_phi}, {"mu_phi", c.mu_phi}, {"c", c.c_const},
                       {"phi_star", c.phi_star}, {"field_eta0", c.field_eta0},
                       {"field_eta_star", c.field_eta_star}, {"eta0", c.eta0},
                       {"eta_star", c.eta_star}, {"fhat_star_surrogate", c.fhat_surrogate},
                       {"theorem1_limit_series", c.theorem1_limit},
                       {"theorem1_limit_displayed", c.theorem1_limit_displayed}};
  root["wall_seconds"] = trace.wall_seconds;
  root["config"] = json::parse(config_to_json(config));
  return root.dump(2);
}

void emit(const ScenarioConfig& config, const SimTrace& trace,
          const std::filesystem::path& dir, TraceFormat format) {
  std::filesystem::create_directories(dir);
  auto write = [](const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("cannot write " + p.string());
    out << text;
    if (!out) throw Error("write failed for " + p.string());
  };
  if (format == TraceFormat::kCsv) write(dir / "trace.csv", trace_csv(trace));
  else write(dir / "trace.json", trace_json(trace));
  write(dir / "summary.json", summary_json(config, trace));
}

Comparison compare(const std::vector<ScenarioConfig>& configs) {
  if (configs.empty()) throw PreconditionError("compare needs at least one config");
  const json reference = field_json(configs.front());
  for (const auto& c : configs) {
    if (field_json(c) != reference) {
      throw PreconditionError("compare: config '" + c.name + "' uses a different field");
    }
  }

  std::vector<std::future<SimTrace>> jobs;
  for (const auto& c : configs) {
    jobs.push_back(std::async(std::launch::async, [&c] { return run_scenario(c); }));
  }
  std::vector<SimTrace> traces;
  for (auto& j : jobs) traces.push_back(j.get());

  const QuadraticField field = configs.front().field();
  Comparison out;
  json summary = json::array();
  std::size_t rows = std::numeric_limits<std::size_t>::max();
  std::vector<std::string> header{"k"};
  for (std::size_t i = 0; i < configs.size(); ++i) {
    out.entries.push_back({configs[i].name, configs[i].method, trace_stats(traces[i], field)});
    const auto& s = out.entries.back().stats;
    summary.push_back({{"name", configs[i].name},
                       {"method", method_name(configs[i].method)},
                       {"steady_tracking_error", number_json(s.steady_tracking_error)},
                       {"steady_gradient_error", number_json(s.steady_gradient_error)},
                       {"steady_error_bound", number_json(s.steady_error_bound)},
                       {"final_tracking_error", number_json(s.final_tracking_error)},
                       {"max_bound_violation", s.max_bound_violation}});
    rows = std::min(rows, traces[i].rows.size());
    header.push_back(configs[i].name + "_tracking_error");
    header.push_back(configs[i].name + "_error_bound");
  }
  out.merged_csv = join(header, ",") + "\n";
  for (std::size_t r = 0; r < rows; ++r) {
    out.merged_csv += std::to_string(r);
    for (const auto& t : traces) {
      out.merged_csv += ',';
      append_number(out.merged_csv, mean_over_agents(t.rows[r], &AgentRow::tracking_error));
      out.merged_csv += ',';
      append_number(out.merged_csv, mean_over_agents(t.rows[r], &AgentRow::error_bound));
    }
    out.merged_csv += '\n';
  }
  out.summary_json = json{{"scenarios", summary}}.dump(2);
  return out;
}

}  // namespace swarmseek
