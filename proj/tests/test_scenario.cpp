#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "swarmseek/scenario.hpp"

using namespace swarmseek;
namespace fs = std::filesystem;

namespace {

fs::path config_path(const char* name) { return fs::path(SWARMSEEK_CONFIG_DIR) / name; }

const char* kSmall = R"({
  "name": "small",
  "method": "composite",
  "steps": 40,
  "seed": 3,
  "field": {"Q": [[2.66, -0.36], [-0.35, 1.74]], "zeta": [-1.28, 4.66], "p": 6.26,
            "path": {"terms": [{"amplitude": 10, "frequency": 0.0141}], "drift": 0.01}},
  "formation": {"preset": "rectangle", "scale": 2},
  "initial_jitter": 1.5,
  "operating_box": {"lower": [-40, -40], "upper": [60, 60]}
})";

std::string read(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> problems_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.problems();
  }
  return {};
}

bool mentions(const std::vector<std::string>& problems, const std::string& what) {
  return std::any_of(problems.begin(), problems.end(),
                     [&](const std::string& p) { return p.find(what) != std::string::npos; });
}

}  // namespace

TEST_CASE("bundled configs load") {
  const auto hex = load_config(config_path("hexagon_paper.cfg"));
  CHECK(hex.method == Method::kComposite);
  CHECK(hex.steps == 3000);
  CHECK(hex.circular.radius == 3.0);
  CHECK(hex.circular.omega == 1.0);
  CHECK(hex.circular.epsilon == 0.5);
  CHECK(hex.circular.filter_alpha == 1.0);
  CHECK(hex.circular.consensus.rows() == 6);
  CHECK(hex.circular.consensus(0, 5) == 0.25);
  CHECK(hex.circular.consensus(2, 2) == 0.5);
  CHECK(hex.initial_offset[0] == 20.0);
  CHECK(hex.p == 6.26);
  for (const char* name : {"rectangle_paper.cfg", "circular_paper.cfg", "static_field.cfg",
                           "circular_tuned.cfg", "naive_noisy.cfg"}) {
    CHECK_NOTHROW(load_config(config_path(name)));
  }
}

TEST_CASE("config validation lists every problem") {
  auto problems = problems_of(R"({"method": "composite", "field": {"zeta": [1, 2], "p": 0}})");
  CHECK(mentions(problems, "field.Q: missing"));

  problems = problems_of(R"({"method": "sideways", "steps": -1,
                             "field": {"Q": [[1, 0], [0, 1]], "zeta": [0, 0], "p": 0}})");
  CHECK(mentions(problems, "config.method"));
  CHECK(mentions(problems, "config.steps"));

  problems = problems_of(R"({"method": "composite",
      "field": {"Q": [[1, 0], [0, 1]], "zeta": [0, 0], "p": 0},
      "formation": {"preset": "explicit", "agents": 3, "edges": [
        {"to": 0, "from": 1, "displacement": [-1, 0]},
        {"to": 1, "from": 0, "displacement": [1, 0]},
        {"to": 1, "from": 2, "displacement": [0, -1]}]}})");
  CHECK(mentions(problems, "symmetric"));

  problems = problems_of(R"({"method": "composite",
      "field": {"Q": [[1, 0], [0, -1]], "zeta": [0, 0], "p": 0}})");
  CHECK(mentions(problems, "positive definite"));

  problems = problems_of(R"({"method": "composite", "alpha": 5,
      "field": {"Q": [[1, 0], [0, 1]], "zeta": [0, 0], "p": 0}})");
  CHECK(mentions(problems, "alpha"));

  CHECK_THROWS_AS(parse_config("{ not json"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/x.cfg"), ConfigError);
}

TEST_CASE("config echo reproduces the run") {
  const auto cfg = parse_config(kSmall);
  const auto again = parse_config(config_to_json(cfg));
  CHECK(config_to_json(again) == config_to_json(cfg));
  CHECK(trace_csv(run_scenario(cfg)) == trace_csv(run_scenario(again)));
}

TEST_CASE("trace layout") {
  auto cfg = parse_config(kSmall);
  const auto trace = run_scenario(cfg);
  CHECK(trace.rows.size() == 40);
  const std::string csv = trace_csv(trace);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 40 * 6);
  std::string header;
  for (const auto& c : trace_columns(2)) header += (header.empty() ? "" : ",") + c;
  CHECK(csv.rfind(header + "\n", 0) == 0);
  CHECK(trace.final_state.k == 40);

  cfg.steps = 0;
  const auto empty = run_scenario(cfg);
  CHECK(empty.rows.empty());
  CHECK(trace_csv(empty) == header + "\n");
  CHECK(empty.final_state.x == empty.initial.x);
}

TEST_CASE("bounds dominate their measurements in short runs") {
  const auto trace = run_scenario(parse_config(kSmall));
  for (const auto& row : trace.rows) {
    CHECK(row.stacked_error <= row.theorem1_bound);
    for (const auto& a : row.agents) CHECK(a.gradient_error <= a.error_bound);
  }
  const auto stats = trace_stats(trace, parse_config(kSmall).field());
  CHECK(stats.max_bound_violation == 0.0);

  const auto naive = load_config(config_path("naive_noisy.cfg"));
  const auto nt = run_scenario(naive);
  for (const auto& row : nt.rows) {
    for (const auto& a : row.agents) {
      CHECK(a.tracking_error <= a.lemma1_bound);
      CHECK(a.gradient_error <= naive.noise_bound);
    }
  }
}

TEST_CASE("emit writes trace and summary") {
  const auto cfg = parse_config(kSmall);
  const auto trace = run_scenario(cfg);
  const fs::path dir = fs::temp_directory_path() / "swarmseek_emit_test";
  fs::remove_all(dir);
  emit(cfg, trace, dir, TraceFormat::kCsv);
  CHECK(read(dir / "trace.csv") == trace_csv(trace));
  const std::string summary = read(dir / "summary.json");
  CHECK(summary.find("\"seed\": 3") != std::string::npos);
  CHECK(summary.find("\"max_bound_violation\"") != std::string::npos);
  emit(cfg, trace, dir, TraceFormat::kJson);
  CHECK(read(dir / "trace.json").find("\"columns\"") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("compare") {
  const auto a = parse_config(kSmall);
  auto b = a;
  b.name = "twin";
  const auto cmp = compare({a, b});
  REQUIRE(cmp.entries.size() == 2);
  CHECK(cmp.entries[0].stats.steady_tracking_error == cmp.entries[1].stats.steady_tracking_error);
  std::istringstream lines(cmp.merged_csv);
  std::string header, row;
  std::getline(lines, header);
  CHECK(header == "k,small_tracking_error,small_error_bound,twin_tracking_error,twin_error_bound");
  while (std::getline(lines, row)) {
    const auto first = row.find(',');
    const std::string rest = row.substr(first + 1);
    const auto mid = rest.find(',', rest.find(',') + 1);
    CHECK(rest.substr(0, mid) == rest.substr(mid + 1));
  }

  auto other = a;
  other.p = 1.0;
  CHECK_THROWS_AS(compare({a, other}), PreconditionError);
}

TEST_CASE("verify on a short scenario") {
  const auto checks = verify_scenario(parse_config(kSmall));
  for (const auto& c : checks) {
    INFO(c.name << ": " << c.detail);
    if (c.name != "error_bound_factor") CHECK(c.passed);
  }
}
