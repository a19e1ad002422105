// Command-line driver: run, compare and verify scenarios.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "swarmseek/scenario.hpp"

namespace fs = std::filesystem;
using namespace swarmseek;

namespace {

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

int run_command(const std::string& config_path, std::optional<long> steps,
                std::optional<std::uint64_t> seed, std::string out_dir,
                const std::string& format) {
  ScenarioConfig cfg = load_config(config_path);
  if (steps) cfg.steps = *steps;
  if (seed) cfg.seed = *seed;
  if (out_dir.empty()) out_dir = cfg.output_dir.empty() ? "out/" + cfg.name : cfg.output_dir;
  const SimTrace trace = run_scenario(cfg);
  emit(cfg, trace, out_dir, format == "json" ? TraceFormat::kJson : TraceFormat::kCsv);
  const TraceStats s = trace_stats(trace, cfg.field());
  std::printf("%s (%s): %ld steps, final tracking error %.6g, steady %.6g -> %s\n",
              cfg.name.c_str(), method_name(cfg.method), cfg.steps, s.final_tracking_error,
              s.steady_tracking_error, out_dir.c_str());
  return 0;
}

int compare_command(const std::vector<std::string>& paths, const std::string& out_dir) {
  std::vector<ScenarioConfig> configs;
  for (const auto& p : paths) configs.push_back(load_config(p));
  const Comparison cmp = compare(configs);
  fs::create_directories(out_dir);
  write_file(fs::path(out_dir) / "comparison.csv", cmp.merged_csv);
  write_file(fs::path(out_dir) / "comparison.json", cmp.summary_json);
  for (const auto& e : cmp.entries) {
    std::printf("%-24s %-10s steady tracking %.6g  steady error bound %.6g\n", e.name.c_str(),
                method_name(e.method), e.stats.steady_tracking_error,
                e.stats.steady_error_bound);
  }
  return 0;
}

int verify_command(const std::string& config_path, long transient_end) {
  const ScenarioConfig cfg = load_config(config_path);
  VerifyOptions options;
  options.transient_end = transient_end;
  bool ok = true;
  for (const auto& c : verify_scenario(cfg, options)) {
    std::printf("[%s] %s: %s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
    ok = ok && c.passed;
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cooperative source seeking with certified gradient estimates"};
  app.require_subcommand(1);

  std::string run_config;
  std::optional<long> run_steps;
  std::optional<std::uint64_t> run_seed;
  std::string run_out;
  std::string run_format = "csv";
  auto* run = app.add_subcommand("run", "Simulate one scenario and write its trace");
  run->add_option("config", run_config, "Scenario file")->required();
  run->add_option("--steps", run_steps, "Override the number of iterations");
  run->add_option("--seed", run_seed, "Override the seed");
  run->add_option("--out", run_out, "Output directory");
  run->add_option("--format", run_format, "Trace format")
      ->check(CLI::IsMember({"csv", "json"}));

  std::vector<std::string> cmp_configs;
  std::string cmp_out;
  auto* cmp = app.add_subcommand("compare", "Run several scenarios on the same field");
  cmp->add_option("configs", cmp_configs, "Scenario files")->required();
  cmp->add_option("--out", cmp_out, "Output directory")->required();

  std::string verify_config;
  long transient_end = -1;
  auto* verify = app.add_subcommand("verify", "Check a scenario's trace against its guarantees");
  verify->add_option("config", verify_config, "Scenario file")->required();
  verify->add_option("--transient-end", transient_end,
                     "First iteration of the post-transient window (default: first k "
                     "with phi < 2 phi*)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return run_command(run_config, run_steps, run_seed, run_out, run_format);
    if (*cmp) return compare_command(cmp_configs, cmp_out);
    if (*verify) return verify_command(verify_config, transient_end);
  } catch (const ConfigError& e) {
    std::cerr << "config error:\n";
    for (const auto& p : e.problems()) std::cerr << "  " << p << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
