#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "bornopp/bornopp.hpp"
#include "bornopp/harness.hpp"

namespace fs = std::filesystem;
using namespace bornopp;
using namespace bornopp::harness;

namespace {

void print_criteria(const std::vector<SuiteCriterion>& cs) {
  for (const auto& c : cs)
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.id << "  " << c.description << "  [" << c.detail << "]\n";
}

int cmd_run(const std::string& config_path, const std::string& out_override) {
  ExperimentConfig c = load_config(config_path);
  ScanResult r = eps_scan(c);
  const fs::path dir = out_override.empty() ? fs::path(output_directory(c)) : fs::path(out_override);
  for (const auto& p : r.points) {
    std::cout << "eps " << p.epsilon << "  t " << p.t << "  ";
    if (p.ok) std::cout << "error " << p.error;
    else std::cout << "error n/a (" << p.message << ")";
    if (p.logged) std::cout << "  [logged only]";
    std::cout << "\n";
  }
  for (const auto& f : r.fits) {
    std::cout << "t " << f.t << ": ";
    if (f.fit.reported) std::cout << "slope " << f.fit.slope;
    else std::cout << "slope not reported";
    std::cout << " (residual " << f.fit.residual << (f.fit.dropped_largest ? ", largest eps dropped" : "") << ")\n";
  }
  for (const auto& k : r.criteria)
    std::cout << (k.passed ? "PASS " : "FAIL ") << k.description << "  [" << k.detail << "]\n";
  for (const auto& p : write_outputs(r, dir)) std::cout << "wrote " << p.string() << "\n";
  return r.passed ? 0 : 1;
}

int cmd_suite(const std::string& name, std::uint64_t seed, int workers, const std::string& out_override,
              const std::string& write_configs) {
  if (!write_configs.empty()) {
    std::vector<ExperimentConfig> cs = name == "all" ? all_builtin_configs() : suite_configs(name);
    for (const auto& c : cs) {
      const fs::path p = fs::path(write_configs) / (c.name + ".json");
      write_text(p, json_text(to_json(c)));
      std::cout << "wrote " << p.string() << "\n";
    }
    return 0;
  }
  SuiteReport r = run_suite(name, {seed, workers});
  print_criteria(r.criteria);
  const fs::path dir = out_override.empty()
                           ? fs::path(std::getenv("BORNOPP_OUTPUT_DIR") ? std::getenv("BORNOPP_OUTPUT_DIR") : "results")
                           : fs::path(out_override);
  const fs::path report = dir / ("suite_" + name + ".json");
  write_text(report, json_text(to_json(r)));
  for (const auto& s : r.scans) {
    emit_report(s, dir / (s.config.stem() + ".csv"), ReportFormat::csv);
  }
  std::cout << (r.passed ? "suite passed" : "suite FAILED") << "; report " << report.string() << "\n";
  return r.passed ? 0 : 1;
}

int cmd_list_models() {
  for (const auto& t : models::available_tags()) std::cout << t << "  " << models::describe(t) << "\n";
  return 0;
}

int cmd_hitting_times(const std::string& config_path) {
  ExperimentConfig c = load_config(config_path);
  if (c.gamma.empty()) throw precondition_error("hitting-times: the config defines no phase-space region gamma");
  HittingTimes h = config_hitting_times(c);
  std::cout << "T_- " << h.t_minus << (h.minus_capped ? " (capped)" : "") << "\n";
  std::cout << "T_+ " << h.t_plus << (h.plus_capped ? " (capped)" : "") << "\n";
  std::cout << "cloud points " << h.cloud_size << "\n";
  return 0;
}

int cmd_report(const std::string& path, const std::string& format, const std::string& output) {
  ScanResult r = read_report(path);
  const ReportFormat f = report_format_from_string(format);
  const std::string text = f == ReportFormat::json ? json_text(to_json(r)) : csv_text(r);
  if (output.empty()) std::cout << text;
  else write_text(output, text);
  return r.passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Born-Oppenheimer numerical lab: epsilon scans, acceptance suites and reports"};
  app.require_subcommand(1);

  std::string config, out, name, format = "json", write_configs, output;
  std::uint64_t seed = 1;
  int workers = 1;

  auto* run = app.add_subcommand("run", "Run the epsilon scan described by a JSON config");
  run->add_option("config", config, "Path to the experiment config")->required()->check(CLI::ExistingFile);
  run->add_option("-o,--output", out, "Output directory (overrides config and BORNOPP_OUTPUT_DIR)");

  auto* suite = app.add_subcommand("suite", "Run a named acceptance suite");
  suite->add_option("name", name, "Suite id: " + suite_list())->required();
  suite->add_option("--seed", seed, "Random seed for sampled checks");
  suite->add_option("--workers", workers, "Worker threads per scan")->check(CLI::PositiveNumber);
  suite->add_option("-o,--output", out, "Output directory");
  suite->add_option("--write-configs", write_configs, "Write the suite's built-in configs to this directory and exit");

  app.add_subcommand("list-models", "List electronic model tags");

  auto* hit = app.add_subcommand("hitting-times", "Print T_- and T_+ for a config's Gamma");
  hit->add_option("config", config, "Path to the experiment config")->required()->check(CLI::ExistingFile);

  auto* rep = app.add_subcommand("report", "Re-emit a JSON scan report as csv or json");
  rep->add_option("result", config, "Path to a JSON scan report")->required()->check(CLI::ExistingFile);
  rep->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  rep->add_option("-o,--output", output, "Write to this file instead of stdout");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(config, out);
    if (*suite) return cmd_suite(name, seed, workers, out, write_configs);
    if (app.got_subcommand("list-models")) return cmd_list_models();
    if (*hit) return cmd_hitting_times(config);
    if (*rep) return cmd_report(config, format, output);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
