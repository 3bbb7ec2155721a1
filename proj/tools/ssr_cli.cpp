// Command-line front end over the C interface.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ssr/ssr.h"

namespace {

struct Settings {
  std::string config;
  std::optional<std::size_t> window;
  std::optional<double> eq_tol;
  std::optional<double> residual_tol;
  std::optional<std::size_t> max_rounds;
  bool no_fallback = false;
  std::string format = "human";
  std::string out;
  bool timings = false;
  std::string target;
};

int report_error(const char* context) {
  std::cerr << "ssr: " << context << ": " << ssr_last_error() << "\n";
  return 1;
}

using ScenarioPtr = std::unique_ptr<ssr_scenario, decltype(&ssr_scenario_destroy)>;
using ReportPtr = std::unique_ptr<ssr_report, decltype(&ssr_report_destroy)>;

int run(const std::string& verb, const Settings& s) {
  ssr_scenario* raw = nullptr;
  if (ssr_scenario_load_file(s.config.c_str(), &raw) != SSR_OK) return report_error("config");
  ScenarioPtr scenario(raw, ssr_scenario_destroy);

  if (s.window && ssr_scenario_set_window(scenario.get(), *s.window) != SSR_OK) return report_error("--r");
  if (s.eq_tol && ssr_scenario_set_eq_tol(scenario.get(), *s.eq_tol) != SSR_OK) return report_error("--eq-tol");
  if (s.residual_tol && ssr_scenario_set_residual_tol(scenario.get(), *s.residual_tol) != SSR_OK)
    return report_error("--residual-tol");
  if (s.max_rounds && ssr_scenario_set_max_rounds(scenario.get(), *s.max_rounds) != SSR_OK)
    return report_error("--max-rounds");
  if (s.no_fallback) ssr_scenario_set_fallback(scenario.get(), 0);

  ssr_report* rep_raw = nullptr;
  ssr_status st = SSR_OK;
  if (verb == "audit")
    st = ssr_run_audit(scenario.get(), s.timings, &rep_raw);
  else if (verb == "reconstruct")
    st = ssr_run_reconstruct(scenario.get(), s.timings, &rep_raw);
  else
    st = ssr_run_attack_synth(scenario.get(), s.target == "sesgc" ? SSR_TARGET_SESGC : SSR_TARGET_SESVS, s.timings,
                              &rep_raw);
  if (st != SSR_OK) return report_error(verb.c_str());
  ReportPtr report(rep_raw, ssr_report_destroy);

  char* text = nullptr;
  if (ssr_report_render(report.get(), s.format == "machine" ? SSR_FORMAT_MACHINE : SSR_FORMAT_HUMAN, &text) != SSR_OK)
    return report_error("render");
  std::unique_ptr<char, decltype(&ssr_string_free)> owned(text, ssr_string_free);

  if (s.out.empty()) {
    std::fputs(text, stdout);
  } else {
    std::ofstream file(s.out, std::ios::binary);
    file << text;
    if (!file) {
      std::cerr << "ssr: cannot write " << s.out << "\n";
      return 1;
    }
  }
  return ssr_report_exit_code(report.get());
}

void add_common(CLI::App* cmd, Settings& s) {
  cmd->add_option("config", s.config, "scenario file (YAML)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--r", s.window, "window length, overrides the scenario")->check(CLI::PositiveNumber);
  cmd->add_option("--eq-tol", s.eq_tol, "absolute tolerance for equal estimates")->check(CLI::NonNegativeNumber);
  cmd->add_option("--residual-tol", s.residual_tol, "SESGC dynamics residual tolerance (scenario default 0.1)")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--max-rounds", s.max_rounds, "SESGC round limit");
  cmd->add_flag("--no-fallback", s.no_fallback, "keep the window fixed when hypotheses are rank-deficient");
  cmd->add_option("--format", s.format, "report format")->check(CLI::IsMember({"human", "machine"}));
  cmd->add_option("--out", s.out, "write the report here instead of stdout");
  cmd->add_flag("--timings", s.timings, "include wall-clock timings in machine output");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Secure state reconstruction under sparse sensor attacks"};
  app.require_subcommand(1);
  Settings settings;

  auto* audit = app.add_subcommand("audit", "sparse observability audit");
  add_common(audit, settings);
  auto* reconstruct = app.add_subcommand("reconstruct", "simulate the scenario and reconstruct the state");
  add_common(reconstruct, settings);
  auto* synth = app.add_subcommand("attack-synth", "synthesize an attack that defeats a reconstructor");
  add_common(synth, settings);
  synth->add_option("--target", settings.target, "reconstructor to defeat")
      ->required()
      ->check(CLI::IsMember({"sesvs", "sesgc"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  const std::string verb = app.get_subcommands().front()->get_name();
  return run(verb, settings);
}
