#pragma once

#include <string>

#include "ssr/reconstruct.hpp"
#include "ssr/scenario.hpp"

namespace ssr {

enum class Format { Human, Machine };

struct RunOptions {
  /// Wall-clock timings always appear in the human table; the machine
  /// document carries them only on request so that it stays byte-identical
  /// across runs.
  bool machine_timings = false;
};

/// Exit codes shared by the library front ends.
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitAmbiguous = 2, kExitInfeasible = 3 };

struct RunReport {
  int exit_code = kExitOk;
  std::string human;
  std::string machine;  // flat JSON object, floats with 12 significant digits

  const std::string& render(Format f) const { return f == Format::Human ? human : machine; }
};

int exit_code_for(Outcome o) noexcept;

/// Sparse observability sweep: s_max, the lower bound per s, and the SESVS
/// guarantee table for the scenario's s.
RunReport run_audit(const ScenarioConfig& config, const RunOptions& options = {});

/// Simulates the scenario and runs the configured method(s). Exit code is
/// the worst over the methods that could run; 1 if none could.
RunReport run_reconstruct(const ScenarioConfig& config, const RunOptions& options = {});

/// Synthesizes a defeat certificate against `target` for the scenario's
/// attacked set and replays it through the reconstructor. Exit code 0 when a
/// certificate is found, 3 when none exists.
RunReport run_attack_synth(const ScenarioConfig& config, Method target, const RunOptions& options = {});

}  // namespace ssr
