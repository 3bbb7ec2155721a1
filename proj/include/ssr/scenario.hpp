#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ssr/expression.hpp"
#include "ssr/linsys.hpp"
#include "ssr/reconstruct.hpp"

namespace ssr {

enum class MethodChoice { Known, Sesvs, Sesgc, Both };

const char* to_string(MethodChoice m) noexcept;

/// A fully resolved scenario: plant, initial state, input, attack and the
/// reconstruction settings, loaded from a YAML file.
///
///   system: fourdim                  # builtin name, or {A: [[..]], B: [[..]], C: [[..]]}
///   x0: [25.2, -16.2, 123.3, 4.9]
///   input: 3.6                       # number, expression over k, {channels: [..]} or {steps: [[..], ..]}
///   attack:
///     gamma: [1, 3, 4, 6]
///     signals: {1: "2000 + k/(k+1)", 3: "3000 + k/(k+2)"}
///   horizon: 12
///   s: 4                             # defaults to |gamma|
///   start: 0
///   method: both                     # known | sesvs | sesgc | both
///   sesvs: {tau: 1, r: 4, fallback: true}
///   sesgc: {r: 2, rounds: 3, fallback: false}   # rounds: certified rounds for attack synthesis
///   overrides: {r: 4, eq_tol: 1e-6, eq_tol_rel: 1e-8, residual_tol: 0.1,
///               max_rounds: 9, fallback: true, strict_observability: true}
struct ScenarioConfig {
  std::string name;
  std::optional<std::string> builtin;
  LinearSystem system{Matrix::Identity(1, 1), Matrix(1, 0), Matrix::Identity(1, 1)};
  Vector x0;

  /// One expression per input channel, or explicit per-step vectors.
  std::vector<Expression> input_channels;
  std::vector<Vector> input_steps;

  SensorSet gamma;
  std::map<std::size_t, Expression> signals;

  std::size_t horizon = 0;
  std::size_t s = 0;
  std::size_t start = 0;
  MethodChoice method = MethodChoice::Both;

  std::size_t tau = 1;
  std::optional<std::size_t> sesvs_window;
  std::optional<std::size_t> sesgc_window;
  std::size_t synth_rounds = 1;
  std::optional<bool> sesvs_fallback;  // per-method override of `fallback`
  std::optional<bool> sesgc_fallback;

  std::optional<std::size_t> window_override;
  Tolerance tolerance;
  double residual_tol = 0.1;
  std::optional<std::size_t> max_rounds;
  bool fallback = true;
  bool strict_observability = true;

  std::vector<Vector> inputs() const;  // u_0 .. u_{horizon-1}
  AttackScenario attack() const;
  Trajectory simulate() const;

  SesvsOptions sesvs_options() const;
  SesgcOptions sesgc_options() const;
  std::optional<std::size_t> known_window() const { return window_override; }
};

/// `origin` prefixes diagnostics, which read "origin:line:column: field: message".
ScenarioConfig parse_scenario(std::string_view yaml, std::string_view origin = "<string>");
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// YAML that parses back to an equivalent scenario. Doubles use 17
/// significant digits; builtin plants are written by name.
std::string emit_resolved(const ScenarioConfig& config);

}  // namespace ssr
