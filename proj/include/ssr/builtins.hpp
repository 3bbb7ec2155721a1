#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ssr/linsys.hpp"

namespace ssr {

/// Named plants with their published parameter values.
///
///   example1, example2, example3  A = [1 1; 0 1], C = [1 2; 1 0; 1 1], u = 0
///   fourdim                       four states, six sensors, u = 3.6
///   three_inertia                 three-inertia drive, T = 0.005, T_m = 9.5 + 0.1 sin k
struct Builtin {
  std::string name;
  LinearSystem system;
  std::optional<std::string> input;  // default input expression over k, absent when p = 0
};

/// Throws ConfigError for an unknown name.
Builtin builtin(std::string_view name);
std::vector<std::string> builtin_names();

}  // namespace ssr
