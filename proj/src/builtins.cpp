#include "ssr/builtins.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace ssr {

namespace {

LinearSystem small_plant() {
  Matrix a(2, 2);
  a << 1, 1,
       0, 1;
  Matrix c(3, 2);
  c << 1, 2,
       1, 0,
       1, 1;
  return LinearSystem::autonomous(a, c);
}

LinearSystem fourdim() {
  Matrix a(4, 4);
  a << 2.3, -0.6, 3.8, 0.4,
       3.2, -1.6, 0.7, 0.4,
       1.7, 2.8, 5.2, 4.3,
       -3.1, 2.4, 3.7, 4.8;
  Matrix b = Matrix::Ones(4, 1);
  Matrix c(6, 4);
  c << 1, 0, 0, 1,
       1, 0, 1, 0,
       1, 1, 0, 0,
       0, 1, 1, 0,
       0, 1, 0, 1,
       0, 0, 1, 1;
  return {a, b, c};
}

LinearSystem three_inertia() {
  const double k1 = 1.38, k2 = 1.38;
  const double t = 0.005;
  const double j1 = 0.01, j2 = 0.02, j3 = 0.03;
  const double b1 = 0.006, b2 = 0.006, b3 = 0.006;

  // State: angle and angular velocity of each of the three inertias.
  Matrix a = Matrix::Zero(6, 6);
  a(0, 0) = 1;  a(0, 1) = t;
  a(1, 0) = -k1 * t / j1;  a(1, 1) = 1 - b1 * t / j1;  a(1, 2) = k1 * t / j1;
  a(2, 2) = 1;  a(2, 3) = t;
  a(3, 0) = k1 * t / j2;  a(3, 2) = -(k1 + k2) * t / j2;  a(3, 3) = 1 - b2 * t / j2;  a(3, 4) = k2 * t / j2;
  a(4, 4) = 1;  a(4, 5) = t;
  a(5, 2) = k2 * t / j3;  a(5, 4) = -k2 * t / j3;  a(5, 5) = 1 - b3 * t / j3;

  Matrix b = Matrix::Zero(6, 1);
  b(1, 0) = t / j1;

  Matrix c(7, 6);
  c << 1, 0, 0, 0, 0, 0,
       0, 0, 1, 0, 0, 0,
       0, 0, 0, 0, 1, 0,
       1, 0, -1, 0, 0, 0,
       1, 0, 0, 0, -1, 0,
       1, 0, 1, 0, -1, 0,
       1, 0, -1, 0, 1, 0;
  return {a, b, c};
}

}  // namespace

Builtin builtin(std::string_view name) {
  if (name == "example1" || name == "example2" || name == "example3")
    return {std::string(name), small_plant(), std::nullopt};
  if (name == "fourdim") return {"fourdim", fourdim(), "3.6"};
  if (name == "three_inertia") return {"three_inertia", three_inertia(), "9.5 + 0.1*sin(k)"};
  throw ConfigError(fmt::format("unknown builtin system '{}' (known: {})", name, fmt::join(builtin_names(), ", ")));
}

std::vector<std::string> builtin_names() { return {"example1", "example2", "example3", "fourdim", "three_inertia"}; }

}  // namespace ssr
