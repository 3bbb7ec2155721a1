#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "ssr/types.hpp"

namespace ssr {

/// Discrete-time LTI plant x_{k+1} = A x_k + B u_k, y_k = C x_k + a_k.
///
/// p = 0 (autonomous plant) is represented by an n×0 input matrix.
class LinearSystem {
 public:
  LinearSystem(Matrix a, Matrix b, Matrix c);
  static LinearSystem autonomous(Matrix a, Matrix c);

  std::size_t n() const noexcept { return static_cast<std::size_t>(a_.rows()); }
  std::size_t p() const noexcept { return static_cast<std::size_t>(b_.cols()); }
  std::size_t q() const noexcept { return static_cast<std::size_t>(c_.rows()); }

  const Matrix& a() const noexcept { return a_; }
  const Matrix& b() const noexcept { return b_; }
  const Matrix& c() const noexcept { return c_; }

 private:
  Matrix a_;
  Matrix b_;
  Matrix c_;
};

/// Attack value a_{k,i} for step k and 1-based sensor i.
using AttackSignal = std::function<double(std::size_t step, std::size_t sensor)>;

/// Fixed attacked-sensor set plus the signal injected on it. Off the support
/// the injected value is exactly zero regardless of what the signal returns.
class AttackScenario {
 public:
  AttackScenario() = default;
  AttackScenario(SensorSet gamma, AttackSignal signal);

  static AttackScenario none() { return {}; }

  const SensorSet& gamma() const noexcept { return gamma_; }
  std::size_t sparsity() const noexcept { return gamma_.size(); }

  double value(std::size_t step, std::size_t sensor) const;
  Vector at(std::size_t step, std::size_t q) const;

 private:
  SensorSet gamma_;
  AttackSignal signal_;
};

/// Read-only view of what a reconstructor is allowed to see: the measured
/// outputs y_0..y_K and the applied inputs u_0..u_{K-1}.
struct Measurements {
  std::span<const Vector> outputs;
  std::span<const Vector> inputs;

  std::size_t last_step() const noexcept { return outputs.empty() ? 0 : outputs.size() - 1; }
};

struct Trajectory {
  std::vector<Vector> states;            // x_0 .. x_K
  std::vector<Vector> inputs;            // u_0 .. u_{K-1}
  std::vector<Vector> clean_outputs;     // C x_k
  std::vector<Vector> measured_outputs;  // C x_k + a_k

  Measurements measurements() const noexcept { return {measured_outputs, inputs}; }
};

/// Runs the recurrence for `steps` steps, producing K+1 states and outputs.
/// For p = 0 `inputs` may be empty.
Trajectory simulate(const LinearSystem& sys, const Vector& x0, std::span<const Vector> inputs,
                    const AttackScenario& attack, std::size_t steps);

Vector inject_attack(const Vector& clean, const AttackScenario& attack, std::size_t step);

}  // namespace ssr
