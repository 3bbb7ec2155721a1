#include "ssr/linsys.hpp"

#include <fmt/format.h>

namespace ssr {

namespace {

void require_finite(const Matrix& m, const char* name) {
  if (!m.allFinite()) throw Error(ErrorCode::InvalidArgument, fmt::format("matrix {} has non-finite entries", name));
}

}  // namespace

LinearSystem::LinearSystem(Matrix a, Matrix b, Matrix c) : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)) {
  if (a_.rows() < 1 || a_.rows() != a_.cols())
    throw DimensionError(fmt::format("A must be square and non-empty, got {}x{}", a_.rows(), a_.cols()));
  if (c_.rows() < 1 || c_.cols() != a_.rows())
    throw DimensionError(fmt::format("C must be q x {} with q >= 1, got {}x{}", a_.rows(), c_.rows(), c_.cols()));
  if (b_.size() == 0) b_.resize(a_.rows(), 0);
  if (b_.rows() != a_.rows())
    throw DimensionError(fmt::format("B must have {} rows, got {}", a_.rows(), b_.rows()));
  require_finite(a_, "A");
  require_finite(b_, "B");
  require_finite(c_, "C");
}

LinearSystem LinearSystem::autonomous(Matrix a, Matrix c) {
  const auto n = a.rows();
  return LinearSystem(std::move(a), Matrix(n, 0), std::move(c));
}

AttackScenario::AttackScenario(SensorSet gamma, AttackSignal signal)
    : gamma_(std::move(gamma)), signal_(std::move(signal)) {}

double AttackScenario::value(std::size_t step, std::size_t sensor) const {
  if (!signal_ || !gamma_.contains(sensor)) return 0.0;
  return signal_(step, sensor);
}

Vector AttackScenario::at(std::size_t step, std::size_t q) const {
  Vector a = Vector::Zero(static_cast<Eigen::Index>(q));
  for (auto i : gamma_)
    if (i <= q) a(static_cast<Eigen::Index>(i - 1)) = value(step, i);
  return a;
}

Vector inject_attack(const Vector& clean, const AttackScenario& attack, std::size_t step) {
  const auto q = static_cast<std::size_t>(clean.size());
  attack.gamma().require_within(q);
  return clean + attack.at(step, q);
}

Trajectory simulate(const LinearSystem& sys, const Vector& x0, std::span<const Vector> inputs,
                    const AttackScenario& attack, std::size_t steps) {
  const auto n = static_cast<Eigen::Index>(sys.n());
  const auto p = static_cast<Eigen::Index>(sys.p());
  if (x0.size() != n) throw DimensionError(fmt::format("x0 has length {}, system has n={}", x0.size(), n));
  if (!x0.allFinite()) throw Error(ErrorCode::InvalidArgument, "x0 has non-finite entries");
  const bool implicit_zero_input = (p == 0 && inputs.empty());
  if (!implicit_zero_input && inputs.size() < steps)
    throw DimensionError(fmt::format("need {} input vectors, got {}", steps, inputs.size()));
  attack.gamma().require_within(sys.q());

  Trajectory traj;
  traj.states.reserve(steps + 1);
  traj.clean_outputs.reserve(steps + 1);
  traj.measured_outputs.reserve(steps + 1);
  traj.inputs.reserve(steps);

  Vector x = x0;
  for (std::size_t k = 0;; ++k) {
    Vector clean = sys.c() * x;
    traj.measured_outputs.push_back(inject_attack(clean, attack, k));
    traj.clean_outputs.push_back(std::move(clean));
    traj.states.push_back(x);
    if (k == steps) break;

    Vector u = implicit_zero_input ? Vector(0) : inputs[k];
    if (u.size() != p) throw DimensionError(fmt::format("input u_{} has length {}, system has p={}", k, u.size(), p));
    x = sys.a() * x + sys.b() * u;
    traj.inputs.push_back(std::move(u));
  }
  return traj;
}

}  // namespace ssr
