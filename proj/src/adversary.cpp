#include "ssr/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include <fmt/format.h>

#include "ssr/observability.hpp"

namespace ssr {

using Eigen::Index;

StackedAttack stack_attack(const AttackScenario& attack, const SensorSet& deleted, std::size_t q, std::size_t end_step,
                           std::size_t window) {
  if (window < 1) throw Error(ErrorCode::InvalidArgument, "window length must be at least 1");
  if (end_step + 1 < window)
    throw Error(ErrorCode::InvalidArgument, fmt::format("end step {} too early for window {}", end_step, window));
  deleted.require_within(q);
  const SensorSet kept = deleted.complement(q);
  const Index m = static_cast<Index>(kept.size());
  StackedAttack out{deleted, Vector(static_cast<Index>(window) * m)};
  const std::size_t first = end_step + 1 - window;
  for (std::size_t t = 0; t < window; ++t) {
    Index row = static_cast<Index>(t) * m;
    for (auto i : kept) out.values(row++) = attack.value(first + t, i);
  }
  return out;
}

AttackScenario DefeatCertificate::attack() const {
  auto values = std::make_shared<const std::vector<Vector>>(raw);
  const std::size_t first = first_step;
  return AttackScenario(gamma, [values, first](std::size_t step, std::size_t sensor) {
    if (step < first || step - first >= values->size()) return 0.0;
    return (*values)[step - first](static_cast<Index>(sensor - 1));
  });
}

namespace {

std::size_t window_of(const LinearSystem& sys, const StackedAttack& a) {
  a.subset.require_within(sys.q());
  const std::size_t kept = sys.q() - a.subset.size();
  const auto len = static_cast<std::size_t>(a.values.size());
  if (kept == 0 || len == 0 || len % kept != 0)
    throw DimensionError(fmt::format("stacked attack of length {} does not fit {} kept sensors", len, kept));
  if (!a.values.allFinite()) throw Error(ErrorCode::InvalidArgument, "stacked attack has non-finite entries");
  return len / kept;
}

CandidateSolver full_rank_solver(const LinearSystem& sys, const SensorSet& deleted, std::size_t window) {
  CandidateSolver solver(build_stacked(sys, deleted, window), ordinal_of(deleted, sys.q()));
  if (!solver.full_rank())
    throw PreconditionError(
        fmt::format("deleting {} leaves an unobservable pair at window {}", deleted.to_string(), window));
  return solver;
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
}

// Orthonormal basis of the right nullspace, using the shared rank threshold.
Matrix nullspace(const Matrix& k) {
  if (k.rows() == 0) return Matrix::Identity(k.cols(), k.cols());
  Eigen::JacobiSVD<Matrix> svd(k, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double tol = rank_tolerance(static_cast<std::size_t>(k.rows()), static_cast<std::size_t>(k.cols()), sv(0));
  const Index rank = (sv.array() > tol).count();
  return svd.matrixV().rightCols(k.cols() - rank);
}

// Maps the unknowns (attacks on `gamma` over steps first..first+steps-1,
// step-major) to the stacked attack seen by hypothesis `deleted` over the
// window ending at `end_step`.
Matrix selection(std::size_t q, const SensorSet& gamma, std::size_t first, std::size_t steps, const SensorSet& deleted,
                 std::size_t end_step, std::size_t window) {
  const SensorSet kept = deleted.complement(q);
  const Index m = static_cast<Index>(kept.size());
  const Index s = static_cast<Index>(gamma.size());
  Matrix p = Matrix::Zero(static_cast<Index>(window) * m, static_cast<Index>(steps) * s);
  const std::size_t win_first = end_step + 1 - window;
  for (std::size_t t = 0; t < window; ++t) {
    const Index col0 = static_cast<Index>(win_first + t - first) * s;
    Index row = static_cast<Index>(t) * m;
    for (auto i : kept) {
      const auto it = std::find(gamma.begin(), gamma.end(), i);
      if (it != gamma.end()) p(row, col0 + (it - gamma.begin())) = 1.0;
      ++row;
    }
  }
  return p;
}

// Nonzero solution z = N c maximizing |bias| = |M N c|, scaled to unit bias
// with its largest-magnitude coordinate positive. Nullopt if M vanishes on N.
std::optional<Vector> unit_bias_direction(const Matrix& bias_map, const Matrix& basis) {
  if (basis.cols() == 0) return std::nullopt;
  const Matrix mn = bias_map * basis;
  Eigen::JacobiSVD<Matrix> svd(mn, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double top = svd.singularValues()(0);
  if (!(top > kDefeatTolerance * std::max(1.0, spectral_norm(bias_map)))) return std::nullopt;
  Vector z = basis * svd.matrixV().col(0) / top;
  const Vector bias = bias_map * z;
  Index lead = 0;
  bias.cwiseAbs().maxCoeff(&lead);
  if (bias(lead) < 0) z = -z;
  return z;
}

// Entries at round-off level relative to the largest one are set to exactly
// zero, so the reported attack shows which sensors and steps it really uses.
std::vector<Vector> raw_attack(const Vector& z, const SensorSet& gamma, std::size_t q, std::size_t steps) {
  std::vector<Vector> raw(steps, Vector::Zero(static_cast<Index>(q)));
  const double floor = 1e-12 * z.lpNorm<Eigen::Infinity>();
  const Index s = static_cast<Index>(gamma.size());
  for (std::size_t t = 0; t < steps; ++t) {
    Index g = 0;
    for (auto i : gamma) {
      const double v = z(static_cast<Index>(t) * s + g++);
      raw[t](static_cast<Index>(i - 1)) = std::abs(v) <= floor ? 0.0 : v;
    }
  }
  return raw;
}

struct SesvsSearch {
  const LinearSystem& sys;
  std::size_t window;
  SensorSet gamma;
  std::size_t end_step;
  std::size_t first;
  std::vector<SubsetIndex> pool;   // hypotheses that see part of gamma
  std::vector<Matrix> bias_maps;   // L_S P_S, aligned with pool

  std::optional<DefeatCertificate> try_family(const std::vector<std::size_t>& family) const {
    const Index n = static_cast<Index>(sys.n());
    const Index cols = bias_maps.front().cols();
    Matrix k(n * static_cast<Index>(family.size() - 1), cols);
    for (std::size_t r = 1; r < family.size(); ++r)
      k.middleRows(static_cast<Index>(r - 1) * n, n) = bias_maps[family[0]] - bias_maps[family[r]];
    const auto z = unit_bias_direction(bias_maps[family[0]], nullspace(k));
    if (!z) return std::nullopt;

    DefeatCertificate cert;
    cert.target = Method::Sesvs;
    cert.gamma = gamma;
    cert.window = window;
    cert.end_step = end_step;
    cert.first_step = first;
    cert.raw = raw_attack(*z, gamma, sys.q(), window);
    const AttackScenario attack = cert.attack();
    for (auto f : family) {
      cert.subsets.push_back(pool[f]);
      cert.attacks.push_back(stack_attack(attack, pool[f].subset, sys.q(), end_step, window));
    }
    auto check = check_sesvs_defeat(sys, window, cert.attacks);
    if (!check.defeated) return std::nullopt;
    cert.bias = std::move(check.bias);
    return cert;
  }
};

std::optional<SesvsSearch> prepare_sesvs(const LinearSystem& sys, std::size_t window, const SensorSet& gamma,
                                          std::size_t end_step) {
  gamma.require_within(sys.q());
  if (window < 1) throw Error(ErrorCode::InvalidArgument, "window length must be at least 1");
  if (end_step + 1 < window)
    throw Error(ErrorCode::InvalidArgument, fmt::format("end step {} too early for window {}", end_step, window));
  const std::size_t s = gamma.size();
  if (s + 2 > sys.q())
    throw PreconditionError(fmt::format("SESVS defeat needs q >= s + 2 (q={}, s={})", sys.q(), s));
  if (gamma.empty()) return std::nullopt;

  SesvsSearch search{sys, window, gamma, end_step, end_step + 1 - window, {}, {}};
  for (const auto& idx : subsets(sys.q(), s + 1)) {
    const CandidateSolver solver = full_rank_solver(sys, idx.subset, window);
    if (gamma.is_subset_of(idx.subset)) continue;
    search.pool.push_back(idx);
    search.bias_maps.push_back(solver.gain() *
                               selection(sys.q(), gamma, search.first, window, idx.subset, end_step, window));
  }
  const std::size_t family_size = sys.q() - s;
  const auto count = choose(search.pool.size(), family_size);
  if (!count) return std::nullopt;
  if (*count > kMaxSesvsFamilies)
    throw PreconditionError(fmt::format("{} hypothesis families exceed the search limit {}", *count, kMaxSesvsFamilies));
  return search;
}

template <typename Visit>
void for_each_family(std::size_t pool, std::size_t size, Visit&& visit) {
  for (const auto& fam : subsets(pool, size)) {
    std::vector<std::size_t> family;
    for (auto i : fam.subset) family.push_back(i - 1);
    if (!visit(family)) return;
  }
}

}  // namespace

SesvsDefeatCheck check_sesvs_defeat(const LinearSystem& sys, std::size_t window, std::span<const StackedAttack> attacks) {
  if (attacks.empty()) throw Error(ErrorCode::InvalidArgument, "empty hypothesis family");
  const std::size_t size = attacks.front().subset.size();
  std::vector<Vector> biases;
  double scale = 0.0;
  for (const auto& a : attacks) {
    if (a.subset.size() != size) throw DimensionError("hypotheses in a family must have equal size");
    if (window_of(sys, a) != window)
      throw DimensionError(fmt::format("stacked attack for {} does not span window {}", a.subset.to_string(), window));
    const CandidateSolver solver = full_rank_solver(sys, a.subset, window);
    biases.push_back(solver.gain() * a.values);
    scale = std::max(scale, spectral_norm(solver.gain()) * a.values.norm());
  }
  SesvsDefeatCheck out;
  out.bias = biases.front();
  const double tol = kDefeatTolerance * scale;
  if (!(out.bias.norm() > tol)) return out;
  for (const auto& b : biases)
    if (!((b - out.bias).norm() <= tol)) return out;
  out.defeated = true;
  return out;
}

std::optional<DefeatCertificate> synthesize_sesvs_defeat(const LinearSystem& sys, std::size_t window,
                                                         const SensorSet& gamma, std::size_t end_step) {
  const auto search = prepare_sesvs(sys, window, gamma, end_step);
  if (!search) return std::nullopt;
  std::optional<DefeatCertificate> found;
  for_each_family(search->pool.size(), sys.q() - gamma.size(), [&](const std::vector<std::size_t>& family) {
    found = search->try_family(family);
    return !found;
  });
  return found;
}

std::vector<DefeatCertificate> synthesize_sesvs_defeat_all(const LinearSystem& sys, std::size_t window,
                                                           const SensorSet& gamma, std::size_t end_step) {
  std::vector<DefeatCertificate> out;
  const auto search = prepare_sesvs(sys, window, gamma, end_step);
  if (!search) return out;
  for_each_family(search->pool.size(), sys.q() - gamma.size(), [&](const std::vector<std::size_t>& family) {
    if (auto cert = search->try_family(family)) out.push_back(std::move(*cert));
    return true;
  });
  return out;
}

bool check_sesgc_defeat(const LinearSystem& sys, std::span<const StackedAttack> attacks) {
  if (attacks.empty()) throw Error(ErrorCode::InvalidArgument, "no stacked attacks given");
  const SensorSet& v = attacks.front().subset;
  const std::size_t window = window_of(sys, attacks.front());
  for (const auto& a : attacks) {
    if (a.subset != v) throw DimensionError("all stacked attacks must belong to the same hypothesis");
    if (window_of(sys, a) != window) throw DimensionError("stacked attacks must share one window length");
  }
  const CandidateSolver solver = full_rank_solver(sys, v, window);
  std::vector<Vector> biases;
  double largest = 0.0;
  for (const auto& a : attacks) {
    biases.push_back(solver.gain() * a.values);
    largest = std::max(largest, a.values.norm());
  }
  const double scale = std::max(1.0, spectral_norm(sys.a())) * spectral_norm(solver.gain()) * largest;
  const double tol = kDefeatTolerance * scale;
  if (!(biases.front().norm() > tol)) return false;
  for (std::size_t rho = 1; rho < biases.size(); ++rho)
    if (!((biases[rho] - sys.a() * biases[rho - 1]).norm() <= tol)) return false;
  return true;
}

std::optional<DefeatCertificate> synthesize_sesgc_defeat(const LinearSystem& sys, std::size_t window,
                                                         const SensorSet& gamma, std::size_t end_step,
                                                         std::size_t rounds) {
  gamma.require_within(sys.q());
  if (window < 1) throw Error(ErrorCode::InvalidArgument, "window length must be at least 1");
  if (end_step + 1 < window)
    throw Error(ErrorCode::InvalidArgument, fmt::format("end step {} too early for window {}", end_step, window));
  const std::size_t s = gamma.size();
  if (s == 0 || s >= sys.q()) return std::nullopt;

  const std::size_t first = end_step + 1 - window;
  const std::size_t steps = window + rounds;
  const Index n = static_cast<Index>(sys.n());

  for (const auto& idx : subsets(sys.q(), s)) {
    if (idx.subset == gamma) continue;
    const CandidateSolver solver = full_rank_solver(sys, idx.subset, window);

    std::vector<Matrix> maps;  // bias of the window ending at end_step + rho
    for (std::size_t rho = 0; rho <= rounds; ++rho)
      maps.push_back(solver.gain() * selection(sys.q(), gamma, first, steps, idx.subset, end_step + rho, window));

    Matrix k(n * static_cast<Index>(rounds), static_cast<Index>(steps * s));
    for (std::size_t rho = 1; rho <= rounds; ++rho)
      k.middleRows(static_cast<Index>(rho - 1) * n, n) = maps[rho] - sys.a() * maps[rho - 1];
    const auto z = unit_bias_direction(maps.front(), nullspace(k));
    if (!z) continue;

    DefeatCertificate cert;
    cert.target = Method::Sesgc;
    cert.subsets = {idx};
    cert.gamma = gamma;
    cert.window = window;
    cert.end_step = end_step;
    cert.rounds = rounds;
    cert.first_step = first;
    cert.raw = raw_attack(*z, gamma, sys.q(), steps);
    const AttackScenario attack = cert.attack();
    for (std::size_t rho = 0; rho <= rounds; ++rho)
      cert.attacks.push_back(stack_attack(attack, idx.subset, sys.q(), end_step + rho, window));
    if (!check_sesgc_defeat(sys, cert.attacks)) continue;
    cert.bias = solver.gain() * cert.attacks.front().values;
    return cert;
  }
  return std::nullopt;
}

}  // namespace ssr
