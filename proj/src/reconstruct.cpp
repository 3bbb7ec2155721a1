#include "ssr/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace ssr {

using Eigen::Index;

namespace {

struct Svd {
  Matrix gain;
  std::size_t rank;
};

Svd pseudo_inverse(const Matrix& o) {
  Eigen::JacobiSVD<Matrix> svd(o, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double tol =
      sv.size() ? rank_tolerance(static_cast<std::size_t>(o.rows()), static_cast<std::size_t>(o.cols()), sv(0)) : 0.0;
  Vector inv = Vector::Zero(sv.size());
  std::size_t rank = 0;
  for (Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > tol) {
      inv(i) = 1.0 / sv(i);
      ++rank;
    }
  }
  return {svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose(), rank};
}

}  // namespace

CandidateSolver::CandidateSolver(StackedOperators ops, std::size_t ordinal) : ops_(std::move(ops)), ordinal_(ordinal) {
  auto pi = pseudo_inverse(ops_.observability);
  gain_ = std::move(pi.gain);
  rank_ = pi.rank;
}

CandidateSolver::CandidateSolver(const LinearSystem& sys, const SubsetIndex& subset, std::size_t window)
    : CandidateSolver(build_stacked(sys, subset.subset, window), subset.ordinal) {}

Candidate CandidateSolver::solve(const MeasurementWindow& win) const {
  if (win.outputs.size() != ops_.observability.rows() || win.inputs.size() != ops_.input_map.cols())
    throw DimensionError(fmt::format("measurement window ({} outputs, {} inputs) does not match operators ({} x {})",
                                     win.outputs.size(), win.inputs.size(), ops_.observability.rows(),
                                     ops_.input_map.cols()));
  Candidate c;
  c.ordinal = ordinal_;
  c.subset = ops_.deleted;
  c.solver_ok = full_rank();
  if (ops_.input_map.cols() > 0)
    c.estimate = gain_ * (win.outputs - ops_.input_map * win.inputs);
  else
    c.estimate = gain_ * win.outputs;
  return c;
}

Candidate CandidateSolver::solve(const Measurements& meas, std::size_t end_step) const {
  return solve(stack_measurements(meas, ops_.deleted, end_step, ops_.window));
}

Matrix least_squares_gain(const StackedOperators& ops) { return pseudo_inverse(ops.observability).gain; }

Candidate solve_candidate(const StackedOperators& ops, const MeasurementWindow& win) {
  return CandidateSolver(ops).solve(win);
}

CandidateSet candidate_set(const LinearSystem& sys, const Measurements& meas, std::size_t end_step, std::size_t window,
                           std::size_t subset_size) {
  CandidateSet set;
  set.end_step = end_step;
  set.window = window;
  set.subset_size = subset_size;
  for (const auto& idx : subsets(sys.q(), subset_size))
    set.candidates.push_back(CandidateSolver(sys, idx, window).solve(meas, end_step));
  return set;
}

bool Tolerance::close(const Vector& a, const Vector& b) const {
  if (a.size() != b.size()) return false;
  for (Index i = 0; i < a.size(); ++i) {
    const double bound = abs + rel * std::max(std::abs(a(i)), std::abs(b(i)));
    if (!(std::abs(a(i) - b(i)) <= bound)) return false;
  }
  return true;
}

std::vector<Cluster> cluster_candidates(std::span<const Candidate> candidates, const Tolerance& tol) {
  std::vector<const Candidate*> ok;
  for (const auto& c : candidates)
    if (c.solver_ok) ok.push_back(&c);

  std::vector<std::size_t> parent(ok.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < ok.size(); ++i)
    for (std::size_t j = i + 1; j < ok.size(); ++j)
      if (tol.close(ok[i]->estimate, ok[j]->estimate)) {
        const auto a = find(i), b = find(j);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }

  std::vector<std::vector<std::size_t>> groups(ok.size());
  for (std::size_t i = 0; i < ok.size(); ++i) groups[find(i)].push_back(i);

  std::vector<Cluster> out;
  for (const auto& g : groups) {
    if (g.empty()) continue;
    Cluster cl;
    cl.representative = Vector::Zero(ok[g.front()]->estimate.size());
    for (auto i : g) {
      cl.ordinals.push_back(ok[i]->ordinal);
      cl.representative += ok[i]->estimate;
    }
    cl.representative /= static_cast<double>(g.size());
    for (std::size_t a = 0; a < g.size(); ++a)
      for (std::size_t b = a + 1; b < g.size(); ++b)
        cl.spread = std::max(cl.spread, (ok[g[a]]->estimate - ok[g[b]]->estimate).lpNorm<Eigen::Infinity>());
    std::sort(cl.ordinals.begin(), cl.ordinals.end());
    out.push_back(std::move(cl));
  }
  std::sort(out.begin(), out.end(), [](const Cluster& a, const Cluster& b) { return a.ordinals.front() < b.ordinals.front(); });
  return out;
}

const char* to_string(Outcome o) noexcept {
  switch (o) {
    case Outcome::Unique: return "unique";
    case Outcome::Ambiguous: return "ambiguous";
    case Outcome::Infeasible: return "infeasible";
  }
  return "?";
}

const char* to_string(Method m) noexcept {
  switch (m) {
    case Method::Known: return "known";
    case Method::Sesvs: return "sesvs";
    case Method::Sesgc: return "sesgc";
  }
  return "?";
}

const Vector& ReconstructionReport::state() const {
  if (outcome != Outcome::Unique || states.empty())
    throw PreconditionError(fmt::format("{} did not produce a unique state ({})", to_string(method), to_string(outcome)));
  return states.front();
}

namespace {

// Window length before any fallback: the explicit request, otherwise the
// sparse observable lower bound for hypotheses of size m.
std::size_t nominal_window(const LinearSystem& sys, std::size_t m, std::optional<std::size_t> requested, bool strict,
                           ReconstructionReport& report) {
  if (strict) {
    const std::size_t b = sparse_observable_lower_bound(sys, m);
    return requested.value_or(b);
  }
  if (requested) return *requested;
  const auto obs = analyze_observability(sys, m);
  const auto b = obs.observable_lower_bound();
  if (!b) throw NotObservableError(fmt::format("no size-{} deletion leaves an observable pair", m), SensorSet{});
  if (!obs.sparse_observable())
    report.notes.push_back(fmt::format("not {}-sparse observable; lower bound {} taken over observable hypotheses", m, *b));
  return *b;
}

struct SolverBank {
  std::vector<CandidateSolver> solvers;
  std::vector<SensorSet> deficient;
};

SolverBank build_bank(const LinearSystem& sys, std::size_t m, std::size_t window) {
  SolverBank bank;
  for (const auto& idx : subsets(sys.q(), m)) {
    bank.solvers.emplace_back(sys, idx, window);
    if (!bank.solvers.back().full_rank()) bank.deficient.push_back(idx.subset);
  }
  return bank;
}

// Builds solvers at the nominal window and, when allowed, lengthens the
// window while some rank-deficient hypothesis would become full rank at a
// longer one. The start step stays fixed, so each extension consumes one more
// measurement. `last_end` is the largest usable end step.
SolverBank plan_window(const LinearSystem& sys, std::size_t m, std::size_t start, std::size_t last_end, bool fallback,
                       ReconstructionReport& report) {
  std::size_t r = report.nominal_window;
  if (start + r - 1 > last_end)
    throw PreconditionError(fmt::format("window {} starting at step {} needs measurements through step {}, have {}", r,
                                        start, start + r - 1, last_end));
  for (;;) {
    report.windows_tried.push_back(r);
    SolverBank bank = build_bank(sys, m, r);
    report.window = r;
    if (bank.deficient.empty() || !fallback) return bank;

    const bool curable = r < sys.n() && std::any_of(bank.deficient.begin(), bank.deficient.end(), [&](const SensorSet& d) {
                           return min_window_for_full_rank(sys, d).has_value();
                         });
    if (!curable) return bank;
    if (start + r > last_end) {
      report.notes.push_back(fmt::format("window fallback stopped at r={}: no measurement at step {}", r, start + r));
      return bank;
    }
    ++r;
  }
}

void finish_window(ReconstructionReport& report, const SolverBank& bank) {
  report.excluded = bank.deficient;
  if (report.window != report.nominal_window)
    report.notes.push_back(fmt::format("window lengthened from {} to {}", report.nominal_window, report.window));
  if (!bank.deficient.empty())
    report.notes.push_back(fmt::format("{} rank-deficient hypotheses excluded at r={}", bank.deficient.size(), report.window));
}

}  // namespace

ReconstructionReport known_support_reconstruct(const LinearSystem& sys, const Measurements& meas, std::size_t start,
                                               const SensorSet& gamma, std::optional<std::size_t> window) {
  gamma.require_within(sys.q());
  ReconstructionReport report;
  report.method = Method::Known;
  report.sparsity = gamma.size();
  report.start_step = start;
  if (window) {
    report.nominal_window = *window;
  } else {
    const auto r = min_window_for_full_rank(sys, gamma);
    if (!r) throw NotObservableError(fmt::format("deleting {} leaves an unobservable pair", gamma.to_string()), gamma);
    report.nominal_window = *r;
  }
  report.window = report.nominal_window;
  report.windows_tried = {report.window};
  report.end_step = start + report.window - 1;
  if (report.end_step > meas.last_step())
    throw PreconditionError(fmt::format("window {} starting at step {} needs measurements through step {}, have {}",
                                        report.window, start, report.end_step, meas.last_step()));

  const CandidateSolver solver(sys, {gamma, ordinal_of(gamma, sys.q())}, report.window);
  report.candidates = {{solver.solve(meas, report.end_step)}, report.end_step, report.window, gamma.size()};
  if (solver.full_rank()) {
    report.outcome = Outcome::Unique;
    report.states.push_back(report.candidates.candidates.front().estimate);
  } else {
    report.excluded.push_back(gamma);
    report.notes.push_back(fmt::format("deleting {} is rank-deficient at r={}", gamma.to_string(), report.window));
  }
  return report;
}

ReconstructionReport sesvs_reconstruct(const LinearSystem& sys, const Measurements& meas, std::size_t start,
                                       std::size_t s, const SesvsOptions& options) {
  const std::size_t q = sys.q();
  if (options.tau < 1 || s + options.tau + 1 > q)
    throw PreconditionError(
        fmt::format("SESVS needs tau >= 1 and s + tau <= q - 1 (q={}, s={}, tau={})", q, s, options.tau));
  if (options.window && *options.window < 1) throw Error(ErrorCode::InvalidArgument, "window length must be at least 1");
  const std::size_t m = s + options.tau;

  ReconstructionReport report;
  report.method = Method::Sesvs;
  report.sparsity = s;
  report.tau = options.tau;
  report.start_step = start;
  report.nominal_window = nominal_window(sys, m, options.window, options.strict_observability, report);

  const SolverBank bank = plan_window(sys, m, start, meas.last_step(), options.fallback, report);
  finish_window(report, bank);
  report.end_step = start + report.window - 1;

  report.candidates.end_step = report.end_step;
  report.candidates.window = report.window;
  report.candidates.subset_size = m;
  for (const auto& solver : bank.solvers) report.candidates.candidates.push_back(solver.solve(meas, report.end_step));

  report.clusters = cluster_candidates(report.candidates.candidates, options.tolerance);
  report.cluster_threshold = static_cast<std::size_t>(*choose(q - s, options.tau));

  for (const auto& cl : report.clusters)
    if (cl.ordinals.size() >= report.cluster_threshold) report.states.push_back(cl.representative);
  if (report.states.empty())
    report.outcome = Outcome::Infeasible;
  else
    report.outcome = report.states.size() == 1 ? Outcome::Unique : Outcome::Ambiguous;
  return report;
}

ReconstructionReport sesgc_reconstruct(const LinearSystem& sys, const Measurements& meas, std::size_t start,
                                       std::size_t s, const SesgcOptions& options) {
  const std::size_t q = sys.q();
  if (s >= q) throw PreconditionError(fmt::format("SESGC needs s <= q - 1 (q={}, s={})", q, s));
  if (options.window && *options.window < 1) throw Error(ErrorCode::InvalidArgument, "window length must be at least 1");
  if (!(options.residual_tol >= 0.0)) throw Error(ErrorCode::InvalidArgument, "residual tolerance must be non-negative");

  ReconstructionReport report;
  report.method = Method::Sesgc;
  report.sparsity = s;
  report.start_step = start;
  report.nominal_window = nominal_window(sys, s, options.window, options.strict_observability, report);

  // Round 1 needs one measurement past the window.
  const std::size_t last = meas.last_step();
  if (last < 1) throw PreconditionError("SESGC needs at least two measurements");
  const SolverBank bank = plan_window(sys, s, start, last - 1, options.fallback, report);
  finish_window(report, bank);
  const std::size_t k = start + report.window - 1;
  report.end_step = k;

  report.candidates.end_step = k;
  report.candidates.window = report.window;
  report.candidates.subset_size = s;
  for (const auto& solver : bank.solvers) report.candidates.candidates.push_back(solver.solve(meas, k));
  const auto& base = report.candidates.candidates;

  std::vector<std::size_t> alive;  // zero-based positions into `base`
  std::vector<Vector> previous;
  for (std::size_t j = 0; j < base.size(); ++j) {
    if (!base[j].solver_ok) continue;
    alive.push_back(j);
    previous.push_back(base[j].estimate);
  }

  const std::size_t max_rounds = options.max_rounds.value_or(sys.n() + 5);
  const std::size_t rounds = std::min(max_rounds, last - k);
  if (rounds < max_rounds && !options.max_rounds)
    report.notes.push_back(fmt::format("measurements allow only {} of {} rounds", rounds, max_rounds));

  report.outcome = Outcome::Ambiguous;
  for (std::size_t round = 1; round <= rounds && !alive.empty(); ++round) {
    SesgcRound rec;
    rec.index = round;
    const std::size_t u_step = start + round - 1;
    Vector drive = Vector::Zero(static_cast<Index>(sys.n()));
    if (sys.p() > 0) {
      if (u_step >= meas.inputs.size())
        throw PreconditionError(fmt::format("SESGC round {} needs u_{}", round, u_step));
      drive = sys.b() * meas.inputs[u_step];
    }

    std::vector<std::size_t> next_alive;
    std::vector<Vector> next_prev;
    for (std::size_t a = 0; a < alive.size(); ++a) {
      const std::size_t j = alive[a];
      Vector shifted = bank.solvers[j].solve(meas, k + round).estimate;
      const double res = (shifted - sys.a() * previous[a] - drive).norm();
      rec.tested.push_back(base[j].ordinal);
      rec.residuals.push_back(res);
      if (res <= options.residual_tol) {
        next_alive.push_back(j);
        next_prev.push_back(std::move(shifted));
      }
    }
    for (auto j : next_alive) rec.surviving.push_back(base[j].ordinal);
    alive = std::move(next_alive);
    previous = std::move(next_prev);
    report.history.push_back(std::move(rec));
    report.rounds = round;

    std::vector<Candidate> survivors;
    for (auto j : alive) survivors.push_back(base[j]);
    report.clusters = cluster_candidates(survivors, options.tolerance);
    if (report.clusters.size() == 1) {
      report.outcome = Outcome::Unique;
      break;
    }
  }

  if (alive.empty()) {
    report.outcome = Outcome::Infeasible;
    report.clusters.clear();
  } else if (report.outcome == Outcome::Ambiguous && report.history.empty()) {
    std::vector<Candidate> survivors;
    for (auto j : alive) survivors.push_back(base[j]);
    report.clusters = cluster_candidates(survivors, options.tolerance);
  }
  for (const auto& cl : report.clusters) report.states.push_back(cl.representative);
  return report;
}

}  // namespace ssr
