#include "ssr/observability.hpp"

#include <algorithm>
#include <limits>

#include <fmt/format.h>

namespace ssr {

using Eigen::Index;

double rank_tolerance(std::size_t rows, std::size_t cols, double sigma_max) {
  return static_cast<double>(std::max(rows, cols)) * sigma_max * std::numeric_limits<double>::epsilon();
}

std::size_t numerical_rank(const Matrix& m) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& sv = svd.singularValues();
  const double tol = rank_tolerance(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()), sv(0));
  return static_cast<std::size_t>((sv.array() > tol).count());
}

Matrix delete_rows(const Matrix& m, const SensorSet& rows) {
  rows.require_within(static_cast<std::size_t>(m.rows()));
  Matrix out(m.rows() - static_cast<Index>(rows.size()), m.cols());
  Index r = 0;
  for (Index i = 0; i < m.rows(); ++i)
    if (!rows.contains(static_cast<std::size_t>(i + 1))) out.row(r++) = m.row(i);
  return out;
}

StackedOperators build_stacked(const LinearSystem& sys, const SensorSet& deleted, std::size_t window) {
  if (window < 1) throw Error(ErrorCode::InvalidArgument, "window length must be at least 1");
  deleted.require_within(sys.q());
  if (deleted.size() >= sys.q())
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("deleting {} leaves no sensors (q={})", deleted.to_string(), sys.q()));

  const Matrix cs = delete_rows(sys.c(), deleted);
  const Index m = cs.rows();
  const Index n = static_cast<Index>(sys.n());
  const Index p = static_cast<Index>(sys.p());
  const Index r = static_cast<Index>(window);

  // powers[i] = C(S) A^i
  std::vector<Matrix> powers;
  powers.reserve(window);
  powers.push_back(cs);
  for (Index i = 1; i < r; ++i) powers.push_back(powers.back() * sys.a());

  StackedOperators ops;
  ops.window = window;
  ops.deleted = deleted;
  ops.observability.resize(r * m, n);
  for (Index i = 0; i < r; ++i) ops.observability.middleRows(i * m, m) = powers[static_cast<std::size_t>(i)];

  ops.input_map = Matrix::Zero(r * m, (r - 1) * p);
  if (p > 0) {
    for (Index i = 1; i < r; ++i)
      for (Index j = 0; j < i; ++j)
        ops.input_map.block(i * m, j * p, m, p) = powers[static_cast<std::size_t>(i - j - 1)] * sys.b();
  }
  return ops;
}

std::optional<std::size_t> min_window_for_full_rank(const LinearSystem& sys, const SensorSet& deleted) {
  const std::size_t n = sys.n();
  // Build the n-step stack once and test its leading block rows.
  const Matrix full = build_stacked(sys, deleted, n).observability;
  const Index m = static_cast<Index>(sys.q() - deleted.size());
  for (std::size_t r = 1; r <= n; ++r) {
    if (numerical_rank(full.topRows(static_cast<Index>(r) * m)) == n) return r;
  }
  return std::nullopt;
}

bool ObservabilityReport::sparse_observable() const {
  return !subsets.empty() &&
         std::all_of(subsets.begin(), subsets.end(), [](const auto& c) { return c.min_window.has_value(); });
}

std::optional<std::size_t> ObservabilityReport::lower_bound() const {
  if (!sparse_observable()) return std::nullopt;
  return observable_lower_bound();
}

std::optional<std::size_t> ObservabilityReport::observable_lower_bound() const {
  std::optional<std::size_t> b;
  for (const auto& c : subsets)
    if (c.min_window) b = std::max(b.value_or(0), *c.min_window);
  return b;
}

std::vector<SensorSet> ObservabilityReport::unobservable_subsets() const {
  std::vector<SensorSet> out;
  for (const auto& c : subsets)
    if (!c.min_window) out.push_back(c.subset.subset);
  return out;
}

ObservabilityReport analyze_observability(const LinearSystem& sys, std::size_t s) {
  ObservabilityReport report;
  report.sparsity = s;
  if (s >= sys.q()) return report;
  for (const auto& idx : subsets(sys.q(), s))
    report.subsets.push_back({idx, min_window_for_full_rank(sys, idx.subset)});
  return report;
}

bool is_sparse_observable(const LinearSystem& sys, std::size_t s) {
  if (s >= sys.q()) return false;
  for (const auto& idx : subsets(sys.q(), s))
    if (!min_window_for_full_rank(sys, idx.subset)) return false;
  return true;
}

std::size_t sparse_observable_lower_bound(const LinearSystem& sys, std::size_t s) {
  if (s >= sys.q())
    throw NotObservableError(fmt::format("{}-sparse observability needs s <= q - 1 = {}", s, sys.q() - 1), SensorSet{});
  std::size_t b = 0;
  for (const auto& idx : subsets(sys.q(), s)) {
    auto r = min_window_for_full_rank(sys, idx.subset);
    if (!r)
      throw NotObservableError(
          fmt::format("system is not {}-sparse observable: deleting {} is unobservable", s, idx.subset.to_string()),
          idx.subset);
    b = std::max(b, *r);
  }
  return b;
}

std::optional<std::size_t> max_sparse_observability(const LinearSystem& sys) {
  std::optional<std::size_t> best;
  for (std::size_t s = 0; s < sys.q(); ++s) {
    if (!is_sparse_observable(sys, s)) break;
    best = s;
  }
  return best;
}

MeasurementWindow stack_measurements(const Measurements& meas, const SensorSet& deleted, std::size_t end_step,
                                     std::size_t window) {
  if (window < 1) throw Error(ErrorCode::InvalidArgument, "window length must be at least 1");
  if (end_step + 1 < window)
    throw Error(ErrorCode::InvalidArgument, fmt::format("end step {} too early for window {}", end_step, window));
  if (end_step >= meas.outputs.size())
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("measurements end at step {}, window needs step {}", meas.last_step(), end_step));
  const std::size_t first = end_step + 1 - window;
  const bool autonomous = meas.inputs.empty();
  if (window > 1 && !autonomous && end_step > meas.inputs.size())
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("inputs available through u_{}, window needs u_{}", meas.inputs.size() - 1, end_step - 1));

  const std::size_t q = static_cast<std::size_t>(meas.outputs[first].size());
  deleted.require_within(q);
  const SensorSet kept = deleted.complement(q);
  const Index m = static_cast<Index>(kept.size());

  MeasurementWindow win;
  win.window = window;
  win.end_step = end_step;
  win.deleted = deleted;
  win.outputs.resize(static_cast<Index>(window) * m);
  for (std::size_t t = 0; t < window; ++t) {
    const Vector& y = meas.outputs[first + t];
    if (static_cast<std::size_t>(y.size()) != q) throw DimensionError(fmt::format("y_{} has inconsistent length", first + t));
    Index row = static_cast<Index>(t) * m;
    for (auto i : kept) win.outputs(row++) = y(static_cast<Index>(i - 1));
  }

  const Index p = (window > 1 && !autonomous) ? meas.inputs[first].size() : 0;
  win.inputs.resize(static_cast<Index>(window - 1) * p);
  for (std::size_t t = 0; !autonomous && t + 1 < window; ++t) {
    const Vector& u = meas.inputs[first + t];
    if (u.size() != p) throw DimensionError(fmt::format("u_{} has inconsistent length", first + t));
    win.inputs.segment(static_cast<Index>(t) * p, p) = u;
  }
  return win;
}

}  // namespace ssr
