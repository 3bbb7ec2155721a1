#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "ssr/combinat.hpp"
#include "ssr/linsys.hpp"
#include "ssr/types.hpp"

namespace ssr {

/// Numerical rank by singular-value thresholding with
/// tol = max(rows, cols) * sigma_max * machine epsilon.
///
/// Every rank decision in the library (observability certificates, lower
/// bounds, candidate solver health) goes through this one function.
std::size_t numerical_rank(const Matrix& m);
double rank_tolerance(std::size_t rows, std::size_t cols, double sigma_max);

/// M with the rows listed in `rows` (1-based) removed, order preserved.
Matrix delete_rows(const Matrix& m, const SensorSet& rows);

/// Stacked r-step operators for the sensors that remain after deleting
/// `deleted`: Y = O x_{k-r+1} + D U.
struct StackedOperators {
  Matrix observability;  // (r * kept) x n, block i = C(S) A^i
  Matrix input_map;      // (r * kept) x ((r-1) * p), block-lower-triangular
  std::size_t window = 0;
  SensorSet deleted;
};

StackedOperators build_stacked(const LinearSystem& sys, const SensorSet& deleted, std::size_t window);

/// Smallest r in 1..n at which the stacked observability matrix has full
/// column rank, or nullopt when (A, C(S)) is unobservable.
std::optional<std::size_t> min_window_for_full_rank(const LinearSystem& sys, const SensorSet& deleted);

struct SubsetCertificate {
  SubsetIndex subset;
  std::optional<std::size_t> min_window;
};

/// Per-subset observability certificates for all size-s deletions.
struct ObservabilityReport {
  std::size_t sparsity = 0;
  std::vector<SubsetCertificate> subsets;

  bool sparse_observable() const;
  /// max_i r_i over all subsets; nullopt unless every subset is observable.
  std::optional<std::size_t> lower_bound() const;
  /// max_i r_i over the observable subsets only; nullopt if none is.
  std::optional<std::size_t> observable_lower_bound() const;
  std::vector<SensorSet> unobservable_subsets() const;
  const SubsetCertificate& at_ordinal(std::size_t ordinal) const { return subsets.at(ordinal - 1); }
};

/// Sweeps every size-s deletion. s >= q yields an empty, non-observable report.
ObservabilityReport analyze_observability(const LinearSystem& sys, std::size_t s);

bool is_sparse_observable(const LinearSystem& sys, std::size_t s);

/// Throws NotObservableError naming the first failing subset.
std::size_t sparse_observable_lower_bound(const LinearSystem& sys, std::size_t s);

/// Largest s for which the system is s-sparse observable; nullopt when the
/// system is not even observable with all sensors.
std::optional<std::size_t> max_sparse_observability(const LinearSystem& sys);

/// Stacked measurements for the sensors kept after deleting `deleted`, over
/// steps end_step - window + 1 .. end_step.
struct MeasurementWindow {
  Vector outputs;  // y_{k-r+1}(S) .. y_k(S)
  Vector inputs;   // u_{k-r+1} .. u_{k-1}
  std::size_t window = 0;
  std::size_t end_step = 0;
  SensorSet deleted;
};

MeasurementWindow stack_measurements(const Measurements& meas, const SensorSet& deleted, std::size_t end_step,
                                     std::size_t window);

}  // namespace ssr
