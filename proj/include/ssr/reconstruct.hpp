#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ssr/combinat.hpp"
#include "ssr/linsys.hpp"
#include "ssr/observability.hpp"
#include "ssr/types.hpp"

namespace ssr {

/// One subset hypothesis and the state it implies for x_{k-r+1}.
struct Candidate {
  std::size_t ordinal = 0;
  SensorSet subset;  // deleted (hypothetically attacked) sensors
  Vector estimate;
  bool solver_ok = false;  // stacked observability matrix had full column rank
};

/// Least-squares solver for one subset hypothesis at a fixed window length.
///
/// The gain L = V S^+ U^T comes from an SVD of the stacked observability
/// matrix. At full rank it is algebraically (O^T O)^{-1} O^T without ever
/// forming O^T O. The factorization is done once, so the same solver can be
/// slid along the measurement record.
class CandidateSolver {
 public:
  explicit CandidateSolver(StackedOperators ops, std::size_t ordinal = 0);
  CandidateSolver(const LinearSystem& sys, const SubsetIndex& subset, std::size_t window);

  bool full_rank() const noexcept { return rank_ == static_cast<std::size_t>(ops_.observability.cols()); }
  std::size_t rank() const noexcept { return rank_; }
  const Matrix& gain() const noexcept { return gain_; }
  const StackedOperators& operators() const noexcept { return ops_; }
  std::size_t ordinal() const noexcept { return ordinal_; }

  Candidate solve(const MeasurementWindow& win) const;
  Candidate solve(const Measurements& meas, std::size_t end_step) const;

 private:
  StackedOperators ops_;
  Matrix gain_;
  std::size_t rank_ = 0;
  std::size_t ordinal_ = 0;
};

/// L_S for the given operators.
Matrix least_squares_gain(const StackedOperators& ops);

Candidate solve_candidate(const StackedOperators& ops, const MeasurementWindow& win);

struct CandidateSet {
  std::vector<Candidate> candidates;  // canonical order, ordinals 1..C(q, m)
  std::size_t end_step = 0;
  std::size_t window = 0;
  std::size_t subset_size = 0;
};

CandidateSet candidate_set(const LinearSystem& sys, const Measurements& meas, std::size_t end_step, std::size_t window,
                           std::size_t subset_size);

/// Two estimates are equal when every coordinate differs by at most
/// abs + rel * max(|a_i|, |b_i|).
struct Tolerance {
  double abs = 1e-6;
  double rel = 1e-8;

  bool close(const Vector& a, const Vector& b) const;
};

struct Cluster {
  std::vector<std::size_t> ordinals;
  Vector representative;  // coordinate-wise mean of the members
  double spread = 0.0;    // largest max-norm distance between two members
};

/// Single-linkage grouping of the solver_ok candidates, ordered by smallest
/// member ordinal.
std::vector<Cluster> cluster_candidates(std::span<const Candidate> candidates, const Tolerance& tol);

enum class Outcome { Unique, Ambiguous, Infeasible };
enum class Method { Known, Sesvs, Sesgc };

const char* to_string(Outcome o) noexcept;
const char* to_string(Method m) noexcept;

/// One filtering round of SESGC.
struct SesgcRound {
  std::size_t index = 0;                // round number, 1-based
  std::vector<std::size_t> surviving;   // surviving ordinals after this round
  std::vector<std::size_t> tested;      // ordinals entering this round
  std::vector<double> residuals;        // aligned with `tested`
};

struct ReconstructionReport {
  Method method = Method::Sesvs;
  Outcome outcome = Outcome::Infeasible;
  std::vector<Vector> states;  // one for Unique, cluster representatives for Ambiguous

  std::size_t sparsity = 0;
  std::size_t tau = 0;     // SESVS only
  std::size_t rounds = 0;  // SESGC rounds actually run

  std::size_t start_step = 0;  // the reconstructed state is x_{start_step}
  std::size_t end_step = 0;
  std::size_t window = 0;
  std::size_t nominal_window = 0;
  std::vector<std::size_t> windows_tried;

  CandidateSet candidates;
  std::vector<Cluster> clusters;  // SESVS: all clusters; SESGC: clusters of the last surviving set
  std::size_t cluster_threshold = 0;
  std::vector<SesgcRound> history;

  std::vector<SensorSet> excluded;  // rank-deficient hypotheses at the window used
  std::vector<std::string> notes;

  /// The reconstructed state; throws unless the outcome is Unique.
  const Vector& state() const;
};

struct SesvsOptions {
  std::size_t tau = 1;
  std::optional<std::size_t> window;  // default: the (s+tau)-sparse observable lower bound
  Tolerance tolerance;
  bool fallback = true;
  bool strict_observability = true;
};

struct SesgcOptions {
  std::optional<std::size_t> window;  // default: the s-sparse observable lower bound
  double residual_tol = 0.1;
  std::optional<std::size_t> max_rounds;  // default: n + 5
  Tolerance tolerance;
  bool fallback = true;
  bool strict_observability = true;
};

/// Reconstructs x_start when the attacked set is known: one least-squares
/// solve on the remaining sensors. The default window is the smallest one
/// giving full rank.
ReconstructionReport known_support_reconstruct(const LinearSystem& sys, const Measurements& meas, std::size_t start,
                                               const SensorSet& gamma, std::optional<std::size_t> window = {});

/// Reconstructs x_start by searching for a cluster of at least C(q-s, tau)
/// equal estimates among the size-(s+tau) hypotheses.
ReconstructionReport sesvs_reconstruct(const LinearSystem& sys, const Measurements& meas, std::size_t start,
                                       std::size_t s, const SesvsOptions& options = {});

/// Reconstructs x_start by discarding hypotheses whose implied state
/// sequence violates the plant dynamics, one step at a time.
ReconstructionReport sesgc_reconstruct(const LinearSystem& sys, const Measurements& meas, std::size_t start,
                                       std::size_t s, const SesgcOptions& options = {});

}  // namespace ssr
