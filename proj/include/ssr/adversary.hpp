#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ssr/combinat.hpp"
#include "ssr/linsys.hpp"
#include "ssr/reconstruct.hpp"
#include "ssr/types.hpp"

namespace ssr {

/// Attack values seen by the sensors kept after deleting `subset`, stacked
/// like the measurements: a_{k-r+1}(kept), ..., a_k(kept).
struct StackedAttack {
  SensorSet subset;
  Vector values;
};

StackedAttack stack_attack(const AttackScenario& attack, const SensorSet& deleted, std::size_t q, std::size_t end_step,
                           std::size_t window);

/// Attack values that make a reconstructor settle on x + bias instead of x.
struct DefeatCertificate {
  Method target = Method::Sesvs;
  std::vector<SubsetIndex> subsets;  // SESVS: the hypothesis family; SESGC: the single wrong hypothesis
  Vector bias;                       // common offset of the fooled estimates of x_{k-r+1}
  std::vector<StackedAttack> attacks;  // SESVS: one per subset; SESGC: windows ending at k, k+1, ..., k+rounds
  SensorSet gamma;
  std::size_t window = 0;
  std::size_t end_step = 0;  // k
  std::size_t rounds = 0;    // SESGC only

  std::size_t first_step = 0;  // step of raw.front()
  std::vector<Vector> raw;     // full attack vectors a_{first_step}, a_{first_step+1}, ...

  /// The raw attack as a scenario on `gamma`, zero outside the synthesized steps.
  AttackScenario attack() const;
};

/// Relative equality tolerance shared by both checkers.
inline constexpr double kDefeatTolerance = 1e-8;

struct SesvsDefeatCheck {
  bool defeated = false;
  Vector bias;
};

/// True iff every L_S A_{k,S} in the family is equal and nonzero.
SesvsDefeatCheck check_sesvs_defeat(const LinearSystem& sys, std::size_t window, std::span<const StackedAttack> attacks);

/// Smallest-family-first search for a SESVS-defeating attack supported on
/// `gamma` over the window ending at `end_step`. Families range over
/// q - |gamma| hypotheses of size |gamma| + 1; hypotheses that delete all of
/// `gamma` are skipped since they see no attack.
std::optional<DefeatCertificate> synthesize_sesvs_defeat(const LinearSystem& sys, std::size_t window,
                                                         const SensorSet& gamma, std::size_t end_step);

/// Every feasible family, in canonical order.
std::vector<DefeatCertificate> synthesize_sesvs_defeat_all(const LinearSystem& sys, std::size_t window,
                                                           const SensorSet& gamma, std::size_t end_step);

/// Families are enumerated only when their count is at most this.
inline constexpr std::uint64_t kMaxSesvsFamilies = 2'000'000;

/// True iff L_v A_{k,v} != 0 and L_v A_{k+rho,v} = A L_v A_{k+rho-1,v} for
/// every consecutive pair of windows. `attacks` are the windows ending at
/// k, k+1, ..., k+rounds, all for the same hypothesis.
bool check_sesgc_defeat(const LinearSystem& sys, std::span<const StackedAttack> attacks);

/// Searches the size-|gamma| hypotheses other than `gamma` in canonical order
/// for an attack whose induced bias evolves as w -> A w for `rounds` rounds.
std::optional<DefeatCertificate> synthesize_sesgc_defeat(const LinearSystem& sys, std::size_t window,
                                                         const SensorSet& gamma, std::size_t end_step,
                                                         std::size_t rounds);

}  // namespace ssr
