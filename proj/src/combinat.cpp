#include "ssr/combinat.hpp"

#include <numeric>

#include <fmt/format.h>

namespace ssr {

std::optional<std::uint64_t> choose(std::uint64_t p, std::uint64_t k) {
  if (k > p) return std::nullopt;
  k = std::min(k, p - k);
  unsigned __int128 result = 1;
  for (std::uint64_t i = 0; i < k; ++i) {
    // result * (p - i) is divisible by (i + 1) at every step.
    result = result * (p - i) / (i + 1);
  }
  return static_cast<std::uint64_t>(result);
}

namespace {

std::size_t count_or_throw(std::size_t q, std::size_t m) {
  auto c = choose(q, m);
  if (!c) throw Error(ErrorCode::InvalidArgument, fmt::format("subset size {} exceeds sensor count {}", m, q));
  return static_cast<std::size_t>(*c);
}

}  // namespace

SubsetRange::iterator::iterator(std::size_t q, std::size_t m) : q_(q), combo_(m), done_(false) {
  std::iota(combo_.begin(), combo_.end(), std::size_t{1});
  current_ = {SensorSet(combo_), 1};
}

SubsetRange::iterator& SubsetRange::iterator::operator++() {
  if (done_) return *this;
  const std::size_t m = combo_.size();
  // Rightmost position that can still be incremented.
  std::size_t i = m;
  while (i > 0 && combo_[i - 1] == q_ - m + i) --i;
  if (i == 0) {
    done_ = true;
    return *this;
  }
  ++combo_[i - 1];
  for (std::size_t j = i; j < m; ++j) combo_[j] = combo_[j - 1] + 1;
  current_ = {SensorSet(combo_), current_.ordinal + 1};
  return *this;
}

SubsetRange::SubsetRange(std::size_t q, std::size_t m) : q_(q), m_(m), count_(count_or_throw(q, m)) {}

SubsetRange subsets(std::size_t q, std::size_t m) { return SubsetRange(q, m); }

std::vector<SubsetIndex> enumerate_subsets(std::size_t q, std::size_t m) {
  SubsetRange range(q, m);
  std::vector<SubsetIndex> out;
  out.reserve(range.size());
  for (const auto& s : range) out.push_back(s);
  return out;
}

std::size_t ordinal_of(const SensorSet& subset, std::size_t q) {
  subset.require_within(q);
  const std::size_t m = subset.size();
  // Count subsets that precede `subset` lexicographically.
  std::size_t rank = 0;
  std::size_t prev = 0;
  std::size_t pos = 0;
  for (auto e : subset) {
    for (std::size_t v = prev + 1; v < e; ++v) rank += static_cast<std::size_t>(*choose(q - v, m - pos - 1));
    prev = e;
    ++pos;
  }
  return rank + 1;
}

SensorSet subset_at(std::size_t ordinal, std::size_t q, std::size_t m) {
  const std::size_t total = count_or_throw(q, m);
  if (ordinal < 1 || ordinal > total)
    throw Error(ErrorCode::InvalidArgument, fmt::format("ordinal {} outside 1..{}", ordinal, total));
  std::size_t remaining = ordinal - 1;
  std::vector<std::size_t> out;
  out.reserve(m);
  std::size_t v = 1;
  for (std::size_t pos = 0; pos < m; ++pos) {
    for (;; ++v) {
      const auto block = static_cast<std::size_t>(*choose(q - v, m - pos - 1));
      if (remaining < block) break;
      remaining -= block;
    }
    out.push_back(v++);
  }
  return SensorSet(std::move(out));
}

bool sesvs_guarantee_holds(std::size_t q, std::size_t s, std::size_t tau) {
  if (tau < 1 || s + tau + 1 > q)
    throw PreconditionError(fmt::format("guarantee needs tau >= 1 and s + tau <= q - 1 (q={}, s={}, tau={})", q, s, tau));
  return *choose(q, s + tau) < 2 * *choose(q - s, tau);
}

}  // namespace ssr
