#include "ssr/types.hpp"

#include <algorithm>

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace ssr {

SensorSet::SensorSet(std::initializer_list<std::size_t> indices)
    : SensorSet(std::vector<std::size_t>(indices)) {}

SensorSet::SensorSet(std::vector<std::size_t> indices) : indices_(std::move(indices)) {
  std::sort(indices_.begin(), indices_.end());
  if (std::adjacent_find(indices_.begin(), indices_.end()) != indices_.end())
    throw Error(ErrorCode::InvalidArgument, "sensor set contains a duplicate index");
  if (!indices_.empty() && indices_.front() == 0)
    throw Error(ErrorCode::InvalidArgument, "sensor indices are 1-based; got 0");
}

bool SensorSet::contains(std::size_t sensor) const noexcept {
  return std::binary_search(indices_.begin(), indices_.end(), sensor);
}

SensorSet SensorSet::complement(std::size_t q) const {
  std::vector<std::size_t> out;
  out.reserve(q >= size() ? q - size() : 0);
  for (std::size_t i = 1; i <= q; ++i)
    if (!contains(i)) out.push_back(i);
  return SensorSet(std::move(out));
}

bool SensorSet::is_subset_of(const SensorSet& other) const {
  return std::includes(other.indices_.begin(), other.indices_.end(), indices_.begin(), indices_.end());
}

void SensorSet::require_within(std::size_t q) const {
  if (!indices_.empty() && indices_.back() > q)
    throw DimensionError(fmt::format("sensor {} out of range: system has q={} sensors", indices_.back(), q));
}

std::string SensorSet::to_string() const { return fmt::format("{{{}}}", fmt::join(indices_, ",")); }

}  // namespace ssr
