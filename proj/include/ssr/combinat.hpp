#pragma once

#include <cstddef>
#include <cstdint>
#include <iterator>
#include <optional>
#include <vector>

#include "ssr/types.hpp"

namespace ssr {

/// Exact binomial coefficient C(p, k). Returns nullopt when k > p, so the
/// conventional zero is distinguishable from a valid result. Exact for p <= 64.
std::optional<std::uint64_t> choose(std::uint64_t p, std::uint64_t k);

/// A subset hypothesis and its 1-based position in the canonical
/// (lexicographic) enumeration of all same-size subsets of {1..q}.
struct SubsetIndex {
  SensorSet subset;
  std::size_t ordinal = 0;
};

/// Lazy range over the size-m subsets of {1..q} in lexicographic order.
class SubsetRange {
 public:
  class iterator {
   public:
    using iterator_category = std::input_iterator_tag;
    using value_type = SubsetIndex;
    using difference_type = std::ptrdiff_t;
    using pointer = const SubsetIndex*;
    using reference = const SubsetIndex&;

    iterator() = default;
    reference operator*() const { return current_; }
    pointer operator->() const { return &current_; }
    iterator& operator++();
    iterator operator++(int) {
      auto tmp = *this;
      ++*this;
      return tmp;
    }
    friend bool operator==(const iterator& a, const iterator& b) { return a.done_ == b.done_ && (a.done_ || a.current_.ordinal == b.current_.ordinal); }

   private:
    friend class SubsetRange;
    iterator(std::size_t q, std::size_t m);

    std::size_t q_ = 0;
    std::vector<std::size_t> combo_;
    SubsetIndex current_;
    bool done_ = true;
  };

  SubsetRange(std::size_t q, std::size_t m);

  iterator begin() const { return iterator(q_, m_); }
  iterator end() const { return iterator(); }
  std::size_t size() const { return count_; }

 private:
  std::size_t q_;
  std::size_t m_;
  std::size_t count_;
};

/// Lazy enumeration; throws when m > q.
SubsetRange subsets(std::size_t q, std::size_t m);

/// Materialized enumeration: exactly C(q, m) subsets with ordinals 1..C(q, m).
std::vector<SubsetIndex> enumerate_subsets(std::size_t q, std::size_t m);

/// Position of `subset` among the size-|subset| subsets of {1..q}.
std::size_t ordinal_of(const SensorSet& subset, std::size_t q);

/// Inverse of ordinal_of.
SensorSet subset_at(std::size_t ordinal, std::size_t q, std::size_t m);

/// True iff C(q, s+tau) < 2 C(q-s, tau): the true-state cluster is then a
/// strict majority of the size-(s+tau) hypotheses and SESVS cannot be
/// confused. Requires s + tau <= q - 1.
bool sesvs_guarantee_holds(std::size_t q, std::size_t s, std::size_t tau);

}  // namespace ssr
