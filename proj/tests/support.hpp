#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "ssr/linsys.hpp"
#include "ssr/types.hpp"

namespace ssr_test {

using ssr::Matrix;
using ssr::Vector;

inline std::filesystem::path scenario_path(const char* name) {
  return std::filesystem::path(SSR_SCENARIO_DIR) / name;
}

inline Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

inline Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  const auto r = static_cast<Eigen::Index>(rows.size());
  const auto c = static_cast<Eigen::Index>(rows.begin()->size());
  Matrix out(r, c);
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    Eigen::Index j = 0;
    for (double x : row) out(i, j++) = x;
    ++i;
  }
  return out;
}

inline double max_abs_diff(const Vector& a, const Vector& b) { return (a - b).cwiseAbs().maxCoeff(); }

/// The 2-state, 3-sensor plant shared by the worked examples.
inline ssr::LinearSystem toy_plant() {
  return ssr::LinearSystem::autonomous(mat({{1, 1}, {0, 1}}), mat({{1, 2}, {1, 0}, {1, 1}}));
}

/// All size-m subsets of {1..q} by scanning bitmasks, sorted lexicographically.
inline std::vector<std::vector<std::size_t>> bitmask_subsets(std::size_t q, std::size_t m) {
  std::vector<std::vector<std::size_t>> out;
  for (std::uint32_t mask = 0; mask < (1u << q); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) != m) continue;
    std::vector<std::size_t> s;
    for (std::size_t i = 0; i < q; ++i)
      if (mask & (1u << i)) s.push_back(i + 1);
    out.push_back(s);
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::uint64_t factorial_choose(std::uint64_t p, std::uint64_t k) {
  // Multiplicative formula in long double, exact for the small arguments used here.
  long double r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) r = r * static_cast<long double>(p - k + i) / static_cast<long double>(i);
  return static_cast<std::uint64_t>(r + 0.5L);
}

inline std::size_t lu_rank(const Matrix& m) {
  if (m.size() == 0) return 0;
  Eigen::FullPivLU<Matrix> lu(m);
  lu.setThreshold(1e-10);
  return static_cast<std::size_t>(lu.rank());
}

/// Classical observability matrix [C; CA; ...; CA^{r-1}] built by repeated multiplication.
inline Matrix observability_matrix(const Matrix& a, const Matrix& c, std::size_t r) {
  Matrix out(c.rows() * static_cast<Eigen::Index>(r), a.cols());
  Matrix block = c;
  for (std::size_t i = 0; i < r; ++i) {
    out.middleRows(static_cast<Eigen::Index>(i) * c.rows(), c.rows()) = block;
    block = block * a;
  }
  return out;
}

/// Normal-equations gain (O^T O)^{-1} O^T.
inline Matrix normal_equations_gain(const Matrix& o) {
  return (o.transpose() * o).inverse() * o.transpose();
}

inline Matrix keep_rows(const Matrix& m, const std::vector<std::size_t>& deleted) {
  std::vector<Eigen::Index> kept;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    if (std::find(deleted.begin(), deleted.end(), static_cast<std::size_t>(i + 1)) == deleted.end()) kept.push_back(i);
  Matrix out(static_cast<Eigen::Index>(kept.size()), m.cols());
  for (std::size_t i = 0; i < kept.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(kept[i]);
  return out;
}

inline Matrix random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c, double lo = -2.0, double hi = 2.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = dist(rng);
  return m;
}

inline Vector random_vector(std::mt19937_64& rng, Eigen::Index n, double lo = -2.0, double hi = 2.0) {
  return random_matrix(rng, n, 1, lo, hi).col(0);
}

}  // namespace ssr_test
