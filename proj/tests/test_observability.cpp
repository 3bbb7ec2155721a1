#include "doctest.h"

#include "ssr/builtins.hpp"
#include "ssr/observability.hpp"
#include "support.hpp"

using namespace ssr;
using namespace ssr_test;

TEST_CASE("delete_rows") {
  const Matrix m = mat({{1, 0}, {2, 3}, {4, 5}, {6, 6}});
  CHECK(delete_rows(m, SensorSet{1, 3, 4}) == mat({{2, 3}}));
  CHECK(delete_rows(m, SensorSet{}) == m);
  CHECK(delete_rows(toy_plant().c(), SensorSet{1, 3}) == mat({{1, 0}}));
  CHECK_THROWS_AS(delete_rows(m, SensorSet{5}), DimensionError);
}

TEST_CASE("build_stacked: toy plant with sensors 1 and 3 deleted") {
  const auto ops = build_stacked(toy_plant(), SensorSet{1, 3}, 2);
  CHECK(ops.observability == mat({{1, 0}, {1, 1}}));
  CHECK(ops.input_map.size() == 0);
  const auto one = build_stacked(toy_plant(), SensorSet{2}, 1);
  CHECK(one.observability == mat({{1, 2}, {1, 1}}));
}

TEST_CASE("build_stacked: three-inertia dimensions") {
  const auto sys = builtin("three_inertia").system;
  const auto ops = build_stacked(sys, SensorSet{1, 2, 3, 4}, 2);
  CHECK(ops.observability.rows() == 6);
  CHECK(ops.observability.cols() == 6);
  CHECK(ops.input_map.rows() == 6);
  CHECK(ops.input_map.cols() == 1);
  CHECK(numerical_rank(ops.observability) == lu_rank(ops.observability));
}

TEST_CASE("build_stacked: input map reproduces simulated outputs") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const LinearSystem sys(random_matrix(rng, 3, 3), random_matrix(rng, 3, 2), random_matrix(rng, 5, 3));
    std::vector<Vector> u;
    for (int k = 0; k < 8; ++k) u.push_back(random_vector(rng, 2));
    const auto traj = simulate(sys, random_vector(rng, 3), u, AttackScenario::none(), 8);
    for (std::size_t r = 1; r <= 4; ++r) {
      for (const auto& si : enumerate_subsets(5, 2)) {
        const auto ops = build_stacked(sys, si.subset, r);
        const std::size_t k = 7;
        const auto win = stack_measurements(traj.measurements(), si.subset, k, r);
        const Vector resid = win.outputs - ops.observability * traj.states[k - r + 1] - ops.input_map * win.inputs;
        CHECK(resid.norm() <= 1e-9 * std::max(1.0, win.outputs.norm()));
      }
    }
  }
}

TEST_CASE("build_stacked: deleting sensors deletes the matching block rows") {
  std::mt19937_64 rng(17);
  const auto sys = LinearSystem::autonomous(random_matrix(rng, 3, 3), random_matrix(rng, 5, 3));
  for (std::size_t r = 1; r <= 3; ++r) {
    const auto full = build_stacked(sys, SensorSet{}, r).observability;
    for (const auto& si : enumerate_subsets(5, 2)) {
      const auto ops = build_stacked(sys, si.subset, r);
      std::vector<std::size_t> rows;
      for (std::size_t b = 0; b < r; ++b)
        for (auto i : si.subset) rows.push_back(b * 5 + i);
      CHECK((ops.observability - keep_rows(full, rows)).norm() == 0.0);
    }
  }
}

TEST_CASE("numerical rank agrees with LU rank and the Gram rank") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = static_cast<Eigen::Index>(1 + trial % 4);
    const auto q = static_cast<Eigen::Index>(1 + (trial / 4) % 5);
    const auto sys = LinearSystem::autonomous(random_matrix(rng, n, n), random_matrix(rng, q, n));
    for (std::size_t r = 1; r <= static_cast<std::size_t>(n); ++r) {
      const auto o = build_stacked(sys, SensorSet{}, r).observability;
      CHECK(numerical_rank(o) == lu_rank(o));
      CHECK(numerical_rank(o.transpose() * o) == numerical_rank(o));
    }
  }
  CHECK(numerical_rank(mat({{1, 2}, {2, 4}})) == 1);
  CHECK(numerical_rank(Matrix::Zero(3, 2)) == 0);
}

TEST_CASE("min_window_for_full_rank") {
  CHECK(min_window_for_full_rank(toy_plant(), SensorSet{1, 3}) == 2u);
  CHECK(min_window_for_full_rank(toy_plant(), SensorSet{}) == 1u);
  const auto id = LinearSystem::autonomous(0.5 * Matrix::Identity(3, 3), Matrix::Identity(3, 3));
  CHECK(min_window_for_full_rank(id, SensorSet{}) == 1u);
  const auto blind = LinearSystem::autonomous(Matrix::Identity(2, 2), mat({{1, 0}}));
  CHECK_FALSE(min_window_for_full_rank(blind, SensorSet{}).has_value());
}

TEST_CASE("min_window_for_full_rank matches the classical observability test") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = static_cast<Eigen::Index>(1 + trial % 4);
    Matrix a = random_matrix(rng, n, n);
    Matrix c = random_matrix(rng, 3, n);
    if (trial % 3 == 0) c.row(1) = c.row(0);  // force some rank loss
    if (trial % 5 == 0) a.col(0).setZero();
    const auto sys = LinearSystem::autonomous(a, c);
    for (const auto& si : enumerate_subsets(3, 1)) {
      const Matrix cs = keep_rows(c, si.subset.indices());
      std::optional<std::size_t> oracle;
      for (std::size_t r = 1; r <= static_cast<std::size_t>(n); ++r) {
        if (lu_rank(observability_matrix(a, cs, r)) == static_cast<std::size_t>(n)) {
          oracle = r;
          break;
        }
      }
      const auto got = min_window_for_full_rank(sys, si.subset);
      CHECK(got == oracle);
      // rank is nondecreasing in r
      std::size_t prev = 0;
      for (std::size_t r = 1; r <= static_cast<std::size_t>(n) + 1; ++r) {
        const auto rk = numerical_rank(build_stacked(sys, si.subset, r).observability);
        CHECK(rk >= prev);
        prev = rk;
      }
    }
  }
}

TEST_CASE("sparse observability of the named plants") {
  const auto toy = toy_plant();
  CHECK(is_sparse_observable(toy, 2));
  CHECK(is_sparse_observable(toy, 0));
  CHECK(sparse_observable_lower_bound(toy, 2) == 2);
  CHECK(max_sparse_observability(toy) == 2u);

  const auto fd = builtin("fourdim").system;
  CHECK(is_sparse_observable(fd, 5));
  CHECK(is_sparse_observable(fd, 4));
  const auto report = analyze_observability(fd, 4);
  REQUIRE(report.subsets.size() == 15);
  CHECK(*report.lower_bound() <= 4);
  std::size_t at_most_two = 0;
  for (const auto& cert : report.subsets) at_most_two += (cert.min_window && *cert.min_window <= 2);
  CHECK(at_most_two > 0);
}

TEST_CASE("three-inertia: 4-sparse observable, not 5-sparse observable") {
  const auto sys = builtin("three_inertia").system;
  CHECK(is_sparse_observable(sys, 4));
  CHECK_FALSE(is_sparse_observable(sys, 5));
  const auto report = analyze_observability(sys, 5);
  CHECK(report.unobservable_subsets() == std::vector<SensorSet>{SensorSet{1, 2, 3, 6, 7}});
  CHECK(report.observable_lower_bound() == 4u);
  CHECK_FALSE(report.lower_bound().has_value());
  try {
    sparse_observable_lower_bound(sys, 5);
    FAIL("expected NotObservableError");
  } catch (const NotObservableError& e) {
    CHECK(e.failing_subset() == SensorSet{1, 2, 3, 6, 7});
  }
}

TEST_CASE("zero output matrix is not even 0-sparse observable") {
  const auto sys = LinearSystem::autonomous(Matrix::Identity(2, 2), Matrix::Zero(2, 2));
  CHECK_FALSE(is_sparse_observable(sys, 0));
  CHECK_FALSE(max_sparse_observability(sys).has_value());
  CHECK_THROWS_AS(sparse_observable_lower_bound(sys, 0), NotObservableError);
  CHECK_FALSE(analyze_observability(sys, 2).sparse_observable());
}

TEST_CASE("stack_measurements") {
  const auto sys = toy_plant();
  const auto traj = simulate(sys, vec({2, 1}), {}, AttackScenario::none(), 3);
  const auto win = stack_measurements(traj.measurements(), SensorSet{1, 3}, 1, 2);
  CHECK(win.outputs == vec({2, 3}));
  CHECK(win.inputs.size() == 0);

  const auto single = stack_measurements(traj.measurements(), SensorSet{2}, 2, 1);
  CHECK(single.outputs == vec({traj.measured_outputs[2](0), traj.measured_outputs[2](2)}));

  const AttackScenario attack(SensorSet{1}, [](std::size_t, std::size_t) { return 3.5; });
  const auto attacked = simulate(sys, vec({2, 1}), {}, attack, 1);
  const auto only3 = stack_measurements(attacked.measurements(), SensorSet{1, 2}, 1, 2);
  CHECK(only3.outputs == vec({attacked.measured_outputs[0](2), attacked.measured_outputs[1](2)}));

  CHECK_THROWS(stack_measurements(traj.measurements(), SensorSet{1}, 0, 2));
  CHECK_THROWS(stack_measurements(traj.measurements(), SensorSet{1}, 4, 2));
}
