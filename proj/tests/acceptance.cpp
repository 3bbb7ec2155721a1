// Acceptance checks for the reconstruction library. Prints one PASS/FAIL
// line per criterion and exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "ssr/adversary.hpp"
#include "ssr/builtins.hpp"
#include "ssr/combinat.hpp"
#include "ssr/observability.hpp"
#include "ssr/reconstruct.hpp"
#include "ssr/scenario.hpp"
#include "support.hpp"

using namespace ssr;
using namespace ssr_test;

namespace {

using Clock = std::chrono::steady_clock;

class Criterion {
 public:
  Criterion(int id, std::string title) : id_(id), title_(std::move(title)) {}

  void expect(bool ok, const std::string& what) {
    if (!ok) failures_.push_back(what);
  }
  void note(std::string text) { notes_.push_back(std::move(text)); }

  bool report() const {
    const bool ok = failures_.empty();
    std::printf("criterion %2d: %s  %s\n", id_, ok ? "PASS" : "FAIL", title_.c_str());
    for (const auto& n : notes_) std::printf("              %s\n", n.c_str());
    for (const auto& f : failures_) std::printf("              failed: %s\n", f.c_str());
    return ok;
  }

 private:
  int id_;
  std::string title_;
  std::vector<std::string> failures_;
  std::vector<std::string> notes_;
};

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::string show(const Vector& v) {
  std::string out = "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) out += fmt::format("{}{:.6g}", i ? ", " : "", v(i));
  return out + "]";
}

struct Fixture {
  ScenarioConfig config;
  Trajectory traj;
};

Fixture fixture(const char* file) {
  Fixture f{load_scenario(scenario_path(file)), {}};
  f.traj = f.config.simulate();
  return f;
}

bool contains(const std::vector<std::size_t>& v, std::size_t x) { return std::find(v.begin(), v.end(), x) != v.end(); }

// Runs `body`, turning an unexpected exception into a failure.
void guarded(Criterion& c, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    c.expect(false, fmt::format("unexpected exception: {}", e.what()));
  }
}

const Vector kFourdimX0 = vec({25.2, -16.2, 123.3, 4.9});

bool criterion1() {
  Criterion c(1, "known attacked set {1,3}, r=2: gain and x0=[2,1]");
  guarded(c, [&] {
    const auto f = fixture("example1.yaml");
    const auto t0 = Clock::now();
    const auto report = known_support_reconstruct(f.config.system, f.traj.measurements(), 0, SensorSet{1, 3}, 2);
    const double elapsed = ms_since(t0);
    const Matrix gain = least_squares_gain(build_stacked(f.config.system, SensorSet{1, 3}, 2));
    c.expect((gain - mat({{1, 0}, {-1, 1}})).cwiseAbs().maxCoeff() <= 1e-9, "gain differs from [[1,0],[-1,1]]");
    c.expect(report.outcome == Outcome::Unique, "outcome not unique");
    if (report.outcome == Outcome::Unique)
      c.expect(max_abs_diff(report.state(), vec({2, 1})) <= 1e-9, "state " + show(report.state()));
    c.expect(elapsed < 1.0, fmt::format("runtime {:.3f} ms", elapsed));
    c.note(fmt::format("runtime {:.3f} ms", elapsed));
  });
  return c.report();
}

bool criterion2() {
  Criterion c(2, "two attacked sensors: X(1,2) for the three attack scenarios");
  guarded(c, [&] {
    const struct {
      const char* file;
      std::vector<Vector> expected;
    } cases[] = {
        {"example2_gamma1.yaml", {vec({1, 2}), vec({4, 2}), vec({3, 2})}},
        {"example2_gamma2.yaml", {vec({5, 2}), vec({1, 2}), vec({6.3, 2})}},
        {"example2_gamma3.yaml", {vec({5, 2}), vec({4, 2}), vec({1, 2})}},
    };
    for (const auto& cs : cases) {
      const auto f = fixture(cs.file);
      const auto set = candidate_set(f.config.system, f.traj.measurements(), 1, 2, 2);
      c.expect(set.candidates.size() == 3, fmt::format("{}: {} candidates", cs.file, set.candidates.size()));
      bool truth = false;
      for (std::size_t j = 0; j < std::min<std::size_t>(3, set.candidates.size()); ++j) {
        const auto& est = set.candidates[j].estimate;
        c.expect(max_abs_diff(est, cs.expected[j]) <= 1e-9, fmt::format("{}: x({}) = {}", cs.file, j + 1, show(est)));
        truth = truth || max_abs_diff(est, vec({1, 2})) <= 1e-9;
      }
      c.expect(truth, fmt::format("{}: true state missing", cs.file));
    }
  });
  return c.report();
}

bool criterion3() {
  Criterion c(3, "one attacked sensor: Y(1,2) holds [2,1] twice and SESVS is unique");
  guarded(c, [&] {
    for (const char* file : {"example3_gamma1.yaml", "example3_gamma2.yaml", "example3_gamma3.yaml"}) {
      const auto f = fixture(file);
      const auto set = candidate_set(f.config.system, f.traj.measurements(), 1, 2, 2);
      std::size_t matches = 0;
      for (const auto& cand : set.candidates) matches += max_abs_diff(cand.estimate, vec({2, 1})) <= 1e-9;
      c.expect(matches == 2, fmt::format("{}: {} candidates equal [2,1]", file, matches));
      SesvsOptions opts;
      opts.window = 2;
      const auto report = sesvs_reconstruct(f.config.system, f.traj.measurements(), 0, 1, opts);
      c.expect(report.outcome == Outcome::Unique, fmt::format("{}: outcome {}", file, to_string(report.outcome)));
      if (report.outcome == Outcome::Unique)
        c.expect(max_abs_diff(report.state(), vec({2, 1})) <= 1e-9, fmt::format("{}: state {}", file, show(report.state())));
    }
  });
  return c.report();
}

bool criterion4() {
  Criterion c(4, "four-state plant, case 1, SESVS (s=4, tau=1, r=4)");
  guarded(c, [&] {
    const auto f = fixture("fourdim_case1.yaml");
    SesvsOptions opts;
    opts.window = 4;
    const auto t0 = Clock::now();
    const auto report = sesvs_reconstruct(f.config.system, f.traj.measurements(), 0, 4, opts);
    const double elapsed = ms_since(t0);

    const std::vector<Vector> printed{vec({3403.72, 6226.33, -609.49, -2232.29}), kFourdimX0,
                                      vec({431.81, 1354.19, 15.12, -588.06}),
                                      vec({1641.01, 1367.99, -443.54, -358.42}), kFourdimX0,
                                      vec({14837.15, 7180.53, 9125.71, -12807.05})};
    const auto& cands = report.candidates.candidates;
    c.expect(cands.size() == 6, fmt::format("{} candidates", cands.size()));
    for (std::size_t j = 0; j < std::min<std::size_t>(6, cands.size()); ++j)
      c.expect(max_abs_diff(cands[j].estimate, printed[j]) <= 0.01, fmt::format("y({}) = {}", j + 1, show(cands[j].estimate)));

    bool cluster25 = false;
    for (const auto& cl : report.clusters) cluster25 = cluster25 || cl.ordinals == std::vector<std::size_t>{2, 5};
    c.expect(cluster25, "cluster {2,5} not found");
    c.expect(report.outcome == Outcome::Unique, "outcome not unique");
    if (report.outcome == Outcome::Unique)
      c.expect(max_abs_diff(report.state(), kFourdimX0) <= 1e-6, "state " + show(report.state()));
    c.expect(elapsed < 100.0, fmt::format("runtime {:.3f} ms", elapsed));
    c.note(fmt::format("runtime {:.3f} ms", elapsed));
  });
  return c.report();
}

bool criterion5() {
  Criterion c(5, "four-state plant, SESGC (r=2) for case 1; both methods for cases 2-4");
  guarded(c, [&] {
    const auto f = fixture("fourdim_case1.yaml");
    SesgcOptions opts;
    opts.window = 2;
    opts.residual_tol = 0.1;
    const auto report = sesgc_reconstruct(f.config.system, f.traj.measurements(), 0, 4, opts);
    c.expect(!report.history.empty() && report.history[0].surviving == std::vector<std::size_t>{8}, "D1 is not {8}");
    c.expect(report.outcome == Outcome::Unique, "case 1 SESGC not unique");
    if (report.outcome == Outcome::Unique)
      c.expect(max_abs_diff(report.state(), kFourdimX0) <= 1e-6, "case 1 state " + show(report.state()));

    for (const char* file : {"fourdim_case2.yaml", "fourdim_case3.yaml", "fourdim_case4.yaml"}) {
      const auto g = fixture(file);
      const auto v = sesvs_reconstruct(g.config.system, g.traj.measurements(), 0, 4, g.config.sesvs_options());
      const auto s = sesgc_reconstruct(g.config.system, g.traj.measurements(), 0, 4, g.config.sesgc_options());
      for (const auto* r : {&v, &s}) {
        c.expect(r->outcome == Outcome::Unique, fmt::format("{} {}: {}", file, to_string(r->method), to_string(r->outcome)));
        if (r->outcome == Outcome::Unique)
          c.expect(max_abs_diff(r->state(), g.config.x0) <= 1e-6,
                   fmt::format("{} {}: state {}", file, to_string(r->method), show(r->state())));
      }
    }
  });
  return c.report();
}

bool criterion6() {
  Criterion c(6, "four-state plant, five attacked sensors: SESVS refused, SESGC (r=4) unique");
  guarded(c, [&] {
    const auto f = fixture("fourdim_attack2.yaml");
    c.expect(!is_sparse_observable(f.config.system, 6), "reported 6-sparse observable");
    bool refused = false;
    try {
      sesvs_reconstruct(f.config.system, f.traj.measurements(), 0, 5);
    } catch (const PreconditionError&) {
      refused = true;
    }
    c.expect(refused, "SESVS ran without the precondition");

    SesgcOptions opts;
    opts.window = 4;
    const auto report = sesgc_reconstruct(f.config.system, f.traj.measurements(), 0, 5, opts);
    c.expect(!report.history.empty() && report.history[0].surviving == std::vector<std::size_t>{4}, "D1 is not {4}");
    c.expect(report.outcome == Outcome::Unique, "outcome not unique");
    if (report.outcome == Outcome::Unique)
      c.expect(max_abs_diff(report.state(), kFourdimX0) <= 1e-6, "state " + show(report.state()));
  });
  return c.report();
}

bool criterion7() {
  Criterion c(7, "three-inertia drive: SESVS at r=4, SESGC at r=2, fallback from r=3");
  guarded(c, [&] {
    const auto f = fixture("three_inertia.yaml");
    const auto& sys = f.config.system;
    const auto meas = f.traj.measurements();
    const auto t0 = Clock::now();

    SesvsOptions at4 = f.config.sesvs_options();
    at4.window = 4;
    const auto v = sesvs_reconstruct(sys, meas, 0, 4, at4);
    bool cluster123 = false;
    for (const auto& cl : v.clusters)
      if (cl.ordinals == std::vector<std::size_t>{1, 2, 3}) {
        cluster123 = true;
        c.expect(max_abs_diff(cl.representative, f.config.x0) <= 1e-6, "cluster value " + show(cl.representative));
      }
    c.expect(cluster123, "cluster {1,2,3} not found");
    c.expect(v.outcome == Outcome::Unique, "SESVS outcome not unique");
    if (v.candidates.candidates.size() >= 4) {
      const double first = v.candidates.candidates[3].estimate(0);
      c.expect(std::abs(first - (-5962.39)) <= 0.01 * 5962.39, fmt::format("y(4) first coordinate {:.2f}", first));
      c.note(fmt::format("y(4) first coordinate {:.2f}", first));
    } else {
      c.expect(false, "fewer than 4 candidates");
    }

    const auto g = sesgc_reconstruct(sys, meas, 0, 4, f.config.sesgc_options());
    c.expect(g.window == 2, fmt::format("SESGC window {}", g.window));
    c.expect(!g.history.empty() && g.history[0].surviving == std::vector<std::size_t>{1}, "D1 is not {1}");
    c.expect(g.outcome == Outcome::Unique, "SESGC outcome not unique");
    if (g.outcome == Outcome::Unique) c.expect(max_abs_diff(g.state(), f.config.x0) <= 1e-6, "SESGC state");

    const auto fb = sesvs_reconstruct(sys, meas, 0, 4, f.config.sesvs_options());
    std::size_t deficient_at_3 = 0;
    for (const auto& idx : subsets(7, 5)) deficient_at_3 += !CandidateSolver(sys, idx, 3).full_rank();
    c.expect(deficient_at_3 >= 1, "no rank trouble at r=3");
    c.expect(fb.windows_tried == std::vector<std::size_t>{3, 4}, "fallback did not go from r=3 to r=4");
    c.expect(fb.outcome == Outcome::Unique && max_abs_diff(fb.state(), f.config.x0) <= 1e-6, "fallback run not unique");
    c.note(fmt::format("{} of 21 hypotheses rank-deficient at r=3; fallback windows {}", deficient_at_3,
                       fmt::join(fb.windows_tried, ",")));

    const double elapsed = ms_since(t0);
    c.expect(elapsed < 1000.0, fmt::format("runtime {:.3f} ms", elapsed));
    c.note(fmt::format("runtime {:.3f} ms", elapsed));
  });
  return c.report();
}

bool criterion8() {
  Criterion c(8, "500 random sparse observable systems: containment, SESVS, SESGC");
  guarded(c, [&] {
    std::mt19937_64 rng(20240611);
    std::uniform_int_distribution<int> pick_n(1, 4), pick_q(2, 7);
    std::uniform_real_distribution<double> attack_value(-50.0, 50.0);

    std::size_t accepted = 0, rejected = 0, contained = 0, sesvs_runs = 0, sesvs_ok = 0, sesgc_runs = 0, sesgc_ok = 0;
    while (accepted < 500) {
      const auto n = static_cast<std::size_t>(pick_n(rng));
      const auto q = static_cast<std::size_t>(pick_q(rng));
      const auto s = static_cast<std::size_t>(std::uniform_int_distribution<int>(1, static_cast<int>(q) - 1)(rng));
      const auto sys = LinearSystem::autonomous(random_matrix(rng, static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)),
                                                random_matrix(rng, static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(n)));
      if (!is_sparse_observable(sys, s)) {
        ++rejected;
        continue;
      }
      ++accepted;

      const SensorSet gamma = subset_at(
          static_cast<std::size_t>(std::uniform_int_distribution<int>(1, static_cast<int>(*choose(q, s)))(rng)), q, s);
      std::vector<double> values;
      for (std::size_t i = 0; i < 16 * q; ++i) values.push_back(attack_value(rng));
      const AttackScenario attack(gamma, [values, q](std::size_t k, std::size_t i) { return values[k * q + i - 1]; });
      const Vector x0 = random_vector(rng, static_cast<Eigen::Index>(n));
      const auto traj = simulate(sys, x0, {}, attack, 2 * n + 6);
      const auto meas = traj.measurements();

      const std::size_t b = sparse_observable_lower_bound(sys, s);
      const auto set = candidate_set(sys, meas, b - 1, b, s);
      bool hit = false;
      for (const auto& cand : set.candidates)
        hit = hit || (cand.estimate - x0).norm() <= 1e-6 * std::max(1.0, x0.norm());
      contained += hit;
      c.expect(hit, fmt::format("system {}: true state not among the candidates", accepted));

      if (s + 2 <= q && is_sparse_observable(sys, s + 1) && sesvs_guarantee_holds(q, s, 1)) {
        ++sesvs_runs;
        const auto r = sesvs_reconstruct(sys, meas, 0, s);
        const bool ok = r.outcome == Outcome::Unique && max_abs_diff(r.state(), x0) <= 1e-6;
        sesvs_ok += ok;
        c.expect(ok, fmt::format("system {}: SESVS {}", accepted, to_string(r.outcome)));
      }

      SesgcOptions gopts;
      gopts.max_rounds = 5;
      const auto g = sesgc_reconstruct(sys, meas, 0, s, gopts);
      ++sesgc_runs;
      const std::size_t truth = ordinal_of(gamma, q);
      bool kept = !g.history.empty();
      for (const auto& round : g.history) kept = kept && contains(round.surviving, truth);
      sesgc_ok += kept;
      c.expect(kept, fmt::format("system {}: SESGC dropped the true hypothesis", accepted));
    }
    c.note(fmt::format("{} accepted, {} rejected; containment {}/{}", accepted, rejected, contained, accepted));
    c.note(fmt::format("SESVS under the guarantee {}/{}; SESGC kept truth {}/{}", sesvs_ok, sesvs_runs, sesgc_ok, sesgc_runs));
    c.expect(sesvs_runs > 0, "no instance met the SESVS guarantee");
  });
  return c.report();
}

bool criterion9() {
  Criterion c(9, "defeat certificates replay as defeats");
  guarded(c, [&] {
    // SESVS: the duplicated-row fixture, plus random 4-sensor plants.
    std::size_t sesvs_certs = 0, sesvs_good = 0;
    auto replay_sesvs = [&](const LinearSystem& sys, const DefeatCertificate& cert, const Vector& x0) {
      ++sesvs_certs;
      const auto traj = simulate(sys, x0, {}, cert.attack(), cert.end_step + 2);
      SesvsOptions opts;
      opts.window = cert.window;
      opts.fallback = false;
      const auto r = sesvs_reconstruct(sys, traj.measurements(), cert.first_step, cert.gamma.size(), opts);
      bool bias_seen = false;
      for (const auto& st : r.states) bias_seen = bias_seen || max_abs_diff(st - x0, cert.bias) <= 1e-6;
      const bool ok = check_sesvs_defeat(sys, cert.window, cert.attacks).defeated && r.outcome == Outcome::Ambiguous && bias_seen;
      sesvs_good += ok;
      c.expect(ok, fmt::format("SESVS certificate {} did not replay", sesvs_certs));
    };

    const auto dup = load_scenario(scenario_path("duplicate_rows.yaml"));
    const auto dup_certs = synthesize_sesvs_defeat_all(dup.system, 2, dup.gamma, 1);
    c.expect(!dup_certs.empty(), "duplicated-row fixture: no SESVS certificate");
    for (const auto& cert : dup_certs) replay_sesvs(dup.system, cert, dup.x0);

    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 40; ++trial) {
      Matrix cm = random_matrix(rng, 4, 2);
      cm.row(1) = cm.row(0);
      const auto sys = LinearSystem::autonomous(random_matrix(rng, 2, 2), cm);
      if (!is_sparse_observable(sys, 2)) continue;
      const SensorSet gamma{static_cast<std::size_t>(1 + trial % 2)};
      for (const auto& cert : synthesize_sesvs_defeat_all(sys, 2, gamma, 1)) replay_sesvs(sys, cert, random_vector(rng, 2));
    }

    // SESGC: the scalar doubling fixture, plus random plants.
    std::size_t sesgc_certs = 0, sesgc_good = 0;
    auto replay_sesgc = [&](const LinearSystem& sys, const DefeatCertificate& cert, const Vector& x0) {
      ++sesgc_certs;
      const auto traj = simulate(sys, x0, {}, cert.attack(), cert.end_step + cert.rounds + 1);
      SesgcOptions opts;
      opts.window = cert.window;
      opts.max_rounds = cert.rounds;
      opts.fallback = false;
      const auto r = sesgc_reconstruct(sys, traj.measurements(), cert.first_step, cert.gamma.size(), opts);
      const auto v = cert.subsets.front().ordinal;
      bool kept = r.history.size() == cert.rounds;
      for (const auto& round : r.history) kept = kept && contains(round.surviving, v);
      const bool wrong = max_abs_diff(r.candidates.candidates[v - 1].estimate, x0) > 1e-6;
      const bool ok = check_sesgc_defeat(sys, cert.attacks) && kept && wrong;
      sesgc_good += ok;
      c.expect(ok, fmt::format("SESGC certificate {} did not replay", sesgc_certs));
    };

    const auto scalar = load_scenario(scenario_path("scalar_doubling.yaml"));
    const auto sc = synthesize_sesgc_defeat(scalar.system, 1, scalar.gamma, 0, scalar.synth_rounds);
    c.expect(sc.has_value(), "scalar fixture: no SESGC certificate");
    if (sc) replay_sesgc(scalar.system, *sc, scalar.x0);

    for (int trial = 0; trial < 40; ++trial) {
      const auto sys = LinearSystem::autonomous(random_matrix(rng, 2, 2), random_matrix(rng, 3, 2));
      if (!is_sparse_observable(sys, 1) || sparse_observable_lower_bound(sys, 1) > 2) continue;
      const SensorSet gamma{static_cast<std::size_t>(1 + trial % 3)};
      if (const auto cert = synthesize_sesgc_defeat(sys, 2, gamma, 1, 1))
        replay_sesgc(sys, *cert, random_vector(rng, 2));
    }
    c.note(fmt::format("SESVS certificates replayed {}/{}; SESGC {}/{}", sesvs_good, sesvs_certs, sesgc_good, sesgc_certs));
  });
  return c.report();
}

bool criterion10() {
  Criterion c(10, "subset enumeration listings and the majority guarantee");
  guarded(c, [&] {
    const std::vector<SensorSet> pairs{{1, 2}, {1, 3}, {1, 4}, {2, 3}, {2, 4}, {3, 4}};
    const auto got = enumerate_subsets(4, 2);
    c.expect(got.size() == pairs.size(), "q=4, m=2 count");
    for (std::size_t i = 0; i < std::min(got.size(), pairs.size()); ++i)
      c.expect(got[i].subset == pairs[i] && got[i].ordinal == i + 1, "q=4, m=2 entry " + std::to_string(i + 1));

    const std::vector<SensorSet> lambda{{1, 2, 3, 4, 5}, {1, 2, 3, 4, 6}, {1, 2, 3, 5, 6},
                                        {1, 2, 4, 5, 6}, {1, 3, 4, 5, 6}, {2, 3, 4, 5, 6}};
    const auto fives = enumerate_subsets(6, 5);
    c.expect(fives.size() == 6, "q=6, m=5 count");
    for (std::size_t i = 0; i < std::min<std::size_t>(6, fives.size()); ++i)
      c.expect(fives[i].subset == lambda[i], "q=6, m=5 entry " + std::to_string(i + 1));

    // Attacked-set hypotheses used by SESGC on the same plant: {1,3,4,6} is the 8th of 15.
    const auto fours = enumerate_subsets(6, 4);
    c.expect(fours.size() == 15 && fours[7].subset == SensorSet{1, 3, 4, 6}, "q=6, m=4 entry 8");
    c.expect(enumerate_subsets(6, 5)[3].subset == SensorSet{1, 2, 4, 5, 6}, "q=6, m=5 entry 4");

    c.expect(sesvs_guarantee_holds(3, 1, 1), "guarantee(3,1,1) is false");
  });
  return c.report();
}

}  // namespace

int main() {
  bool ok = true;
  for (auto run : {criterion1, criterion2, criterion3, criterion4, criterion5, criterion6, criterion7, criterion8,
                   criterion9, criterion10})
    ok = run() && ok;
  return ok ? 0 : 1;
}
