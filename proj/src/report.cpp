#include "ssr/report.hpp"

#include <chrono>
#include <cmath>
#include <iterator>
#include <limits>
#include <algorithm>
#include <utility>
#include <vector>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "ssr/adversary.hpp"
#include "ssr/combinat.hpp"
#include "ssr/observability.hpp"

namespace ssr {

int exit_code_for(Outcome o) noexcept {
  switch (o) {
    case Outcome::Unique: return kExitOk;
    case Outcome::Ambiguous: return kExitAmbiguous;
    case Outcome::Infeasible: return kExitInfeasible;
  }
  return kExitUsage;
}

namespace {

using Eigen::Index;
using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// Flat JSON object: dotted keys, scalar or array values, insertion order.
class FlatJson {
 public:
  void number(std::string key, double v) { put(std::move(key), num(v)); }
  void integer(std::string key, std::size_t v) { put(std::move(key), std::to_string(v)); }
  void integer(std::string key, std::optional<std::size_t> v) { put(std::move(key), v ? std::to_string(*v) : "null"); }
  void boolean(std::string key, bool v) { put(std::move(key), v ? "true" : "false"); }
  void text(std::string key, std::string_view v) { put(std::move(key), quote(v)); }
  void vector(std::string key, const Vector& v) { put(std::move(key), array(v)); }
  void indices(std::string key, const std::vector<std::size_t>& v) { put(std::move(key), fmt::format("[{}]", fmt::join(v, ", "))); }
  void set(std::string key, const SensorSet& s) { indices(std::move(key), s.indices()); }
  void raw(std::string key, std::string json) { put(std::move(key), std::move(json)); }

  void vectors(std::string key, const std::vector<Vector>& vs) {
    std::vector<std::string> parts;
    for (const auto& v : vs) parts.push_back(array(v));
    put(std::move(key), fmt::format("[{}]", fmt::join(parts, ", ")));
  }
  void sets(std::string key, const std::vector<SensorSet>& ss) {
    std::vector<std::string> parts;
    for (const auto& s : ss) parts.push_back(fmt::format("[{}]", fmt::join(s.indices(), ", ")));
    put(std::move(key), fmt::format("[{}]", fmt::join(parts, ", ")));
  }
  void texts(std::string key, const std::vector<std::string>& ts) {
    std::vector<std::string> parts;
    for (const auto& t : ts) parts.push_back(quote(t));
    put(std::move(key), fmt::format("[{}]", fmt::join(parts, ", ")));
  }

  std::string dump() const {
    std::string out = "{\n";
    for (std::size_t i = 0; i < items_.size(); ++i)
      out += fmt::format("  {}: {}{}\n", quote(items_[i].first), items_[i].second, i + 1 < items_.size() ? "," : "");
    out += "}\n";
    return out;
  }

 private:
  void put(std::string key, std::string raw) { items_.emplace_back(std::move(key), std::move(raw)); }

  static std::string num(double v) { return std::isfinite(v) ? fmt::format("{:.12g}", v) : "null"; }

  static std::string array(const Vector& v) {
    std::vector<std::string> parts;
    for (Index i = 0; i < v.size(); ++i) parts.push_back(num(v(i)));
    return fmt::format("[{}]", fmt::join(parts, ", "));
  }

  static std::string quote(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
      switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        case '\r': out += "\\r"; break;
        default:
          if (static_cast<unsigned char>(c) < 0x20)
            out += fmt::format("\\u{:04x}", static_cast<unsigned>(c));
          else
            out += c;
      }
    }
    return out + "\"";
  }

  std::vector<std::pair<std::string, std::string>> items_;
};

std::string show(const Vector& v) {
  std::vector<std::string> parts;
  for (Index i = 0; i < v.size(); ++i) parts.push_back(fmt::format("{:.6g}", v(i)));
  return fmt::format("[{}]", fmt::join(parts, ", "));
}

std::string show(const std::vector<std::size_t>& v) { return fmt::format("{{{}}}", fmt::join(v, ",")); }

std::string show_opt(std::optional<std::size_t> v) { return v ? std::to_string(*v) : "none"; }

struct Text {
  std::string buf;
  template <typename... Args>
  void line(fmt::format_string<Args...> f, Args&&... args) {
    fmt::format_to(std::back_inserter(buf), f, std::forward<Args>(args)...);
    buf += '\n';
  }
};

void header(Text& t, FlatJson& j, std::string_view verb, const ScenarioConfig& cfg) {
  const auto& sys = cfg.system;
  t.line("scenario  {}", cfg.name);
  t.line("system    n={} p={} q={}{}", sys.n(), sys.p(), sys.q(),
         cfg.builtin ? fmt::format(" (builtin {})", *cfg.builtin) : std::string());
  j.text("verb", verb);
  j.text("scenario", cfg.name);
  j.integer("system.n", sys.n());
  j.integer("system.p", sys.p());
  j.integer("system.q", sys.q());
  j.text("system.builtin", cfg.builtin.value_or(""));
  j.integer("s", cfg.s);
  j.set("gamma", cfg.gamma);
  j.integer("start", cfg.start);
}

void footer(FlatJson& j, const ScenarioConfig& cfg, int exit_code) {
  j.integer("exit_code", static_cast<std::size_t>(exit_code));
  j.text("resolved_config", emit_resolved(cfg));
}

void sparse_line(Text& t, FlatJson& j, const ObservabilityReport& rep, bool details) {
  const std::string key = fmt::format("sparse.{}", rep.sparsity);
  const auto unobs = rep.unobservable_subsets();
  t.line("  s={:<3} observable={:<4} b={:<5} b(observable)={:<5} unobservable={}", rep.sparsity,
         rep.sparse_observable() ? "yes" : "no", show_opt(rep.lower_bound()), show_opt(rep.observable_lower_bound()),
         unobs.size());
  j.boolean(key + ".observable", rep.sparse_observable());
  j.integer(key + ".lower_bound", rep.lower_bound());
  j.integer(key + ".observable_lower_bound", rep.observable_lower_bound());
  j.sets(key + ".unobservable", unobs);
  if (!details) return;
  std::vector<std::string> parts;
  std::vector<std::string> raw;
  for (const auto& c : rep.subsets) {
    parts.push_back(fmt::format("{}:{}", c.subset.ordinal, show_opt(c.min_window)));
    raw.push_back(c.min_window ? std::to_string(*c.min_window) : "null");
  }
  t.line("         min r per hypothesis  {}", fmt::join(parts, " "));
  j.raw(key + ".min_windows", fmt::format("[{}]", fmt::join(raw, ", ")));
}

}  // namespace

RunReport run_audit(const ScenarioConfig& cfg, const RunOptions& options) {
  const auto t0 = Clock::now();
  Text t;
  FlatJson j;
  header(t, j, "audit", cfg);
  const auto& sys = cfg.system;
  const std::size_t q = sys.q();

  const auto s_max = max_sparse_observability(sys);
  t.line("s_max     {}", show_opt(s_max));
  j.integer("s_max", s_max);

  t.line("");
  t.line("sparse observability");
  const std::size_t sweep_end = std::min(q, s_max ? *s_max + 2 : std::size_t{1});
  std::vector<std::size_t> levels;
  for (std::size_t s = 0; s < sweep_end; ++s) levels.push_back(s);
  for (std::size_t s : {cfg.s, cfg.s + cfg.tau})
    if (s < q && std::find(levels.begin(), levels.end(), s) == levels.end()) levels.push_back(s);
  std::sort(levels.begin(), levels.end());
  for (std::size_t s : levels) sparse_line(t, j, analyze_observability(sys, s), s == cfg.s || s == cfg.s + cfg.tau);

  t.line("");
  t.line("SESVS guarantee at s={}: C(q, s+tau) < 2 C(q-s, tau)", cfg.s);
  for (std::size_t tau = 1; cfg.s + tau + 1 <= q; ++tau) {
    const auto lhs = *choose(q, cfg.s + tau);
    const auto rhs = 2 * *choose(q - cfg.s, tau);
    const bool holds = sesvs_guarantee_holds(q, cfg.s, tau);
    t.line("  tau={:<3} {:>8} < {:<8} {}", tau, lhs, rhs, holds ? "holds" : "fails");
    const std::string key = fmt::format("guarantee.{}", tau);
    j.integer(key + ".lhs", lhs);
    j.integer(key + ".rhs", rhs);
    j.boolean(key + ".holds", holds);
  }
  if (cfg.s + 2 > q) t.line("  none: needs s + tau <= q - 1");

  const double elapsed = ms_since(t0);
  t.line("");
  t.line("time      {:.3f} ms", elapsed);
  if (options.machine_timings) j.number("time_ms", elapsed);
  footer(j, cfg, kExitOk);
  return {kExitOk, t.buf, j.dump()};
}

namespace {

void method_section(Text& t, FlatJson& j, const ReconstructionReport& rep, const Vector& truth, double elapsed,
                    bool machine_timings) {
  const std::string m = to_string(rep.method);
  auto key = [&](std::string_view k) { return fmt::format("{}.{}", m, k); };

  std::string params;
  if (rep.method == Method::Sesvs) params = fmt::format("tau={}  ", rep.tau);
  t.line("");
  t.line("{}  {}r={} (nominal {})  steps {}..{}", m, params, rep.window, rep.nominal_window, rep.start_step,
         rep.end_step);
  j.boolean(key("applicable"), true);
  j.integer(key("window"), rep.window);
  j.integer(key("nominal_window"), rep.nominal_window);
  j.indices(key("windows_tried"), rep.windows_tried);
  j.integer(key("start_step"), rep.start_step);
  j.integer(key("end_step"), rep.end_step);
  if (rep.method == Method::Sesvs) j.integer(key("tau"), rep.tau);

  t.line("  {:>4}  {:<18} {:<4} {}", "ord", "deleted", "ok", "estimate");
  for (const auto& c : rep.candidates.candidates) {
    t.line("  {:>4}  {:<18} {:<4} {}", c.ordinal, c.subset.to_string(), c.solver_ok ? "yes" : "no", show(c.estimate));
    const std::string ck = key(fmt::format("candidate.{}", c.ordinal));
    j.set(ck + ".deleted", c.subset);
    j.boolean(ck + ".ok", c.solver_ok);
    j.vector(ck + ".estimate", c.estimate);
  }

  if (rep.method == Method::Sesvs) {
    t.line("  clusters (qualify at size >= {})", rep.cluster_threshold);
    j.integer(key("cluster_threshold"), rep.cluster_threshold);
  }
  for (std::size_t r = 0; r < rep.history.size(); ++r) {
    const auto& h = rep.history[r];
    std::vector<std::string> res;
    for (std::size_t i = 0; i < h.tested.size(); ++i) res.push_back(fmt::format("{}:{:.3g}", h.tested[i], h.residuals[i]));
    t.line("  round {}  residuals {}", h.index, fmt::join(res, " "));
    t.line("           D_{} = {}", h.index, show(h.surviving));
    const std::string rk = key(fmt::format("round.{}", h.index));
    j.indices(rk + ".tested", h.tested);
    j.vector(rk + ".residuals", Eigen::Map<const Vector>(h.residuals.data(), static_cast<Index>(h.residuals.size())));
    j.indices(rk + ".surviving", h.surviving);
  }
  if (rep.method == Method::Sesgc) j.integer(key("rounds"), rep.rounds);
  for (std::size_t i = 0; i < rep.clusters.size(); ++i) {
    const auto& cl = rep.clusters[i];
    if (rep.method != Method::Known)
      t.line("    {:<20} size {:<3} {}  spread {:.2g}", show(cl.ordinals), cl.ordinals.size(), show(cl.representative),
             cl.spread);
    const std::string kk = key(fmt::format("cluster.{}", i + 1));
    j.indices(kk + ".ordinals", cl.ordinals);
    j.vector(kk + ".representative", cl.representative);
    j.number(kk + ".spread", cl.spread);
  }

  for (const auto& n : rep.notes) t.line("  note: {}", n);
  j.sets(key("excluded"), rep.excluded);
  j.texts(key("notes"), rep.notes);

  t.line("  outcome   {}", to_string(rep.outcome));
  j.text(key("outcome"), to_string(rep.outcome));
  j.vectors(key("states"), rep.states);
  for (const auto& s : rep.states) {
    const double err = (s - truth).lpNorm<Eigen::Infinity>();
    t.line("  state     {}   |error| {:.3g}", show(s), err);
  }
  if (rep.outcome == Outcome::Unique) j.number(key("error"), (rep.states.front() - truth).lpNorm<Eigen::Infinity>());
  j.integer(key("exit_code"), static_cast<std::size_t>(exit_code_for(rep.outcome)));
  t.line("  time      {:.3f} ms", elapsed);
  if (machine_timings) j.number(key("time_ms"), elapsed);
}

void not_applicable(Text& t, FlatJson& j, Method method, const std::string& why) {
  const std::string m = to_string(method);
  t.line("");
  t.line("{}  not applicable: {}", m, why);
  j.boolean(m + ".applicable", false);
  j.text(m + ".reason", why);
}

}  // namespace

RunReport run_reconstruct(const ScenarioConfig& cfg, const RunOptions& options) {
  Text t;
  FlatJson j;
  header(t, j, "reconstruct", cfg);

  const auto t_sim = Clock::now();
  const Trajectory traj = cfg.simulate();
  const double sim_ms = ms_since(t_sim);
  const Measurements meas = traj.measurements();
  if (cfg.start >= traj.states.size())
    throw ConfigError(fmt::format("start step {} is past the horizon {}", cfg.start, cfg.horizon));
  const Vector& truth = traj.states[cfg.start];

  const auto s_max = max_sparse_observability(cfg.system);
  t.line("attack    gamma={} s={}", cfg.gamma.to_string(), cfg.s);
  t.line("audit     s_max={}", show_opt(s_max));
  t.line("truth     x_{} = {}", cfg.start, show(truth));
  j.integer("s_max", s_max);
  j.vector("truth", truth);
  j.integer("horizon", cfg.horizon);

  std::vector<Method> methods;
  switch (cfg.method) {
    case MethodChoice::Known: methods = {Method::Known}; break;
    case MethodChoice::Sesvs: methods = {Method::Sesvs}; break;
    case MethodChoice::Sesgc: methods = {Method::Sesgc}; break;
    case MethodChoice::Both: methods = {Method::Sesvs, Method::Sesgc}; break;
  }

  int exit_code = -1;
  for (Method method : methods) {
    const auto t0 = Clock::now();
    try {
      ReconstructionReport rep;
      if (method == Method::Known)
        rep = known_support_reconstruct(cfg.system, meas, cfg.start, cfg.gamma, cfg.known_window());
      else if (method == Method::Sesvs)
        rep = sesvs_reconstruct(cfg.system, meas, cfg.start, cfg.s, cfg.sesvs_options());
      else
        rep = sesgc_reconstruct(cfg.system, meas, cfg.start, cfg.s, cfg.sesgc_options());
      method_section(t, j, rep, truth, ms_since(t0), options.machine_timings);
      exit_code = std::max(exit_code, exit_code_for(rep.outcome));
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      not_applicable(t, j, method, e.what());
    }
  }
  if (exit_code < 0) exit_code = kExitUsage;

  t.line("");
  t.line("simulate  {:.3f} ms", sim_ms);
  t.line("exit      {}", exit_code);
  if (options.machine_timings) j.number("simulate_ms", sim_ms);
  footer(j, cfg, exit_code);
  return {exit_code, t.buf, j.dump()};
}

namespace {

std::size_t synthesis_window(const ScenarioConfig& cfg, std::size_t m, std::optional<std::size_t> requested) {
  if (requested) return *requested;
  if (cfg.strict_observability) return sparse_observable_lower_bound(cfg.system, m);
  const auto b = analyze_observability(cfg.system, m).observable_lower_bound();
  if (!b) throw NotObservableError(fmt::format("no size-{} deletion leaves an observable pair", m), SensorSet{});
  return *b;
}

void certificate_section(Text& t, FlatJson& j, const DefeatCertificate& cert) {
  std::vector<std::size_t> ordinals;
  std::vector<SensorSet> sets;
  for (const auto& s : cert.subsets) {
    ordinals.push_back(s.ordinal);
    sets.push_back(s.subset);
  }
  std::vector<std::string> shown;
  for (const auto& s : sets) shown.push_back(s.to_string());
  t.line("certificate");
  t.line("  hypotheses  {}  (ordinals {})", fmt::join(shown, " "), show(ordinals));
  t.line("  bias        {}", show(cert.bias));
  t.line("  window      r={}  k={}{}", cert.window, cert.end_step,
         cert.target == Method::Sesgc ? fmt::format("  rounds={}", cert.rounds) : std::string());
  for (std::size_t i = 0; i < cert.raw.size(); ++i) t.line("  a_{:<3}       {}", cert.first_step + i, show(cert.raw[i]));
  j.boolean("certificate.found", true);
  j.indices("certificate.ordinals", ordinals);
  j.sets("certificate.subsets", sets);
  j.vector("certificate.bias", cert.bias);
  j.integer("certificate.window", cert.window);
  j.integer("certificate.end_step", cert.end_step);
  j.integer("certificate.rounds", cert.rounds);
  j.integer("certificate.first_step", cert.first_step);
  j.vectors("certificate.attack", cert.raw);
}

}  // namespace

RunReport run_attack_synth(const ScenarioConfig& cfg, Method target, const RunOptions& options) {
  if (target == Method::Known) throw ConfigError("attack-synth targets sesvs or sesgc");
  const auto t0 = Clock::now();
  Text t;
  FlatJson j;
  header(t, j, "attack-synth", cfg);
  j.text("target", to_string(target));
  if (cfg.gamma.size() != cfg.s)
    throw ConfigError(fmt::format("attack-synth needs |gamma| = s (gamma {} has {} sensors, s = {})",
                                  cfg.gamma.to_string(), cfg.gamma.size(), cfg.s));

  const bool sesvs = target == Method::Sesvs;
  std::size_t window = 0;
  std::optional<DefeatCertificate> cert;
  try {
    if (sesvs) {
      window = synthesis_window(cfg, cfg.s + 1, cfg.sesvs_options().window);
      cert = synthesize_sesvs_defeat(cfg.system, window, cfg.gamma, cfg.start + window - 1);
    } else {
      window = synthesis_window(cfg, cfg.s, cfg.sesgc_options().window);
      cert = synthesize_sesgc_defeat(cfg.system, window, cfg.gamma, cfg.start + window - 1, cfg.synth_rounds);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    t.line("target    {}  not applicable: {}", to_string(target), e.what());
    j.boolean("certificate.found", false);
    j.text("reason", e.what());
    footer(j, cfg, kExitUsage);
    return {kExitUsage, t.buf, j.dump()};
  }
  t.line("target    {}  r={}  k={}", to_string(target), window, cfg.start + window - 1);
  t.line("");

  if (!cert) {
    t.line("certificate  none: every hypothesis family admits only the zero attack");
    t.line("time      {:.3f} ms", ms_since(t0));
    j.boolean("certificate.found", false);
    footer(j, cfg, kExitInfeasible);
    return {kExitInfeasible, t.buf, j.dump()};
  }
  certificate_section(t, j, *cert);

  // Replay the certificate's attack from the scenario's initial state.
  const std::size_t needed = cert->end_step + cert->rounds + 1;
  ScenarioConfig replay = cfg;
  replay.horizon = std::max(cfg.horizon, needed);
  if (!replay.input_steps.empty() && replay.input_steps.size() < replay.horizon) replay.horizon = cfg.horizon;
  const Trajectory traj = ssr::simulate(replay.system, replay.x0, replay.inputs(), cert->attack(), replay.horizon);
  const Vector& truth = traj.states[cfg.start];

  t.line("");
  t.line("closed loop");
  ReconstructionReport rep;
  if (sesvs) {
    SesvsOptions o = cfg.sesvs_options();
    o.window = window;
    o.fallback = false;
    rep = sesvs_reconstruct(cfg.system, traj.measurements(), cfg.start, cfg.s, o);
    double bias_error = std::numeric_limits<double>::infinity();
    for (const auto& st : rep.states) bias_error = std::min(bias_error, (st - truth - cert->bias).lpNorm<Eigen::Infinity>());
    t.line("  outcome     {}", to_string(rep.outcome));
    for (const auto& st : rep.states) t.line("  state       {}  offset {}", show(st), show(st - truth));
    t.line("  |measured bias - certificate bias| {:.3g}", bias_error);
    j.number("closed_loop.bias_error", bias_error);
  } else {
    SesgcOptions o = cfg.sesgc_options();
    o.window = window;
    o.fallback = false;
    o.max_rounds = cert->rounds;
    rep = sesgc_reconstruct(cfg.system, traj.measurements(), cfg.start, cfg.s, o);
    const std::size_t v = cert->subsets.front().ordinal;
    bool kept = rep.history.size() == cert->rounds;
    for (const auto& h : rep.history) kept = kept && std::find(h.surviving.begin(), h.surviving.end(), v) != h.surviving.end();
    const auto& est = rep.candidates.candidates.at(v - 1).estimate;
    t.line("  outcome     {}", to_string(rep.outcome));
    t.line("  hypothesis {} survives all {} rounds: {}", v, cert->rounds, kept ? "yes" : "no");
    t.line("  its estimate {}  offset {}", show(est), show(est - truth));
    j.boolean("closed_loop.wrong_kept", kept);
    j.vector("closed_loop.wrong_estimate", est);
  }
  j.text("closed_loop.outcome", to_string(rep.outcome));
  j.vector("closed_loop.truth", truth);
  j.vectors("closed_loop.states", rep.states);

  const double elapsed = ms_since(t0);
  t.line("");
  t.line("time      {:.3f} ms", elapsed);
  if (options.machine_timings) j.number("time_ms", elapsed);
  footer(j, cfg, kExitOk);
  return {kExitOk, t.buf, j.dump()};
}

}  // namespace ssr
