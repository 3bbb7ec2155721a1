#include "ssr/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "ssr/builtins.hpp"

namespace ssr {

using Eigen::Index;

const char* to_string(MethodChoice m) noexcept {
  switch (m) {
    case MethodChoice::Known: return "known";
    case MethodChoice::Sesvs: return "sesvs";
    case MethodChoice::Sesgc: return "sesgc";
    case MethodChoice::Both: return "both";
  }
  return "?";
}

namespace {

class Reader {
 public:
  explicit Reader(std::string_view origin) : origin_(origin) {}

  [[noreturn]] void fail(const YAML::Node& node, std::string_view field, const std::string& what) const {
    const auto mark = node.Mark();
    if (mark.line >= 0)
      throw ConfigError(fmt::format("{}:{}:{}: {}: {}", origin_, mark.line + 1, mark.column + 1, field, what));
    throw ConfigError(fmt::format("{}: {}: {}", origin_, field, what));
  }

  void only_keys(const YAML::Node& map, std::string_view field, std::initializer_list<std::string_view> keys) const {
    if (!map.IsMap()) fail(map, field, "expected a mapping");
    for (const auto& kv : map) {
      const auto key = kv.first.as<std::string>();
      if (std::find(keys.begin(), keys.end(), key) == keys.end())
        fail(kv.first, field.empty() ? key : fmt::format("{}.{}", field, key), "unknown key");
    }
  }

  double number(const YAML::Node& n, std::string_view field) const {
    if (!n.IsScalar()) fail(n, field, "expected a number");
    try {
      Expression e = Expression::parse(n.Scalar());
      if (!e.is_constant()) fail(n, field, "expected a constant");
      const double v = e(0.0);
      if (!std::isfinite(v)) fail(n, field, "value is not finite");
      return v;
    } catch (const ConfigError& e) {
      if (std::string_view(e.what()).starts_with(origin_)) throw;
      fail(n, field, e.what());
    }
  }

  std::size_t count(const YAML::Node& n, std::string_view field) const {
    if (!n.IsScalar()) fail(n, field, "expected a non-negative integer");
    try {
      const auto v = n.as<long long>();
      if (v < 0) fail(n, field, "expected a non-negative integer");
      return static_cast<std::size_t>(v);
    } catch (const YAML::Exception&) {
      fail(n, field, fmt::format("'{}' is not an integer", n.Scalar()));
    }
  }

  bool boolean(const YAML::Node& n, std::string_view field) const {
    try {
      return n.as<bool>();
    } catch (const YAML::Exception&) {
      fail(n, field, "expected true or false");
    }
  }

  std::string string(const YAML::Node& n, std::string_view field) const {
    if (!n.IsScalar()) fail(n, field, "expected a string");
    return n.Scalar();
  }

  Expression expression(const YAML::Node& n, std::string_view field) const {
    if (!n.IsScalar()) fail(n, field, "expected a number or an expression over k");
    try {
      return Expression::parse(n.Scalar());
    } catch (const ConfigError& e) {
      fail(n, field, e.what());
    }
  }

  Vector vector(const YAML::Node& n, std::string_view field) const {
    if (!n.IsSequence()) fail(n, field, "expected a list of numbers");
    Vector v(static_cast<Index>(n.size()));
    for (std::size_t i = 0; i < n.size(); ++i)
      v(static_cast<Index>(i)) = number(n[i], fmt::format("{}[{}]", field, i));
    return v;
  }

  Matrix matrix(const YAML::Node& n, std::string_view field, std::optional<Index> cols = {}) const {
    if (!n.IsSequence()) fail(n, field, "expected a list of rows");
    if (n.size() == 0) return Matrix(0, cols.value_or(0));
    Matrix m;
    for (std::size_t i = 0; i < n.size(); ++i) {
      const Vector row = vector(n[i], fmt::format("{}[{}]", field, i));
      if (i == 0) m.resize(static_cast<Index>(n.size()), row.size());
      if (row.size() != m.cols())
        fail(n[i], field, fmt::format("row {} has {} entries, expected {}", i, row.size(), m.cols()));
      m.row(static_cast<Index>(i)) = row.transpose();
    }
    return m;
  }

  SensorSet sensors(const YAML::Node& n, std::string_view field, std::size_t q) const {
    if (!n.IsSequence()) fail(n, field, "expected a list of sensor numbers");
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < n.size(); ++i) {
      const std::size_t s = count(n[i], fmt::format("{}[{}]", field, i));
      if (s < 1 || s > q) fail(n[i], field, fmt::format("sensor {} outside 1..{}", s, q));
      out.push_back(s);
    }
    try {
      return SensorSet(std::move(out));
    } catch (const Error& e) {
      fail(n, field, e.what());
    }
  }

 private:
  std::string origin_;
};

void read_system(const Reader& rd, const YAML::Node& root, ScenarioConfig& cfg) {
  const YAML::Node sys = root["system"];
  if (!sys) rd.fail(root, "system", "missing");
  if (sys.IsScalar()) {
    try {
      Builtin b = builtin(sys.Scalar());
      cfg.builtin = b.name;
      cfg.system = std::move(b.system);
      if (b.input) cfg.input_channels = {Expression::parse(*b.input)};
    } catch (const ConfigError& e) {
      rd.fail(sys, "system", e.what());
    }
    return;
  }
  rd.only_keys(sys, "system", {"A", "B", "C"});
  if (!sys["A"]) rd.fail(sys, "system.A", "missing");
  if (!sys["C"]) rd.fail(sys, "system.C", "missing");
  Matrix a = rd.matrix(sys["A"], "system.A");
  Matrix c = rd.matrix(sys["C"], "system.C");
  Matrix b = sys["B"] ? rd.matrix(sys["B"], "system.B") : Matrix(a.rows(), 0);
  try {
    cfg.system = LinearSystem(std::move(a), std::move(b), std::move(c));
  } catch (const Error& e) {
    rd.fail(sys, "system", e.what());
  }
}

void read_input(const Reader& rd, const YAML::Node& root, ScenarioConfig& cfg) {
  const std::size_t p = cfg.system.p();
  const YAML::Node in = root["input"];
  if (!in) {
    if (p == 0) cfg.input_channels.clear();
    else if (cfg.input_channels.size() == 1 && p > 1) cfg.input_channels.assign(p, cfg.input_channels.front());
    else if (cfg.input_channels.empty()) cfg.input_channels.assign(p, Expression::constant(0.0));
    return;
  }
  cfg.input_channels.clear();
  if (p == 0) rd.fail(in, "input", "the plant has no inputs");
  if (in.IsScalar()) {
    cfg.input_channels.assign(p, rd.expression(in, "input"));
    return;
  }
  rd.only_keys(in, "input", {"channels", "steps"});
  if (in["channels"] && in["steps"]) rd.fail(in, "input", "give either channels or steps, not both");
  if (const YAML::Node ch = in["channels"]) {
    if (!ch.IsSequence() || ch.size() != p)
      rd.fail(ch, "input.channels", fmt::format("expected a list of {} expressions", p));
    for (std::size_t i = 0; i < p; ++i) cfg.input_channels.push_back(rd.expression(ch[i], fmt::format("input.channels[{}]", i)));
    return;
  }
  if (const YAML::Node st = in["steps"]) {
    const Matrix m = rd.matrix(st, "input.steps", static_cast<Index>(p));
    if (m.rows() > 0 && static_cast<std::size_t>(m.cols()) != p)
      rd.fail(st, "input.steps", fmt::format("each step needs {} entries", p));
    for (Index i = 0; i < m.rows(); ++i) cfg.input_steps.push_back(m.row(i).transpose());
    return;
  }
  rd.fail(in, "input", "expected channels or steps");
}

void read_attack(const Reader& rd, const YAML::Node& root, ScenarioConfig& cfg) {
  const YAML::Node at = root["attack"];
  if (!at) return;
  rd.only_keys(at, "attack", {"gamma", "signals"});
  if (at["gamma"]) cfg.gamma = rd.sensors(at["gamma"], "attack.gamma", cfg.system.q());
  if (const YAML::Node sig = at["signals"]) {
    if (!sig.IsMap()) rd.fail(sig, "attack.signals", "expected a mapping from sensor number to expression");
    for (const auto& kv : sig) {
      const std::size_t sensor = rd.count(kv.first, "attack.signals");
      const std::string field = fmt::format("attack.signals.{}", sensor);
      if (!cfg.gamma.contains(sensor)) rd.fail(kv.first, field, fmt::format("sensor {} is not in gamma", sensor));
      cfg.signals.insert_or_assign(sensor, rd.expression(kv.second, field));
    }
  }
}

void read_overrides(const Reader& rd, const YAML::Node& root, ScenarioConfig& cfg) {
  const YAML::Node ov = root["overrides"];
  if (!ov) return;
  rd.only_keys(ov, "overrides",
               {"r", "eq_tol", "eq_tol_rel", "residual_tol", "max_rounds", "fallback", "strict_observability"});
  if (ov["r"]) cfg.window_override = rd.count(ov["r"], "overrides.r");
  if (ov["eq_tol"]) cfg.tolerance.abs = rd.number(ov["eq_tol"], "overrides.eq_tol");
  if (ov["eq_tol_rel"]) cfg.tolerance.rel = rd.number(ov["eq_tol_rel"], "overrides.eq_tol_rel");
  if (ov["residual_tol"]) cfg.residual_tol = rd.number(ov["residual_tol"], "overrides.residual_tol");
  if (ov["max_rounds"]) cfg.max_rounds = rd.count(ov["max_rounds"], "overrides.max_rounds");
  if (ov["fallback"]) cfg.fallback = rd.boolean(ov["fallback"], "overrides.fallback");
  if (ov["strict_observability"])
    cfg.strict_observability = rd.boolean(ov["strict_observability"], "overrides.strict_observability");
  if (cfg.tolerance.abs < 0 || cfg.tolerance.rel < 0) rd.fail(ov, "overrides", "tolerances must be non-negative");
  if (cfg.residual_tol < 0) rd.fail(ov["residual_tol"], "overrides.residual_tol", "must be non-negative");
  if (cfg.window_override == std::size_t{0}) rd.fail(ov["r"], "overrides.r", "window length must be at least 1");
}

}  // namespace

ScenarioConfig parse_scenario(std::string_view yaml, std::string_view origin) {
  const Reader rd(origin);
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml));
  } catch (const YAML::ParserException& e) {
    throw ConfigError(fmt::format("{}:{}:{}: {}", origin, e.mark.line + 1, e.mark.column + 1, e.msg));
  }
  if (!root.IsMap()) rd.fail(root, "scenario", "expected a mapping at top level");
  rd.only_keys(root, "",
               {"name", "system", "x0", "input", "attack", "horizon", "s", "start", "method", "sesvs", "sesgc",
                "overrides"});

  ScenarioConfig cfg;
  cfg.name = root["name"] ? rd.string(root["name"], "name") : std::string(origin);
  read_system(rd, root, cfg);
  const std::size_t n = cfg.system.n();

  if (!root["x0"]) rd.fail(root, "x0", "missing");
  cfg.x0 = rd.vector(root["x0"], "x0");
  if (static_cast<std::size_t>(cfg.x0.size()) != n)
    rd.fail(root["x0"], "x0", fmt::format("has {} entries, the plant has {} states", cfg.x0.size(), n));

  read_input(rd, root, cfg);
  read_attack(rd, root, cfg);

  cfg.start = root["start"] ? rd.count(root["start"], "start") : 0;
  cfg.horizon = root["horizon"] ? rd.count(root["horizon"], "horizon") : cfg.start + 2 * n + 5;
  if (cfg.horizon < 1) rd.fail(root["horizon"], "horizon", "must be at least 1");
  if (!cfg.input_steps.empty() && cfg.input_steps.size() < cfg.horizon)
    rd.fail(root["input"], "input.steps", fmt::format("has {} steps, horizon needs {}", cfg.input_steps.size(), cfg.horizon));

  cfg.s = root["s"] ? rd.count(root["s"], "s") : cfg.gamma.size();
  if (cfg.s >= cfg.system.q()) rd.fail(root["s"] ? root["s"] : root, "s", fmt::format("must be below q = {}", cfg.system.q()));
  if (cfg.gamma.size() > cfg.s)
    rd.fail(root["attack"], "attack.gamma", fmt::format("{} sensors attacked but s = {}", cfg.gamma.size(), cfg.s));

  if (const YAML::Node m = root["method"]) {
    const std::string name = rd.string(m, "method");
    if (name == "known") cfg.method = MethodChoice::Known;
    else if (name == "sesvs") cfg.method = MethodChoice::Sesvs;
    else if (name == "sesgc") cfg.method = MethodChoice::Sesgc;
    else if (name == "both") cfg.method = MethodChoice::Both;
    else rd.fail(m, "method", fmt::format("'{}' is not one of known, sesvs, sesgc, both", name));
  }

  if (const YAML::Node v = root["sesvs"]) {
    rd.only_keys(v, "sesvs", {"tau", "r", "fallback"});
    if (v["fallback"]) cfg.sesvs_fallback = rd.boolean(v["fallback"], "sesvs.fallback");
    if (v["tau"]) cfg.tau = rd.count(v["tau"], "sesvs.tau");
    if (v["r"]) cfg.sesvs_window = rd.count(v["r"], "sesvs.r");
    if (cfg.tau < 1) rd.fail(v["tau"], "sesvs.tau", "must be at least 1");
    if (cfg.sesvs_window == std::size_t{0}) rd.fail(v["r"], "sesvs.r", "window length must be at least 1");
  }
  if (const YAML::Node g = root["sesgc"]) {
    rd.only_keys(g, "sesgc", {"r", "rounds", "fallback"});
    if (g["fallback"]) cfg.sesgc_fallback = rd.boolean(g["fallback"], "sesgc.fallback");
    if (g["r"]) cfg.sesgc_window = rd.count(g["r"], "sesgc.r");
    if (g["rounds"]) cfg.synth_rounds = rd.count(g["rounds"], "sesgc.rounds");
    if (cfg.sesgc_window == std::size_t{0}) rd.fail(g["r"], "sesgc.r", "window length must be at least 1");
  }
  read_overrides(rd, root, cfg);
  return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, fmt::format("cannot open {}", path.string()));
  std::ostringstream text;
  text << in.rdbuf();
  return parse_scenario(text.str(), path.string());
}

std::vector<Vector> ScenarioConfig::inputs() const {
  std::vector<Vector> out;
  if (system.p() == 0) return out;
  if (!input_steps.empty()) return {input_steps.begin(), input_steps.begin() + static_cast<std::ptrdiff_t>(horizon)};
  out.reserve(horizon);
  for (std::size_t k = 0; k < horizon; ++k) {
    Vector u(static_cast<Index>(system.p()));
    for (std::size_t j = 0; j < system.p(); ++j) u(static_cast<Index>(j)) = input_channels[j](static_cast<double>(k));
    out.push_back(std::move(u));
  }
  return out;
}

AttackScenario ScenarioConfig::attack() const {
  if (gamma.empty()) return AttackScenario::none();
  auto table = std::make_shared<const std::map<std::size_t, Expression>>(signals);
  return AttackScenario(gamma, [table](std::size_t step, std::size_t sensor) {
    const auto it = table->find(sensor);
    return it == table->end() ? 0.0 : it->second(static_cast<double>(step));
  });
}

Trajectory ScenarioConfig::simulate() const { return ssr::simulate(system, x0, inputs(), attack(), horizon); }

SesvsOptions ScenarioConfig::sesvs_options() const {
  SesvsOptions o;
  o.tau = tau;
  o.window = window_override ? window_override : sesvs_window;
  o.tolerance = tolerance;
  o.fallback = sesvs_fallback.value_or(fallback);
  o.strict_observability = strict_observability;
  return o;
}

SesgcOptions ScenarioConfig::sesgc_options() const {
  SesgcOptions o;
  o.window = window_override ? window_override : sesgc_window;
  o.residual_tol = residual_tol;
  o.max_rounds = max_rounds;
  o.tolerance = tolerance;
  o.fallback = sesgc_fallback.value_or(fallback);
  o.strict_observability = strict_observability;
  return o;
}

namespace {

std::string num(double v) { return fmt::format("{:.17g}", v); }

void emit_vector(YAML::Emitter& out, const Vector& v) {
  out << YAML::Flow << YAML::BeginSeq;
  for (Index i = 0; i < v.size(); ++i) out << num(v(i));
  out << YAML::EndSeq;
}

void emit_matrix(YAML::Emitter& out, const Matrix& m) {
  out << YAML::BeginSeq;
  for (Index i = 0; i < m.rows(); ++i) emit_vector(out, m.row(i).transpose());
  out << YAML::EndSeq;
}

}  // namespace

std::string emit_resolved(const ScenarioConfig& cfg) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << YAML::DoubleQuoted << cfg.name;
  out << YAML::Key << "system" << YAML::Value;
  if (cfg.builtin) {
    out << *cfg.builtin;
  } else {
    out << YAML::BeginMap;
    out << YAML::Key << "A" << YAML::Value;
    emit_matrix(out, cfg.system.a());
    if (cfg.system.p() > 0) {
      out << YAML::Key << "B" << YAML::Value;
      emit_matrix(out, cfg.system.b());
    }
    out << YAML::Key << "C" << YAML::Value;
    emit_matrix(out, cfg.system.c());
    out << YAML::EndMap;
  }
  out << YAML::Key << "x0" << YAML::Value;
  emit_vector(out, cfg.x0);

  if (cfg.system.p() > 0) {
    out << YAML::Key << "input" << YAML::Value << YAML::BeginMap;
    if (!cfg.input_steps.empty()) {
      out << YAML::Key << "steps" << YAML::Value << YAML::BeginSeq;
      for (const auto& u : cfg.input_steps) emit_vector(out, u);
      out << YAML::EndSeq;
    } else {
      out << YAML::Key << "channels" << YAML::Value << YAML::Flow << YAML::BeginSeq;
      for (const auto& e : cfg.input_channels) out << YAML::DoubleQuoted << e.source();
      out << YAML::EndSeq;
    }
    out << YAML::EndMap;
  }

  out << YAML::Key << "attack" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "gamma" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (auto i : cfg.gamma) out << i;
  out << YAML::EndSeq;
  out << YAML::Key << "signals" << YAML::Value << YAML::BeginMap;
  for (const auto& [sensor, e] : cfg.signals) out << YAML::Key << sensor << YAML::Value << YAML::DoubleQuoted << e.source();
  out << YAML::EndMap << YAML::EndMap;

  out << YAML::Key << "horizon" << YAML::Value << cfg.horizon;
  out << YAML::Key << "s" << YAML::Value << cfg.s;
  out << YAML::Key << "start" << YAML::Value << cfg.start;
  out << YAML::Key << "method" << YAML::Value << to_string(cfg.method);

  out << YAML::Key << "sesvs" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "tau" << YAML::Value << cfg.tau;
  if (cfg.sesvs_window) out << YAML::Key << "r" << YAML::Value << *cfg.sesvs_window;
  if (cfg.sesvs_fallback) out << YAML::Key << "fallback" << YAML::Value << *cfg.sesvs_fallback;
  out << YAML::EndMap;
  out << YAML::Key << "sesgc" << YAML::Value << YAML::BeginMap;
  if (cfg.sesgc_window) out << YAML::Key << "r" << YAML::Value << *cfg.sesgc_window;
  out << YAML::Key << "rounds" << YAML::Value << cfg.synth_rounds;
  if (cfg.sesgc_fallback) out << YAML::Key << "fallback" << YAML::Value << *cfg.sesgc_fallback;
  out << YAML::EndMap;

  out << YAML::Key << "overrides" << YAML::Value << YAML::BeginMap;
  if (cfg.window_override) out << YAML::Key << "r" << YAML::Value << *cfg.window_override;
  out << YAML::Key << "eq_tol" << YAML::Value << num(cfg.tolerance.abs);
  out << YAML::Key << "eq_tol_rel" << YAML::Value << num(cfg.tolerance.rel);
  out << YAML::Key << "residual_tol" << YAML::Value << num(cfg.residual_tol);
  if (cfg.max_rounds) out << YAML::Key << "max_rounds" << YAML::Value << *cfg.max_rounds;
  out << YAML::Key << "fallback" << YAML::Value << cfg.fallback;
  out << YAML::Key << "strict_observability" << YAML::Value << cfg.strict_observability;
  out << YAML::EndMap;

  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace ssr
