#include "ssr/ssr.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "ssr/builtins.hpp"
#include "ssr/combinat.hpp"
#include "ssr/observability.hpp"
#include "ssr/reconstruct.hpp"
#include "ssr/report.hpp"
#include "ssr/scenario.hpp"

struct ssr_system {
  ssr::LinearSystem sys;
};

struct ssr_scenario {
  ssr::ScenarioConfig config;
};

struct ssr_report {
  ssr::RunReport report;
};

namespace {

thread_local std::string last_error;

ssr_status fail(ssr_status status, std::string what) {
  last_error = std::move(what);
  return status;
}

ssr_status status_of(ssr::ErrorCode code) {
  switch (code) {
    case ssr::ErrorCode::InvalidArgument: return SSR_ERR_INVALID_ARGUMENT;
    case ssr::ErrorCode::Dimension: return SSR_ERR_DIMENSION;
    case ssr::ErrorCode::Precondition: return SSR_ERR_PRECONDITION;
    case ssr::ErrorCode::Config: return SSR_ERR_CONFIG;
    case ssr::ErrorCode::Io: return SSR_ERR_IO;
  }
  return SSR_ERR_INTERNAL;
}

// Runs `body`, translating exceptions into status codes.
template <typename F>
ssr_status guarded(F&& body) {
  try {
    body();
    return SSR_OK;
  } catch (const ssr::NotObservableError& e) {
    return fail(SSR_ERR_NOT_OBSERVABLE, e.what());
  } catch (const ssr::Error& e) {
    return fail(status_of(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(SSR_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(SSR_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(SSR_ERR_INTERNAL, "unknown error");
  }
}

#define SSR_REQUIRE(ptr) \
  if (!(ptr)) return fail(SSR_ERR_INVALID_ARGUMENT, #ptr " is null")

ssr::Matrix row_major(const double* data, std::size_t rows, std::size_t cols) {
  ssr::Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = data[i * cols + j];
  return m;
}

struct RawRecord {
  std::vector<ssr::Vector> outputs;
  std::vector<ssr::Vector> inputs;

  ssr::Measurements view() const { return {outputs, inputs}; }
};

RawRecord raw_record(const ssr::LinearSystem& sys, std::size_t steps, const double* outputs, const double* inputs) {
  if (steps == 0) throw ssr::Error(ssr::ErrorCode::InvalidArgument, "no measurements");
  if (!outputs) throw ssr::Error(ssr::ErrorCode::InvalidArgument, "outputs is null");
  if (sys.p() > 0 && steps > 1 && !inputs) throw ssr::Error(ssr::ErrorCode::InvalidArgument, "inputs is null");
  RawRecord rec;
  const auto q = static_cast<Eigen::Index>(sys.q());
  const auto p = static_cast<Eigen::Index>(sys.p());
  for (std::size_t k = 0; k < steps; ++k) rec.outputs.push_back(Eigen::Map<const ssr::Vector>(outputs + k * sys.q(), q));
  if (p > 0)
    for (std::size_t k = 0; k + 1 < steps; ++k) rec.inputs.push_back(Eigen::Map<const ssr::Vector>(inputs + k * sys.p(), p));
  return rec;
}

void write_result(const ssr::ReconstructionReport& rep, ssr_outcome* outcome, double* state) {
  switch (rep.outcome) {
    case ssr::Outcome::Unique: *outcome = SSR_UNIQUE; break;
    case ssr::Outcome::Ambiguous: *outcome = SSR_AMBIGUOUS; break;
    case ssr::Outcome::Infeasible: *outcome = SSR_INFEASIBLE; break;
  }
  if (rep.outcome == ssr::Outcome::Unique && state)
    std::copy(rep.states.front().data(), rep.states.front().data() + rep.states.front().size(), state);
}

}  // namespace

extern "C" {

const char* ssr_last_error(void) { return last_error.c_str(); }

const char* ssr_status_name(ssr_status status) {
  switch (status) {
    case SSR_OK: return "ok";
    case SSR_ERR_INVALID_ARGUMENT: return "invalid argument";
    case SSR_ERR_DIMENSION: return "dimension mismatch";
    case SSR_ERR_PRECONDITION: return "precondition violated";
    case SSR_ERR_NOT_OBSERVABLE: return "not sparse observable";
    case SSR_ERR_CONFIG: return "configuration error";
    case SSR_ERR_IO: return "i/o error";
    case SSR_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

ssr_status ssr_system_create(size_t n, size_t p, size_t q, const double* a, const double* b, const double* c,
                             ssr_system** out) {
  SSR_REQUIRE(out);
  SSR_REQUIRE(a);
  SSR_REQUIRE(c);
  if (p > 0 && !b) return fail(SSR_ERR_INVALID_ARGUMENT, "b is null but p > 0");
  *out = nullptr;
  return guarded([&] {
    ssr::LinearSystem sys(row_major(a, n, n), p > 0 ? row_major(b, n, p) : ssr::Matrix(static_cast<Eigen::Index>(n), 0),
                          row_major(c, q, n));
    *out = new ssr_system{std::move(sys)};
  });
}

ssr_status ssr_system_builtin(const char* name, ssr_system** out) {
  SSR_REQUIRE(out);
  SSR_REQUIRE(name);
  *out = nullptr;
  return guarded([&] { *out = new ssr_system{ssr::builtin(name).system}; });
}

void ssr_system_destroy(ssr_system* sys) { delete sys; }

ssr_status ssr_system_dims(const ssr_system* sys, size_t* n, size_t* p, size_t* q) {
  SSR_REQUIRE(sys);
  if (n) *n = sys->sys.n();
  if (p) *p = sys->sys.p();
  if (q) *q = sys->sys.q();
  return SSR_OK;
}

ssr_status ssr_is_sparse_observable(const ssr_system* sys, size_t s, int* out) {
  SSR_REQUIRE(sys);
  SSR_REQUIRE(out);
  return guarded([&] { *out = ssr::is_sparse_observable(sys->sys, s) ? 1 : 0; });
}

ssr_status ssr_sparse_lower_bound(const ssr_system* sys, size_t s, size_t* out) {
  SSR_REQUIRE(sys);
  SSR_REQUIRE(out);
  return guarded([&] { *out = ssr::sparse_observable_lower_bound(sys->sys, s); });
}

ssr_status ssr_choose(uint64_t p, uint64_t k, uint64_t* out) {
  SSR_REQUIRE(out);
  const auto c = ssr::choose(p, k);
  if (!c) return fail(SSR_ERR_INVALID_ARGUMENT, fmt::format("C({}, {}) is undefined: k > p", p, k));
  *out = *c;
  return SSR_OK;
}

ssr_status ssr_sesvs_reconstruct(const ssr_system* sys, size_t steps, const double* outputs, const double* inputs,
                                 size_t start, size_t s, size_t tau, size_t window, ssr_outcome* outcome,
                                 double* state) {
  SSR_REQUIRE(sys);
  SSR_REQUIRE(outcome);
  return guarded([&] {
    const RawRecord rec = raw_record(sys->sys, steps, outputs, inputs);
    ssr::SesvsOptions o;
    o.tau = tau;
    if (window > 0) o.window = window;
    write_result(ssr::sesvs_reconstruct(sys->sys, rec.view(), start, s, o), outcome, state);
  });
}

ssr_status ssr_sesgc_reconstruct(const ssr_system* sys, size_t steps, const double* outputs, const double* inputs,
                                 size_t start, size_t s, size_t window, double residual_tol, size_t max_rounds,
                                 ssr_outcome* outcome, double* state) {
  SSR_REQUIRE(sys);
  SSR_REQUIRE(outcome);
  return guarded([&] {
    const RawRecord rec = raw_record(sys->sys, steps, outputs, inputs);
    ssr::SesgcOptions o;
    if (window > 0) o.window = window;
    o.residual_tol = residual_tol;
    if (max_rounds > 0) o.max_rounds = max_rounds;
    write_result(ssr::sesgc_reconstruct(sys->sys, rec.view(), start, s, o), outcome, state);
  });
}

ssr_status ssr_scenario_load_file(const char* path, ssr_scenario** out) {
  SSR_REQUIRE(path);
  SSR_REQUIRE(out);
  *out = nullptr;
  return guarded([&] { *out = new ssr_scenario{ssr::load_scenario(path)}; });
}

ssr_status ssr_scenario_load_string(const char* yaml, ssr_scenario** out) {
  SSR_REQUIRE(yaml);
  SSR_REQUIRE(out);
  *out = nullptr;
  return guarded([&] { *out = new ssr_scenario{ssr::parse_scenario(yaml)}; });
}

void ssr_scenario_destroy(ssr_scenario* scenario) { delete scenario; }

ssr_status ssr_scenario_set_window(ssr_scenario* scenario, size_t r) {
  SSR_REQUIRE(scenario);
  if (r < 1) return fail(SSR_ERR_INVALID_ARGUMENT, "window length must be at least 1");
  scenario->config.window_override = r;
  return SSR_OK;
}

ssr_status ssr_scenario_set_eq_tol(ssr_scenario* scenario, double tol) {
  SSR_REQUIRE(scenario);
  if (!(tol >= 0)) return fail(SSR_ERR_INVALID_ARGUMENT, "equality tolerance must be non-negative");
  scenario->config.tolerance.abs = tol;
  return SSR_OK;
}

ssr_status ssr_scenario_set_residual_tol(ssr_scenario* scenario, double tol) {
  SSR_REQUIRE(scenario);
  if (!(tol >= 0)) return fail(SSR_ERR_INVALID_ARGUMENT, "residual tolerance must be non-negative");
  scenario->config.residual_tol = tol;
  return SSR_OK;
}

ssr_status ssr_scenario_set_max_rounds(ssr_scenario* scenario, size_t rounds) {
  SSR_REQUIRE(scenario);
  scenario->config.max_rounds = rounds;
  return SSR_OK;
}

ssr_status ssr_scenario_set_fallback(ssr_scenario* scenario, int enabled) {
  SSR_REQUIRE(scenario);
  scenario->config.fallback = enabled != 0;
  scenario->config.sesvs_fallback.reset();
  scenario->config.sesgc_fallback.reset();
  return SSR_OK;
}

ssr_status ssr_run_audit(const ssr_scenario* scenario, int machine_timings, ssr_report** out) {
  SSR_REQUIRE(scenario);
  SSR_REQUIRE(out);
  *out = nullptr;
  return guarded([&] { *out = new ssr_report{ssr::run_audit(scenario->config, {machine_timings != 0})}; });
}

ssr_status ssr_run_reconstruct(const ssr_scenario* scenario, int machine_timings, ssr_report** out) {
  SSR_REQUIRE(scenario);
  SSR_REQUIRE(out);
  *out = nullptr;
  return guarded([&] { *out = new ssr_report{ssr::run_reconstruct(scenario->config, {machine_timings != 0})}; });
}

ssr_status ssr_run_attack_synth(const ssr_scenario* scenario, ssr_target target, int machine_timings,
                                ssr_report** out) {
  SSR_REQUIRE(scenario);
  SSR_REQUIRE(out);
  *out = nullptr;
  if (target != SSR_TARGET_SESVS && target != SSR_TARGET_SESGC) return fail(SSR_ERR_INVALID_ARGUMENT, "unknown target");
  const ssr::Method method = target == SSR_TARGET_SESVS ? ssr::Method::Sesvs : ssr::Method::Sesgc;
  return guarded([&] { *out = new ssr_report{ssr::run_attack_synth(scenario->config, method, {machine_timings != 0})}; });
}

ssr_status ssr_report_render(const ssr_report* report, ssr_format format, char** out) {
  SSR_REQUIRE(report);
  SSR_REQUIRE(out);
  const std::string& text = report->report.render(format == SSR_FORMAT_MACHINE ? ssr::Format::Machine : ssr::Format::Human);
  char* buf = static_cast<char*>(std::malloc(text.size() + 1));
  if (!buf) return fail(SSR_ERR_INTERNAL, "out of memory");
  std::memcpy(buf, text.c_str(), text.size() + 1);
  *out = buf;
  return SSR_OK;
}

int ssr_report_exit_code(const ssr_report* report) { return report ? report->report.exit_code : ssr::kExitUsage; }

void ssr_report_destroy(ssr_report* report) { delete report; }

void ssr_string_free(char* text) { std::free(text); }

}  // extern "C"
