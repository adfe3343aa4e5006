#include "slabdsa.h"

#include <cstring>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "slabdsa/errors.hpp"
#include "slabdsa/harness.hpp"

struct sd_config {
  slabdsa::ExperimentConfig cfg;
};
struct sd_result {
  slabdsa::ExperimentResult res;
};
struct sd_report {
  std::vector<slabdsa::OracleReport> reports;
};

namespace {

thread_local std::string g_last_error;

sd_status to_status(slabdsa::ErrorCode c) {
  using slabdsa::ErrorCode;
  switch (c) {
    case ErrorCode::InvalidArgument: return SD_ERR_INVALID_ARGUMENT;
    case ErrorCode::InvalidCoefficient: return SD_ERR_INVALID_COEFFICIENT;
    case ErrorCode::NumericalBreakdown: return SD_ERR_NUMERICAL_BREAKDOWN;
    case ErrorCode::Factorization: return SD_ERR_FACTORIZATION;
    case ErrorCode::UnsupportedDegree: return SD_ERR_UNSUPPORTED_DEGREE;
    case ErrorCode::InvalidInstance: return SD_ERR_INVALID_INSTANCE;
    case ErrorCode::Config: return SD_ERR_CONFIG;
    case ErrorCode::Io: return SD_ERR_IO;
  }
  return SD_ERR_INTERNAL;
}

template <class F>
sd_status guard(F&& f) {
  try {
    f();
    return SD_OK;
  } catch (const slabdsa::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown error";
  }
  return SD_ERR_INTERNAL;
}

sd_status null_arg(const char* what) {
  g_last_error = std::string(what) + " must not be NULL";
  return SD_ERR_INVALID_ARGUMENT;
}

std::string path_or_empty(const char* p) { return p ? p : ""; }

}  // namespace

extern "C" {

const char* sd_version(void) { return "0.1.0"; }
const char* sd_last_error(void) { return g_last_error.c_str(); }

const char* sd_status_name(sd_status s) {
  switch (s) {
    case SD_OK: return "ok";
    case SD_ERR_INVALID_ARGUMENT: return "invalid-argument";
    case SD_ERR_INVALID_COEFFICIENT: return "invalid-coefficient";
    case SD_ERR_NUMERICAL_BREAKDOWN: return "numerical-breakdown";
    case SD_ERR_FACTORIZATION: return "factorization";
    case SD_ERR_UNSUPPORTED_DEGREE: return "unsupported-degree";
    case SD_ERR_INVALID_INSTANCE: return "invalid-instance";
    case SD_ERR_CONFIG: return "config";
    case SD_ERR_IO: return "io";
    case SD_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

sd_status sd_config_new(sd_config** out) {
  if (!out) return null_arg("out");
  return guard([&] { *out = new sd_config{}; });
}

void sd_config_free(sd_config* cfg) { delete cfg; }

sd_status sd_config_preset(sd_config* cfg, const char* name) {
  if (!cfg || !name) return null_arg("cfg and name");
  return guard([&] { cfg->cfg.apply_preset(name); });
}

sd_status sd_config_load(sd_config* cfg, const char* path) {
  if (!cfg || !path) return null_arg("cfg and path");
  return guard([&] { cfg->cfg.load_file(path); });
}

sd_status sd_config_set(sd_config* cfg, const char* key, const char* value) {
  if (!cfg || !key || !value) return null_arg("cfg, key and value");
  return guard([&] { cfg->cfg.set(key, value); });
}

sd_status sd_config_get(const sd_config* cfg, const char* key, char* buf, size_t buf_len, size_t* needed) {
  if (!cfg || !key) return null_arg("cfg and key");
  return guard([&] {
    const std::string v = cfg->cfg.get(key);
    if (needed) *needed = v.size() + 1;
    if (!buf) return;
    if (buf_len < v.size() + 1) slabdsa::fail(slabdsa::ErrorCode::InvalidArgument, "buffer too small");
    std::memcpy(buf, v.c_str(), v.size() + 1);
  });
}

sd_status sd_config_validate(const sd_config* cfg) {
  if (!cfg) return null_arg("cfg");
  return guard([&] { cfg->cfg.validate(); });
}

sd_status sd_run(const sd_config* cfg, const char* out_dir, sd_result** out) {
  if (!cfg || !out) return null_arg("cfg and out");
  *out = nullptr;
  return guard([&] {
    auto r = std::make_unique<sd_result>();
    r->res = slabdsa::run_experiment(cfg->cfg, path_or_empty(out_dir));
    *out = r.release();
  });
}

void sd_result_free(sd_result* r) { delete r; }
int sd_result_iterations(const sd_result* r) { return r ? r->res.history.iterations() : 0; }
int sd_result_converged(const sd_result* r) { return r && r->res.history.converged ? 1 : 0; }
int sd_result_diverged(const sd_result* r) { return r && r->res.history.diverged ? 1 : 0; }
double sd_result_final_error(const sd_result* r) { return r ? r->res.history.final_error() : 0.0; }
double sd_result_final_residual(const sd_result* r) { return r ? r->res.history.final_residual() : 0.0; }
double sd_result_reference_error(const sd_result* r) { return r ? r->res.reference_error : 0.0; }
long sd_result_sweeps(const sd_result* r) { return r ? r->res.history.sweeps() : 0; }
double sd_result_eta(const sd_result* r) { return r ? r->res.eta : 0.0; }
const char* sd_result_status(const sd_result* r) { return r ? r->res.status.c_str() : ""; }

sd_status sd_result_row(const sd_result* r, int i, double* error_inf, double* residual_inf, long* cumulative_sweeps) {
  if (!r) return null_arg("r");
  if (i < 0 || i >= r->res.history.iterations()) {
    g_last_error = "row index out of range";
    return SD_ERR_INVALID_ARGUMENT;
  }
  const auto& row = r->res.history.rows[i];
  if (error_inf) *error_inf = row.error_inf;
  if (residual_inf) *residual_inf = row.residual_inf;
  if (cumulative_sweeps) *cumulative_sweeps = row.cumulative_sweeps;
  return SD_OK;
}

sd_status sd_scan(const sd_config* base, const double* eps, size_t n_eps, const char* const* preconds,
                  size_t n_preconds, const char* out_dir, int* n_diverged, int* n_failed) {
  if (!base || (n_eps && !eps) || (n_preconds && !preconds)) return null_arg("base, eps and preconds");
  return guard([&] {
    std::vector<double> e(eps, eps + n_eps);
    std::vector<std::string> p;
    for (size_t i = 0; i < n_preconds; ++i) {
      if (!preconds[i]) slabdsa::fail(slabdsa::ErrorCode::InvalidArgument, "NULL preconditioner name");
      p.emplace_back(preconds[i]);
    }
    const auto cells = slabdsa::run_scan(base->cfg, e, p, path_or_empty(out_dir));
    int div = 0, bad = 0;
    for (const auto& c : cells) {
      div += c.result.history.diverged ? 1 : 0;
      bad += c.error.empty() ? 0 : 1;
    }
    if (n_diverged) *n_diverged = div;
    if (n_failed) *n_failed = bad;
  });
}

sd_status sd_dump(const sd_config* cfg, const char* dir) {
  if (!cfg || !dir) return null_arg("cfg and dir");
  return guard([&] { slabdsa::dump_matrices(cfg->cfg, dir); });
}

sd_status sd_verify(uint64_t seed, const char* out_dir, sd_report** out) {
  if (!out) return null_arg("out");
  *out = nullptr;
  return guard([&] {
    auto r = std::make_unique<sd_report>();
    r->reports = slabdsa::run_verify(seed, path_or_empty(out_dir));
    *out = r.release();
  });
}

void sd_report_free(sd_report* r) { delete r; }
int sd_report_count(const sd_report* r) { return r ? static_cast<int>(r->reports.size()) : 0; }

int sd_report_all_pass(const sd_report* r) {
  if (!r) return 0;
  for (const auto& x : r->reports)
    if (!x.pass) return 0;
  return 1;
}

sd_status sd_report_entry(const sd_report* r, int i, const char** name, double* measured, double* bound,
                          double* bound_hi, int* pass) {
  if (!r) return null_arg("r");
  if (i < 0 || i >= sd_report_count(r)) {
    g_last_error = "report index out of range";
    return SD_ERR_INVALID_ARGUMENT;
  }
  const auto& x = r->reports[i];
  if (name) *name = x.name.c_str();
  if (measured) *measured = x.measured;
  if (bound) *bound = x.bound;
  if (bound_hi) *bound_hi = x.bound_hi;
  if (pass) *pass = x.pass ? 1 : 0;
  return SD_OK;
}

}  // extern "C"
