#include "slabdsa/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "slabdsa/errors.hpp"

namespace slabdsa {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

std::string short_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expected) {
  fail(ErrorCode::Config, key + ": expected " + expected + ", got '" + value + "'");
}

double parse_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    bad_value(key, v, "a number");
  }
  if (used != v.size()) bad_value(key, v, "a number");
  return out;
}

long long parse_int(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  long long out = 0;
  try {
    out = std::stoll(v, &used);
  } catch (const std::exception&) {
    bad_value(key, v, "an integer");
  }
  if (used != v.size()) bad_value(key, v, "an integer");
  return out;
}

int parse_int32(const std::string& key, const std::string& v) {
  const long long x = parse_int(key, v);
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
    bad_value(key, v, "an integer in range");
  return static_cast<int>(x);
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  bad_value(key, v, "true or false");
}

void check_expression(const std::string& key, const std::string& v) {
  try {
    (void)Expression::parse(v);
  } catch (const Error& e) {
    fail(ErrorCode::Config, key + ": " + e.what());
  }
}

Coefficient coefficient(const std::string& text, double eps) {
  const Expression e = Expression::parse(text);
  return {[e, eps](double x) { return e(x, 0.0, eps); }, e.depends_on_x() ? -1 : 0};
}

}  // namespace

// ---- config ----------------------------------------------------------------

ExperimentConfig preset_config(const std::string& name) {
  if (name == "paper-1d") return ExperimentConfig{};
  fail(ErrorCode::Config, "preset: unknown preset '" + name + "' (available: paper-1d)");
}

void ExperimentConfig::apply_preset(const std::string& name) { *this = preset_config(name); }

const std::vector<std::string>& ExperimentConfig::keys() {
  static const std::vector<std::string> k{
      "preset",   "domain_a", "domain_b",  "n_elements", "degree",   "n_angles", "eps",
      "sigma_t",  "sigma_a",  "source",    "inflow",     "precond",  "n_inner",  "flux_update",
      "ordering", "adversarial_fraction",  "seed",       "max_iters", "tol",     "mip_cp",
      "reference", "dump_matrices",        "group"};
  return k;
}

void ExperimentConfig::set(const std::string& key_in, const std::string& value_in) {
  const std::string key = trim(key_in), v = trim(value_in);
  if (key == "preset") apply_preset(v);
  else if (key == "domain_a") domain_a = parse_double(key, v);
  else if (key == "domain_b") domain_b = parse_double(key, v);
  else if (key == "n_elements") n_elements = parse_int32(key, v);
  else if (key == "degree") degree = parse_int32(key, v);
  else if (key == "n_angles") n_angles = parse_int32(key, v);
  else if (key == "eps") eps = parse_double(key, v);
  else if (key == "sigma_t") { check_expression(key, v); sigma_t = v; }
  else if (key == "sigma_a") { check_expression(key, v); sigma_a = v; }
  else if (key == "source") { check_expression(key, v); source = v; }
  else if (key == "inflow") { check_expression(key, v); inflow = v; }
  else if (key == "precond") {
    try {
      precond = parse_precond(v);
    } catch (const Error& e) {
      fail(ErrorCode::Config, std::string("precond: ") + e.what());
    }
  } else if (key == "n_inner") n_inner = parse_int32(key, v);
  else if (key == "flux_update") {
    if (v == "frozen") flux_each_sweep = false;
    else if (v == "each-sweep") flux_each_sweep = true;
    else bad_value(key, v, "frozen or each-sweep");
  } else if (key == "ordering") {
    if (v != "upwind" && v != "adversarial") bad_value(key, v, "upwind or adversarial");
    ordering = v;
  } else if (key == "adversarial_fraction") adversarial_fraction = parse_double(key, v);
  else if (key == "seed") {
    const long long s = parse_int(key, v);
    if (s < 0) bad_value(key, v, "a non-negative integer");
    seed = static_cast<std::uint64_t>(s);
  } else if (key == "max_iters") max_iters = parse_int32(key, v);
  else if (key == "tol") tol = parse_double(key, v);
  else if (key == "mip_cp") mip_cp = parse_double(key, v);
  else if (key == "reference") reference = parse_bool(key, v);
  else if (key == "dump_matrices") dump_matrices = parse_bool(key, v);
  else if (key == "group") group = parse_int32(key, v);
  else fail(ErrorCode::Config, "unknown key '" + key + "'");
}

std::string ExperimentConfig::get(const std::string& key) const {
  if (key == "preset") return preset;
  if (key == "domain_a") return short_num(domain_a);
  if (key == "domain_b") return short_num(domain_b);
  if (key == "n_elements") return std::to_string(n_elements);
  if (key == "degree") return std::to_string(degree);
  if (key == "n_angles") return std::to_string(n_angles);
  if (key == "eps") return short_num(eps);
  if (key == "sigma_t") return sigma_t;
  if (key == "sigma_a") return sigma_a;
  if (key == "source") return source;
  if (key == "inflow") return inflow;
  if (key == "precond") return to_string(precond);
  if (key == "n_inner") return std::to_string(n_inner);
  if (key == "flux_update") return flux_each_sweep ? "each-sweep" : "frozen";
  if (key == "ordering") return ordering;
  if (key == "adversarial_fraction") return short_num(adversarial_fraction);
  if (key == "seed") return std::to_string(seed);
  if (key == "max_iters") return std::to_string(max_iters);
  if (key == "tol") return short_num(tol);
  if (key == "mip_cp") return short_num(mip_cp);
  if (key == "reference") return reference ? "true" : "false";
  if (key == "dump_matrices") return dump_matrices ? "true" : "false";
  if (key == "group") return std::to_string(group);
  fail(ErrorCode::Config, "unknown key '" + key + "'");
}

void ExperimentConfig::load_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      fail(ErrorCode::Config, "line " + std::to_string(lineno) + ": expected key = value");
    try {
      set(line.substr(0, eq), line.substr(eq + 1));
    } catch (const Error& e) {
      fail(ErrorCode::Config, "line " + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void ExperimentConfig::load_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open config file " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  load_text(s.str());
}

std::string ExperimentConfig::to_text() const {
  std::string out;
  for (const auto& k : keys()) out += k + " = " + get(k) + "\n";
  return out;
}

void ExperimentConfig::validate() const {
  std::vector<std::string> errs;
  auto need = [&](bool ok, const std::string& msg) {
    if (!ok) errs.push_back(msg);
  };
  need(std::isfinite(domain_a) && std::isfinite(domain_b) && domain_b > domain_a,
       "domain_b: must exceed domain_a");
  need(n_elements >= 1, "n_elements: must be >= 1");
  need(degree >= 0 && degree <= 20, "degree: must be in [0, 20]");
  need(n_angles >= 2 && n_angles % 2 == 0, "n_angles: must be even and >= 2");
  need(std::isfinite(eps) && eps > 0.0, "eps: must be > 0");
  need(n_inner >= 0, "n_inner: must be >= 0");
  need(adversarial_fraction >= 0.0 && adversarial_fraction <= 1.0, "adversarial_fraction: must be in [0, 1]");
  need(max_iters >= 1, "max_iters: must be >= 1");
  need(std::isfinite(tol) && tol > 0.0, "tol: must be > 0");
  need(std::isfinite(mip_cp) && mip_cp > 0.0, "mip_cp: must be > 0");
  need(group >= 1, "group: must be >= 1");
  need(!(precond == PrecondKind::Additive && degree < 1), "precond: additive needs degree >= 1");
  if (!errs.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& e : errs) msg += "\n  " + e;
    fail(ErrorCode::Config, msg);
  }
  // Coefficients must be positive at element centers; assembly checks the
  // quadrature points as well.
  const Expression st = Expression::parse(sigma_t), sa = Expression::parse(sigma_a);
  const Mesh mesh = uniform_mesh(domain_a, domain_b, n_elements);
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const double x = mesh.center(e);
    if (!(st(x, 0.0, eps) > 0.0)) fail(ErrorCode::Config, "sigma_t: must be > 0 (fails at x=" + short_num(x) + ")");
    if (!(sa(x, 0.0, eps) >= 0.0))
      fail(ErrorCode::Config, "sigma_a: must be >= 0 (fails at x=" + short_num(x) + ")");
  }
}

// ---- experiment ------------------------------------------------------------

ProblemData problem_data(const ExperimentConfig& cfg) {
  ProblemData pd;
  pd.sigma_t = coefficient(cfg.sigma_t, cfg.eps);
  pd.sigma_a = coefficient(cfg.sigma_a, cfg.eps);
  const Expression q = Expression::parse(cfg.source), in = Expression::parse(cfg.inflow);
  const double eps = cfg.eps;
  pd.source = [q, eps](double x, double mu) { return q(x, mu, eps); };
  pd.source_degree = q.depends_on_x() ? -1 : 0;
  pd.inflow = [in, eps](double x, double mu) { return in(x, mu, eps); };
  return pd;
}

Experiment build_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  DGSpace space(uniform_mesh(cfg.domain_a, cfg.domain_b, cfg.n_elements), cfg.degree);
  const DirectionSet dirs = gauss_legendre_set(cfg.n_angles);
  SweepOrdering ord = cfg.ordering == "adversarial"
                          ? adversarial_ordering(space.mesh(), dirs, cfg.adversarial_fraction, cfg.seed)
                          : upwind_ordering(space.mesh(), dirs);
  return Experiment{cfg, TransportSystem(space, dirs, cfg.eps, problem_data(cfg)), std::move(ord)};
}

double thickness_eta(const ExperimentConfig& cfg) {
  const Expression st = Expression::parse(cfg.sigma_t), sa = Expression::parse(cfg.sigma_a);
  const Mesh mesh = uniform_mesh(cfg.domain_a, cfg.domain_b, cfg.n_elements);
  double eta = 0.0;
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const double x = mesh.center(e);
    const double sig_t = st(x, 0.0, cfg.eps) / cfg.eps, sig_a = cfg.eps * sa(x, 0.0, cfg.eps);
    eta = std::max(eta, std::min(cfg.eps / (mesh.h(e) * sig_t), cfg.eps * std::sqrt(sig_a / sig_t)));
  }
  return eta;
}

void write_summary_header(std::ostream& out) {
  out << "eps,precond,n_inner,flux_update,ordering,iterations,converged,diverged,final_error,final_residual,"
         "reference_error,sweeps,eta,status\n";
}

void write_summary_row(std::ostream& out, const ExperimentConfig& cfg, const ExperimentResult& r,
                       const std::string& error) {
  const auto& h = r.history;
  out << num(cfg.eps) << ',' << to_string(cfg.precond) << ',' << cfg.n_inner << ','
      << (cfg.flux_each_sweep ? "each-sweep" : "frozen") << ',' << cfg.ordering << ',' << h.iterations() << ','
      << (h.converged ? 1 : 0) << ',' << (h.diverged ? 1 : 0) << ',' << num(h.final_error()) << ','
      << num(h.final_residual()) << ',' << num(r.reference_error) << ',' << h.sweeps() << ',' << num(r.eta) << ','
      << (error.empty() ? r.status : "error: " + error) << '\n';
}

namespace {

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write " + p.string());
  return out;
}

std::string status_of(const IterationHistory& h) {
  if (h.diverged) return "diverged";
  if (h.converged) return h.rows.empty() ? "zero-source" : "converged";
  return "not-converged";
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, const fs::path& out_dir, std::ostream* log) {
  const auto t0 = std::chrono::steady_clock::now();
  Experiment ex = build_experiment(cfg);
  ExperimentResult res;
  res.eta = thickness_eta(cfg);
  if (log) {
    *log << "eps=" << short_num(cfg.eps) << " precond=" << to_string(cfg.precond) << " n_dofs="
         << ex.system.n_dofs() << " angles=" << ex.system.n_angles() << " eta=" << short_num(res.eta)
         << (res.eta < 1e-2 ? " (optically thick)" : "") << '\n';
  }

  AngularFlux reference;
  if (cfg.reference) reference = direct_solve(ex.system);
  const Preconditioner pre(ex.system, cfg.precond, cfg.mip_cp);
  IterationOptions opts;
  opts.max_iters = cfg.max_iters;
  opts.tol = cfg.tol;
  opts.n_inner = cfg.n_inner;
  opts.update_flux_each_sweep = cfg.flux_each_sweep;
  opts.reference = cfg.reference ? &reference : nullptr;
  IterationResult it = run_iteration(ex.system, ex.ordering, &pre, opts);
  res.history = cfg.group > 1 ? it.history.grouped(cfg.group) : it.history;
  res.reference_error = it.history.rows.empty() ? std::numeric_limits<double>::quiet_NaN()
                                                : it.history.rows.back().reference_error;
  if (cfg.reference && it.history.rows.empty()) res.reference_error = 0.0;
  res.status = status_of(it.history);

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    {
      auto out = open_out(out_dir / "history.csv");
      res.history.write_csv(out);
    }
    {
      auto out = open_out(out_dir / "summary.csv");
      write_summary_header(out);
      write_summary_row(out, cfg, res);
    }
    {
      auto out = open_out(out_dir / "config.txt");
      out << cfg.to_text();
    }
    if (cfg.dump_matrices) dump_matrices(cfg, out_dir / "matrices");
  }
  if (log) {
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    *log << res.status << " after " << it.history.iterations() << " iterations, " << it.history.sweeps()
         << " sweeps; final error " << short_num(it.history.final_error());
    if (cfg.reference) *log << "; reference error " << short_num(res.reference_error);
    *log << " (" << short_num(std::round(secs * 1000) / 1000) << " s)\n";
  }
  return res;
}

std::vector<ScanCell> run_scan(const ExperimentConfig& base, const std::vector<double>& eps_list,
                               const std::vector<std::string>& preconds, const fs::path& out_dir, std::ostream* log) {
  std::vector<ScanCell> cells;
  std::ofstream summary;
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    summary = open_out(out_dir / "summary.csv");
    write_summary_header(summary);
  }
  for (double eps : eps_list) {
    for (const auto& p : preconds) {
      ScanCell cell;
      cell.eps = eps;
      cell.precond = p;
      ExperimentConfig cfg = base;
      try {
        cfg.set("eps", short_num(eps));
        cfg.set("precond", p);
        const fs::path dir = out_dir.empty() ? fs::path{} : out_dir / ("cell_" + std::to_string(cells.size()));
        cell.result = run_experiment(cfg, dir, log);
      } catch (const std::exception& e) {
        cell.error = e.what();
        cell.result.status = "error";
        if (log) *log << "cell eps=" << short_num(eps) << " precond=" << p << " failed: " << e.what() << '\n';
      }
      if (summary.is_open()) write_summary_row(summary, cfg, cell.result, cell.error);
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

std::vector<fs::path> dump_matrices(const ExperimentConfig& cfg, const fs::path& dir) {
  const Experiment ex = build_experiment(cfg);
  const TransportSystem& sys = ex.system;
  fs::create_directories(dir);
  std::vector<fs::path> written;
  auto put = [&](const std::string& name, const SpMat& m) {
    const fs::path p = dir / (name + ".mtx");
    auto out = open_out(p);
    write_matrix_market(m, out);
    written.push_back(p);
  };
  put("Mt", sys.Mt);
  put("Ma", sys.Ma);
  put("G", sys.G);
  for (int d = 0; d < sys.n_angles(); ++d) {
    put("F_d" + std::to_string(d), sys.F[d]);
    put("Ft_d" + std::to_string(d), sys.Ft[d]);
  }
  put("F0", sys.moments.F0);
  put("F1", sys.moments.F1);
  put("Ft1", sys.moments.Ft1);
  const DsaOperators ops = assemble_dsa_operators(sys);
  put("D0", ops.D0);
  put("D1", ops.D1);
  put("D_eps", ops.D_eps);
  put("D_ip", ops.D_ip);
  put("B_sip", ops.B_sip);
  put("B_mip", assemble_mip(sys, cfg.mip_cp));
  return written;
}

std::vector<OracleReport> run_verify(std::uint64_t seed, const fs::path& out_dir, std::ostream* log) {
  const auto reports = run_oracle_suite(seed);
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    auto csv = open_out(out_dir / "report.csv");
    write_reports_csv(reports, csv);
    auto txt = open_out(out_dir / "report.txt");
    write_reports_text(reports, txt);
  }
  if (log) write_reports_text(reports, *log);
  return reports;
}

}  // namespace slabdsa
