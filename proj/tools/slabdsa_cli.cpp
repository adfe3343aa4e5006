// Command-line front end. Talks to the library only through slabdsa.h.
#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "slabdsa.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitDiverged = 2;

struct ConfigOptions {
  std::string preset, config_file, eps, precond, inner, flux_update, ordering, fraction, seed, group;
  std::vector<std::string> sets;
  bool dump = false, reference = false;
};

void add_config_options(CLI::App* app, ConfigOptions& o) {
  app->add_option("--preset", o.preset, "Named preset (paper-1d)");
  app->add_option("--config", o.config_file, "key = value config file")->check(CLI::ExistingFile);
  app->add_option("--set", o.sets, "Override: key=value (repeatable)");
  app->add_option("--eps", o.eps, "Scaling parameter eps");
  app->add_option("--precond", o.precond, "none | sip | ip | mip | additive");
  app->add_option("--inner-sweeps", o.inner, "Extra lagged sweeps per outer step");
  app->add_option("--flux-update", o.flux_update, "frozen | each-sweep");
  app->add_option("--ordering", o.ordering, "upwind | adversarial");
  app->add_option("--fraction", o.fraction, "Fraction of couplings lagged by the adversarial ordering");
  app->add_option("--seed", o.seed, "Seed for the adversarial ordering");
  app->add_option("--group", o.group, "Keep every g-th history row");
  app->add_flag("--dump-matrices", o.dump, "Write Matrix Market dumps next to the history");
  app->add_flag("--reference", o.reference, "Track the error against a direct solve");
}

bool check(sd_status s) {
  if (s == SD_OK) return true;
  std::cerr << "error (" << sd_status_name(s) << "): " << sd_last_error() << '\n';
  return false;
}

// Builds the config handle: preset, then file, then --set, then flags.
sd_config* make_config(const ConfigOptions& o) {
  sd_config* cfg = nullptr;
  if (!check(sd_config_new(&cfg))) return nullptr;
  bool ok = true;
  auto set = [&](const char* key, const std::string& v) {
    if (ok && !v.empty()) ok = check(sd_config_set(cfg, key, v.c_str()));
  };
  if (!o.preset.empty()) ok = check(sd_config_preset(cfg, o.preset.c_str()));
  if (ok && !o.config_file.empty()) ok = check(sd_config_load(cfg, o.config_file.c_str()));
  for (const auto& kv : o.sets) {
    if (!ok) break;
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::cerr << "error (config): --set expects key=value, got '" << kv << "'\n";
      ok = false;
      break;
    }
    set(kv.substr(0, eq).c_str(), kv.substr(eq + 1));
  }
  set("eps", o.eps);
  set("precond", o.precond);
  set("n_inner", o.inner);
  set("flux_update", o.flux_update);
  set("ordering", o.ordering);
  set("adversarial_fraction", o.fraction);
  set("seed", o.seed);
  set("group", o.group);
  if (o.dump) set("dump_matrices", "true");
  if (o.reference) set("reference", "true");
  if (ok) ok = check(sd_config_validate(cfg));
  if (!ok) {
    sd_config_free(cfg);
    return nullptr;
  }
  return cfg;
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ','))
    if (!tok.empty()) out.push_back(tok);
  return out;
}

int cmd_run(const ConfigOptions& o, const std::string& out_dir) {
  sd_config* cfg = make_config(o);
  if (!cfg) return kExitConfig;
  sd_result* r = nullptr;
  const sd_status s = sd_run(cfg, out_dir.c_str(), &r);
  sd_config_free(cfg);
  if (!check(s)) return kExitConfig;
  std::printf("status      %s\n", sd_result_status(r));
  std::printf("iterations  %d\n", sd_result_iterations(r));
  std::printf("sweeps      %ld\n", sd_result_sweeps(r));
  std::printf("final error %.6e\n", sd_result_final_error(r));
  std::printf("residual    %.6e\n", sd_result_final_residual(r));
  std::printf("eta         %.6e\n", sd_result_eta(r));
  const double ref = sd_result_reference_error(r);
  if (ref == ref) std::printf("ref error   %.6e\n", ref);
  const int code = sd_result_diverged(r) ? kExitDiverged : kExitOk;
  sd_result_free(r);
  return code;
}

int cmd_scan(const ConfigOptions& o, const std::string& out_dir, const std::string& eps_list,
             const std::string& precond_list, bool fail_on_divergence) {
  sd_config* cfg = make_config(o);
  if (!cfg) return kExitConfig;
  std::vector<double> eps;
  for (const auto& t : split(eps_list)) {
    try {
      eps.push_back(std::stod(t));
    } catch (const std::exception&) {
      std::cerr << "error (config): --eps-list: bad number '" << t << "'\n";
      sd_config_free(cfg);
      return kExitConfig;
    }
  }
  const auto names = split(precond_list);
  std::vector<const char*> ptrs;
  for (const auto& n : names) ptrs.push_back(n.c_str());
  int n_div = 0, n_failed = 0;
  const sd_status s = sd_scan(cfg, eps.data(), eps.size(), ptrs.data(), ptrs.size(), out_dir.c_str(), &n_div, &n_failed);
  sd_config_free(cfg);
  if (!check(s)) return kExitConfig;
  if (!out_dir.empty()) {
    std::ifstream in(out_dir + "/summary.csv");
    std::cout << in.rdbuf();
  }
  std::printf("%zu cells, %d diverged, %d failed\n", eps.size() * names.size(), n_div, n_failed);
  return fail_on_divergence && n_div > 0 ? kExitDiverged : kExitOk;
}

int cmd_verify(unsigned long long seed, const std::string& out_dir) {
  sd_report* rep = nullptr;
  if (!check(sd_verify(seed, out_dir.c_str(), &rep))) return kExitConfig;
  for (int i = 0; i < sd_report_count(rep); ++i) {
    const char* name = nullptr;
    double measured = 0, lo = 0, hi = 0;
    int pass = 0;
    sd_report_entry(rep, i, &name, &measured, &lo, &hi, &pass);
    if (hi > 0)
      std::printf("%2d %s %-34s %.4g in [%.4g, %.4g]\n", i + 1, pass ? "PASS" : "FAIL", name, measured, lo, hi);
    else
      std::printf("%2d %s %-34s %.4g <= %.4g\n", i + 1, pass ? "PASS" : "FAIL", name, measured, lo);
  }
  const int code = sd_report_all_pass(rep) ? kExitOk : kExitDiverged;
  sd_report_free(rep);
  return code;
}

int cmd_dump(const ConfigOptions& o, const std::string& out_dir) {
  sd_config* cfg = make_config(o);
  if (!cfg) return kExitConfig;
  const bool ok = check(sd_dump(cfg, out_dir.c_str()));
  sd_config_free(cfg);
  if (ok) std::printf("matrices written to %s\n", out_dir.c_str());
  return ok ? kExitOk : kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Slab S_N DG transport with diffusion synthetic acceleration"};
  app.require_subcommand(1);

  ConfigOptions run_opts, scan_opts, dump_opts;
  std::string run_out, scan_out, verify_out, dump_out;
  std::string eps_list = "0.75,1e-1,1e-2,1e-3,1e-4", precond_list = "none,sip,ip,additive";
  bool fail_on_divergence = false;
  unsigned long long verify_seed = 2024;

  auto* run = app.add_subcommand("run", "Run one experiment");
  add_config_options(run, run_opts);
  run->add_option("--out", run_out, "Output directory for history.csv and summary.csv");

  auto* scan = app.add_subcommand("scan", "Run an eps x preconditioner scan");
  add_config_options(scan, scan_opts);
  scan->add_option("--out", scan_out, "Output directory");
  scan->add_option("--eps-list", eps_list, "Comma-separated eps values")->capture_default_str();
  scan->add_option("--preconds", precond_list, "Comma-separated preconditioners")->capture_default_str();
  scan->add_flag("--fail-on-divergence", fail_on_divergence, "Exit 2 when any cell diverges");

  auto* verify = app.add_subcommand("verify", "Run the oracle suite");
  verify->add_option("--seed", verify_seed, "Seed for random instances")->capture_default_str();
  verify->add_option("--out", verify_out, "Output directory for report.csv and report.txt");

  auto* dump = app.add_subcommand("dump", "Write assembled matrices in Matrix Market format");
  add_config_options(dump, dump_opts);
  dump->add_option("--out", dump_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (run->parsed()) return cmd_run(run_opts, run_out);
  if (scan->parsed()) return cmd_scan(scan_opts, scan_out, eps_list, precond_list, fail_on_divergence);
  if (verify->parsed()) return cmd_verify(verify_seed, verify_out);
  if (dump->parsed()) return cmd_dump(dump_opts, dump_out);
  return kExitConfig;
}
