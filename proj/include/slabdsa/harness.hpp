#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "slabdsa/dsa.hpp"
#include "slabdsa/expr.hpp"
#include "slabdsa/oracles.hpp"
#include "slabdsa/transport.hpp"

namespace slabdsa {

// Flat experiment description. sigma_t and sigma_a are the scaled
// coefficients s_t, s_a: the solver uses total opacity s_t/eps and absorption
// eps*s_a. The source expression f gives the physical source eps*f.
// Expressions may use x, and `source`/`inflow` may also use mu.
struct ExperimentConfig {
  std::string preset = "paper-1d";
  double domain_a = 0.0;
  double domain_b = 1.0;
  int n_elements = 100;
  int degree = 6;
  int n_angles = 4;
  double eps = 1e-4;
  std::string sigma_t = "1";
  std::string sigma_a = "1";
  std::string source = "2*sin(3*x^2)^2 + cos(x/3)^2";
  std::string inflow = "0";
  PrecondKind precond = PrecondKind::IP;
  int n_inner = 0;
  bool flux_each_sweep = false;
  std::string ordering = "upwind";
  double adversarial_fraction = 0.5;
  std::uint64_t seed = 7;
  int max_iters = 40;
  double tol = 1e-10;
  double mip_cp = 4.0;
  bool reference = false;
  bool dump_matrices = false;
  int group = 1;

  // Resets every field to the named preset ("paper-1d").
  void apply_preset(const std::string& name);
  // Throws Error(Config) naming the key on unknown keys or malformed values.
  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key) const;
  static const std::vector<std::string>& keys();

  // key = value lines; '#' starts a comment. A `preset` line resets all
  // fields, so put it first.
  void load_text(const std::string& text);
  void load_file(const std::filesystem::path& path);
  std::string to_text() const;

  // Field-level range checks; throws Error(Config) listing every problem.
  void validate() const;
};

ExperimentConfig preset_config(const std::string& name);

// Assembled pieces of a configured experiment.
struct Experiment {
  ExperimentConfig config;
  TransportSystem system;
  SweepOrdering ordering;
};
Experiment build_experiment(const ExperimentConfig& cfg);
ProblemData problem_data(const ExperimentConfig& cfg);

// Thickness diagnostic min{eps/(h sigma_t), eps sqrt(sigma_a/sigma_t)} with
// physical opacities, maximized over elements (the least thick element).
double thickness_eta(const ExperimentConfig& cfg);

struct ExperimentResult {
  IterationHistory history;
  double eta = 0.0;
  double reference_error = 0.0;  // NaN without a reference solve
  std::string status;            // converged | diverged | not-converged | zero-source
};

// Runs one experiment. With a non-empty out_dir writes history.csv,
// summary.csv, config.txt and (if requested) matrices/. Progress goes to log.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                                std::ostream* log = nullptr);

struct ScanCell {
  double eps = 0.0;
  std::string precond;
  ExperimentResult result;
  std::string error;  // non-empty when the cell threw
};

// One run per (eps, preconditioner) pair, eps-major. Cell errors are recorded
// and the scan continues. Writes summary.csv and cell_<i>/history.csv.
std::vector<ScanCell> run_scan(const ExperimentConfig& base, const std::vector<double>& eps_list,
                               const std::vector<std::string>& preconds, const std::filesystem::path& out_dir,
                               std::ostream* log = nullptr);

void write_summary_header(std::ostream& out);
void write_summary_row(std::ostream& out, const ExperimentConfig& cfg, const ExperimentResult& r,
                       const std::string& error = {});

// Matrix Market dumps of every assembled operator into dir.
std::vector<std::filesystem::path> dump_matrices(const ExperimentConfig& cfg, const std::filesystem::path& dir);

// Oracle suite with report.csv and report.txt in out_dir (when non-empty).
std::vector<OracleReport> run_verify(std::uint64_t seed, const std::filesystem::path& out_dir,
                                     std::ostream* log = nullptr);

}  // namespace slabdsa
