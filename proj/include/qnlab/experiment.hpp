#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qnlab/verify.hpp"

namespace qnlab {

// Flat `section.key = value` experiment description.
struct ExperimentConfig {
  std::string kind = "cubic";  // cubic | quadratic
  std::vector<int> dims{100};
  std::vector<double> kappas{100.0};
  double delta = 1.0;
  double beta_f = 1.0;
  std::vector<double> eigs;  // quadratic: explicit spectrum, overrides dims/kappas
  std::string x0 = "auto";   // auto | zero | ones | random | comma list
  std::uint64_t x0_seed = 0;

  std::vector<Method> methods{Method::bfgs};
  std::vector<InitKind> inits{InitKind::mu_identity};
  double alpha = 0.1;
  double beta = 0.9;
  int max_iters = 5000;
  int gd_max_iters = 200000;
  double grad_tol = 1e-12;
  double gap_tol = 1e-12;
  std::uint64_t seed = 0;
  MatrixForm form = MatrixForm::inverse;

  std::string out_dir = "out";
  bool csv = true;
  int snapshot_stride = 0;  // 0 disables B_t snapshots
  std::string report = "text";
  int workers = 0;  // 0 = hardware concurrency

  void validate() const;
};

// Throws ConfigError on unknown keys or bad values.
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value);
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);
std::map<std::string, std::string> config_entries(const ExperimentConfig& cfg);

// One cell of the experiment grid.
struct RunSpec {
  int d = 0;
  double kappa = 0.0;
  Method method = Method::bfgs;
  InitKind init = InitKind::mu_identity;
};

std::vector<RunSpec> expand_grid(const ExperimentConfig& cfg);
std::string run_id(const ExperimentConfig& cfg, const RunSpec& spec);
Problem build_problem(const ExperimentConfig& cfg, const RunSpec& spec);
// Quadratic spectra default to log-spaced eigenvalues in [1, kappa].
std::vector<double> log_spaced_spectrum(int d, double kappa);
Vector initial_point(const ExperimentConfig& cfg, const Problem& problem);
SolverConfig build_solver(const ExperimentConfig& cfg, const Problem& problem, const RunSpec& spec);

struct RunOutcome {
  std::string runid;
  RunSpec spec;
  bool ok = false;  // solver finished without aborting
  std::string error;
  TraceTable table;
  BoundReport report;
};

// Runs one cell. With write_files, emits <runid>_trace.csv, _report.txt and
// _config.txt under cfg.out_dir (partial trace on abort).
RunOutcome execute_run(const ExperimentConfig& cfg, const RunSpec& spec, bool write_files);

struct ManifestRow {
  std::string runid;
  int d = 0;
  double kappa = 0.0;
  std::string init;
  std::string method;
  int iters = 0;
  double final_gap_ratio = 0.0;
  int t_unit = -1;
  int max_lambda = 0;
  double mean_lambda = 0.0;
  std::string status;
};

ManifestRow manifest_row(const RunOutcome& outcome);
void write_manifest(std::ostream& out, const std::vector<ManifestRow>& rows);
std::vector<ManifestRow> read_manifest(std::istream& in);

// Every grid cell, executed on a worker pool; results in grid order.
std::vector<RunOutcome> execute_sweep(const ExperimentConfig& cfg, bool write_files);

// Text summary of the theoretical constants for each grid cell.
std::string theory_report(const ExperimentConfig& cfg);

}  // namespace qnlab
