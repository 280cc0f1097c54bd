#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "qnlab/experiment.hpp"

namespace {

using namespace qnlab;

constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kBadInput = 2;
constexpr int kAborted = 3;

// Flag name -> config key. Flags are applied after the config file.
const std::vector<std::pair<std::string, std::string>> kFlagKeys = {
    {"--problem", "problem.kind"},        {"--d", "problem.d"},
    {"--kappa", "problem.kappa"},         {"--eigs", "problem.eigs"},
    {"--x0", "problem.x0"},               {"--init", "solver.inits"},
    {"--method", "solver.methods"},       {"--alpha", "solver.alpha"},
    {"--beta", "solver.beta"},            {"--max-iters", "solver.max_iters"},
    {"--seed", "solver.seed"},            {"--form", "solver.form"},
    {"--out", "output.dir"},              {"--snapshots", "output.snapshot_stride"},
    {"--workers", "output.workers"},
};

struct FlagSet {
  std::string config;
  std::map<std::string, std::string> values;
};

void add_flags(CLI::App* app, FlagSet& fs) {
  app->add_option("--config", fs.config, "flat section.key = value config file");
  for (const auto& [flag, key] : kFlagKeys) app->add_option(flag, fs.values[flag], "sets " + key);
}

ExperimentConfig resolve(CLI::App* app, const FlagSet& fs) {
  ExperimentConfig cfg = fs.config.empty() ? ExperimentConfig{} : load_config(fs.config);
  for (const auto& [flag, key] : kFlagKeys)
    if (app->count(flag) > 0) apply_setting(cfg, key, fs.values.at(flag));
  cfg.validate();
  return cfg;
}

void print_failure(const RunOutcome& o) {
  if (const CheckResult* f = o.report.first_failure())
    std::cout << fmt::format("{}: first failing check {} at t={} margin={:.6g}\n", o.runid, f->name,
                             f->first_fail_t, f->margin);
}

int cmd_run(CLI::App* app, const FlagSet& fs) {
  ExperimentConfig cfg = resolve(app, fs);
  const auto grid = expand_grid(cfg);
  if (grid.size() != 1) throw ConfigError(fmt::format("run needs exactly one grid cell, got {}", grid.size()));
  const RunOutcome o = execute_run(cfg, grid[0], true);
  const auto& rows = o.table.rows;
  std::cout << fmt::format("{}: status={} iterations={} final_gap_ratio={:.3e}\n", o.runid, o.table.ctx.status,
                           rows.empty() ? 0 : rows.back().t, rows.empty() ? 1.0 : rows.back().f_gap_ratio);
  std::cout << fmt::format("wrote {}/{}_trace.csv and {}_report.txt\n", cfg.out_dir, o.runid, o.runid);
  if (!o.ok) {
    std::cerr << "solver aborted: " << o.error << "\n";
    return kAborted;
  }
  return kOk;
}

int cmd_sweep(CLI::App* app, const FlagSet& fs) {
  ExperimentConfig cfg = resolve(app, fs);
  const auto results = execute_sweep(cfg, true);
  std::vector<ManifestRow> rows;
  int succeeded = 0;
  for (const auto& o : results) {
    rows.push_back(manifest_row(o));
    if (o.ok) ++succeeded;
    std::cout << fmt::format("{:<32} {:<16} iters={:<6} {}\n", o.runid, rows.back().status, rows.back().iters,
                             o.ok ? "" : o.error);
  }
  std::filesystem::create_directories(cfg.out_dir);
  const std::string path = (std::filesystem::path(cfg.out_dir) / "sweep_index.csv").string();
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  write_manifest(out, rows);
  std::cout << fmt::format("{} of {} runs succeeded; manifest {}\n", succeeded, results.size(), path);
  return succeeded > 0 ? kOk : kAborted;
}

std::string sidecar_for(const std::string& csv) {
  const std::string suffix = "_trace.csv";
  if (csv.size() > suffix.size() && csv.compare(csv.size() - suffix.size(), suffix.size(), suffix) == 0)
    return csv.substr(0, csv.size() - suffix.size()) + "_config.txt";
  throw InputError(csv + ": trace files must end in " + suffix);
}

int cmd_verify(CLI::App* app, const FlagSet& fs, const std::vector<std::string>& traces) {
  bool all = true;
  if (!traces.empty()) {
    if (!fs.config.empty()) throw ConfigError("verify takes either trace files or --config");
    for (const auto& path : traces) {
      const TraceTable table = load_table(path, sidecar_for(path));
      const BoundReport rep = verify_table(table);
      std::cout << format_report(rep, table.ctx) << "\n";
      if (const CheckResult* f = rep.first_failure()) {
        all = false;
        std::cout << fmt::format("{}: first failing check {} at t={} margin={:.6g}\n", table.ctx.runid, f->name,
                                 f->first_fail_t, f->margin);
      }
    }
    return all ? kOk : kCheckFailed;
  }
  if (fs.config.empty() && app->count("--problem") == 0)
    throw ConfigError("verify needs trace files, --config or --problem");
  ExperimentConfig cfg = resolve(app, fs);
  for (const auto& o : execute_sweep(cfg, false)) {
    if (!o.ok) std::cout << o.runid << ": solver aborted: " << o.error << "\n";
    std::cout << format_report(o.report, o.table.ctx) << "\n";
    if (!o.report.all_pass()) {
      all = false;
      print_failure(o);
    }
  }
  return all ? kOk : kCheckFailed;
}

int cmd_report(CLI::App* app, const FlagSet& fs) {
  std::cout << theory_report(resolve(app, fs));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"BFGS with Armijo-Wolfe log-bisection: runs, sweeps and bound verification"};
  app.require_subcommand(1);
  FlagSet run_flags, sweep_flags, verify_flags, report_flags;
  std::vector<std::string> traces;

  CLI::App* run = app.add_subcommand("run", "solve one (problem, method, init) cell");
  add_flags(run, run_flags);
  CLI::App* sweep = app.add_subcommand("sweep", "solve every grid cell and write sweep_index.csv");
  add_flags(sweep, sweep_flags);
  CLI::App* verify = app.add_subcommand("verify", "check bounds on trace CSVs or on fresh runs of a config");
  add_flags(verify, verify_flags);
  verify->add_option("traces", traces, "<runid>_trace.csv files (sidecar <runid>_config.txt alongside)");
  CLI::App* report = app.add_subcommand("report", "print theoretical constants for each grid cell");
  add_flags(report, report_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kBadInput;
  }

  try {
    if (*run) {
      if (run_flags.config.empty() && run->count("--problem") == 0)
        throw ConfigError("run needs --config or --problem");
      return cmd_run(run, run_flags);
    }
    if (*sweep) {
      if (sweep_flags.config.empty()) throw ConfigError("sweep needs --config");
      return cmd_sweep(sweep, sweep_flags);
    }
    if (*verify) return cmd_verify(verify, verify_flags, traces);
    return cmd_report(report, report_flags);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help() << "\n";
    return kBadInput;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBadInput;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kAborted;
  }
}
