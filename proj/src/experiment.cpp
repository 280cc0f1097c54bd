#include "qnlab/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include <fmt/format.h>

namespace qnlab {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& s) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != s.size() || !std::isfinite(v))
    throw ConfigError(fmt::format("{}: '{}' is not a number", key, s));
  return v;
}

long long to_int(const std::string& key, const std::string& s) {
  std::size_t pos = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != s.size()) throw ConfigError(fmt::format("{}: '{}' is not an integer", key, s));
  return v;
}

bool to_bool(const std::string& key, const std::string& s) {
  if (s == "true" || s == "1" || s == "on" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "off" || s == "no") return false;
  throw ConfigError(fmt::format("{}: '{}' is not a boolean", key, s));
}

template <class T, class F>
std::string join(const std::vector<T>& v, F f) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + f(v[i]);
  return out;
}

std::string num(double v) { return fmt::format("{:g}", v); }

}  // namespace

void ExperimentConfig::validate() const {
  if (kind != "cubic" && kind != "quadratic") throw ConfigError("problem.kind must be cubic or quadratic");
  if (kind == "cubic" && eigs.size() > 0) throw ConfigError("problem.eigs only applies to quadratic problems");
  if (eigs.empty()) {
    for (int d : dims)
      if (d < (kind == "cubic" ? 2 : 1)) throw ConfigError("problem.d too small");
    for (double k : kappas)
      if (kind == "cubic" ? !(k > 1.0) : !(k >= 1.0)) throw ConfigError("problem.kappa out of range");
  }
  if (!(delta > 0.0)) throw ConfigError("problem.delta must be positive");
  if (methods.empty()) throw ConfigError("solver.methods is empty");
  if (max_iters < 1 || gd_max_iters < 1) throw ConfigError("iteration budgets must be positive");
  if (!(grad_tol > 0.0) || !(gap_tol > 0.0)) throw ConfigError("tolerances must be positive");
  if (snapshot_stride < 0) throw ConfigError("output.snapshot_stride must be >= 0");
  if (report != "text") throw ConfigError("output.report must be text");
  if (workers < 0) throw ConfigError("output.workers must be >= 0");
  WolfeParams{alpha, beta}.validate();
}

void apply_setting(ExperimentConfig& c, const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (key == "problem.kind") {
    c.kind = v;
  } else if (key == "problem.d") {
    c.dims.clear();
    for (const auto& s : split_list(v)) c.dims.push_back(static_cast<int>(to_int(key, s)));
  } else if (key == "problem.kappa") {
    c.kappas.clear();
    for (const auto& s : split_list(v)) c.kappas.push_back(to_double(key, s));
  } else if (key == "problem.delta") {
    c.delta = to_double(key, v);
  } else if (key == "problem.beta_f") {
    c.beta_f = to_double(key, v);
  } else if (key == "problem.eigs") {
    c.eigs.clear();
    for (const auto& s : split_list(v)) c.eigs.push_back(to_double(key, s));
  } else if (key == "problem.x0") {
    c.x0 = v;
  } else if (key == "problem.x0_seed") {
    c.x0_seed = static_cast<std::uint64_t>(to_int(key, v));
  } else if (key == "solver.methods") {
    c.methods.clear();
    for (const auto& s : split_list(v)) c.methods.push_back(parse_method(s));
  } else if (key == "solver.inits") {
    c.inits.clear();
    for (const auto& s : split_list(v)) c.inits.push_back(parse_init(s));
  } else if (key == "solver.alpha") {
    c.alpha = to_double(key, v);
  } else if (key == "solver.beta") {
    c.beta = to_double(key, v);
  } else if (key == "solver.max_iters") {
    c.max_iters = static_cast<int>(to_int(key, v));
  } else if (key == "solver.gd_max_iters") {
    c.gd_max_iters = static_cast<int>(to_int(key, v));
  } else if (key == "solver.grad_tol") {
    c.grad_tol = to_double(key, v);
  } else if (key == "solver.gap_tol") {
    c.gap_tol = to_double(key, v);
  } else if (key == "solver.seed") {
    c.seed = static_cast<std::uint64_t>(to_int(key, v));
  } else if (key == "solver.form") {
    if (v == "inverse") c.form = MatrixForm::inverse;
    else if (v == "direct") c.form = MatrixForm::direct;
    else throw ConfigError("solver.form must be inverse or direct");
  } else if (key == "output.dir") {
    c.out_dir = v;
  } else if (key == "output.csv") {
    c.csv = to_bool(key, v);
  } else if (key == "output.snapshot_stride") {
    c.snapshot_stride = static_cast<int>(to_int(key, v));
  } else if (key == "output.report") {
    c.report = v;
  } else if (key == "output.workers") {
    c.workers = static_cast<int>(to_int(key, v));
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(fmt::format("config line {}: expected key = value", lineno));
    apply_setting(cfg, trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path);
  return parse_config(in);
}

std::map<std::string, std::string> config_entries(const ExperimentConfig& c) {
  std::map<std::string, std::string> m;
  m["problem.kind"] = c.kind;
  m["problem.d"] = join(c.dims, [](int d) { return std::to_string(d); });
  m["problem.kappa"] = join(c.kappas, num);
  m["problem.delta"] = num(c.delta);
  m["problem.beta_f"] = num(c.beta_f);
  m["problem.eigs"] = join(c.eigs, num);
  m["problem.x0"] = c.x0;
  m["problem.x0_seed"] = std::to_string(c.x0_seed);
  m["solver.methods"] = join(c.methods, [](Method x) { return std::string(method_name(x)); });
  m["solver.inits"] = join(c.inits, [](InitKind x) { return std::string(init_name(x)); });
  m["solver.alpha"] = num(c.alpha);
  m["solver.beta"] = num(c.beta);
  m["solver.max_iters"] = std::to_string(c.max_iters);
  m["solver.gd_max_iters"] = std::to_string(c.gd_max_iters);
  m["solver.grad_tol"] = num(c.grad_tol);
  m["solver.gap_tol"] = num(c.gap_tol);
  m["solver.seed"] = std::to_string(c.seed);
  m["solver.form"] = c.form == MatrixForm::inverse ? "inverse" : "direct";
  m["output.dir"] = c.out_dir;
  m["output.csv"] = c.csv ? "true" : "false";
  m["output.snapshot_stride"] = std::to_string(c.snapshot_stride);
  m["output.report"] = c.report;
  m["output.workers"] = std::to_string(c.workers);
  return m;
}

std::vector<RunSpec> expand_grid(const ExperimentConfig& cfg) {
  std::vector<RunSpec> out;
  std::vector<std::pair<int, double>> cells;
  if (!cfg.eigs.empty()) {
    const auto [lo, hi] = std::minmax_element(cfg.eigs.begin(), cfg.eigs.end());
    cells.emplace_back(static_cast<int>(cfg.eigs.size()), *hi / *lo);
  } else {
    for (int d : cfg.dims)
      for (double k : cfg.kappas) cells.emplace_back(d, k);
  }
  for (const auto& [d, k] : cells) {
    for (Method m : cfg.methods) {
      if (m == Method::gd) {
        out.push_back({d, k, m, InitKind::identity});
        continue;
      }
      for (InitKind init : cfg.inits) out.push_back({d, k, m, init});
    }
  }
  return out;
}

std::string run_id(const ExperimentConfig& cfg, const RunSpec& s) {
  const std::string head = cfg.kind == "cubic" ? "cubic" : "quad";
  const std::string tail = s.method == Method::gd ? "gd" : std::string(init_name(s.init)) + "_bfgs";
  return fmt::format("{}_d{}_k{:g}_{}", head, s.d, s.kappa, tail);
}

std::vector<double> log_spaced_spectrum(int d, double kappa) {
  std::vector<double> e(d);
  for (int i = 0; i < d; ++i) e[i] = d == 1 ? 1.0 : std::pow(kappa, static_cast<double>(i) / (d - 1));
  return e;
}

Problem build_problem(const ExperimentConfig& cfg, const RunSpec& s) {
  if (cfg.kind == "cubic") return make_cubic_problem(s.d, s.kappa, cfg.delta, cfg.beta_f);
  if (!cfg.eigs.empty()) return make_quadratic_problem(static_cast<int>(cfg.eigs.size()), cfg.eigs);
  return make_quadratic_problem(s.d, log_spaced_spectrum(s.d, s.kappa));
}

Vector initial_point(const ExperimentConfig& cfg, const Problem& problem) {
  const int d = problem.dim();
  std::string spec = cfg.x0;
  if (spec == "auto") spec = problem.kind() == ProblemKind::quadratic ? "ones" : "zero";
  if (spec == "zero") return Vector::Zero(d);
  if (spec == "ones") return Vector::Ones(d);
  if (spec == "random") {
    std::mt19937_64 rng(cfg.x0_seed);
    std::normal_distribution<double> normal;
    Vector x(d);
    for (int i = 0; i < d; ++i) x[i] = normal(rng);
    return x;
  }
  const auto parts = split_list(spec);
  if (static_cast<int>(parts.size()) != d)
    throw ConfigError(fmt::format("problem.x0 has {} entries, expected {}", parts.size(), d));
  Vector x(d);
  for (int i = 0; i < d; ++i) x[i] = to_double("problem.x0", parts[i]);
  return x;
}

SolverConfig build_solver(const ExperimentConfig& cfg, const Problem& problem, const RunSpec& s) {
  SolverConfig sc;
  sc.method = s.method;
  sc.init.kind = s.init;
  sc.form = cfg.form;
  sc.wolfe.alpha = cfg.alpha;
  sc.wolfe.beta = cfg.beta;
  sc.max_iters = s.method == Method::gd ? cfg.gd_max_iters : cfg.max_iters;
  sc.stop_grad_tol = cfg.grad_tol;
  sc.stop_gap_tol = cfg.gap_tol;
  sc.seed = cfg.seed;
  sc.record_matrices = s.method == Method::bfgs && cfg.snapshot_stride > 0;
  sc.snapshot_stride = std::max(1, cfg.snapshot_stride);
  // Gradient descent traces can run to 10^5 iterations; keep scalars only.
  sc.record_vectors = s.method == Method::bfgs;
  sc.x0 = initial_point(cfg, problem);
  return sc;
}

RunOutcome execute_run(const ExperimentConfig& cfg, const RunSpec& spec, bool write_files) {
  cfg.validate();
  RunOutcome out;
  out.spec = spec;
  out.runid = run_id(cfg, spec);
  const Problem problem = build_problem(cfg, spec);
  const SolverConfig sc = build_solver(cfg, problem, spec);
  RunTrace trace;
  try {
    trace = run(problem, sc);
    out.ok = true;
  } catch (const RunAborted& e) {
    trace = e.partial();
    out.error = e.what();
  }
  const auto diag = compute_diagnostics(trace, problem);
  out.table = make_table(trace, diag, problem, out.runid);
  for (const auto& [k, v] : config_entries(cfg)) out.table.ctx.extra["config." + k] = v;
  out.report = verify_run(trace, problem, diag, out.table);
  if (write_files) {
    std::filesystem::create_directories(cfg.out_dir);
    const std::filesystem::path dir(cfg.out_dir);
    const std::string base = (dir / out.runid).string();
    if (cfg.csv) save_table(out.table, base + "_trace.csv", base + "_config.txt");
    std::ofstream rep(base + "_report.txt");
    if (!rep) throw InputError("cannot write " + base + "_report.txt");
    if (!out.ok) rep << "solver aborted: " << out.error << "\n\n";
    rep << format_report(out.report, out.table.ctx);
  }
  return out;
}

ManifestRow manifest_row(const RunOutcome& o) {
  ManifestRow m;
  m.runid = o.runid;
  m.d = o.spec.d;
  m.kappa = o.spec.kappa;
  m.init = o.spec.method == Method::gd ? "-" : init_name(o.spec.init);
  m.method = method_name(o.spec.method);
  m.status = o.table.ctx.status.empty() ? "aborted" : o.table.ctx.status;
  const auto& rows = o.table.rows;
  if (rows.empty()) return m;
  m.iters = rows.back().t;
  m.final_gap_ratio = rows.back().f_gap_ratio;
  m.t_unit = superlinear_onset(rows);
  long total = 0;
  int steps = 0;
  for (const auto& r : rows)
    if (r.lambda_t >= 0) {
      total += r.lambda_t;
      ++steps;
      m.max_lambda = std::max(m.max_lambda, r.lambda_t);
    }
  m.mean_lambda = steps ? static_cast<double>(total) / steps : 0.0;
  return m;
}

void write_manifest(std::ostream& out, const std::vector<ManifestRow>& rows) {
  out << "runid,d,kappa,init,method,iters,final_gap_ratio,T_unit,max_lambda,mean_lambda,status\n";
  for (const auto& m : rows)
    out << m.runid << ',' << m.d << ',' << format_double(m.kappa) << ',' << m.init << ',' << m.method << ','
        << m.iters << ',' << format_double(m.final_gap_ratio) << ',' << (m.t_unit < 0 ? "" : std::to_string(m.t_unit))
        << ',' << m.max_lambda << ',' << format_double(m.mean_lambda) << ',' << m.status << '\n';
}

std::vector<ManifestRow> read_manifest(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != "runid,d,kappa,init,method,iters,final_gap_ratio,T_unit,max_lambda,mean_lambda,status")
    throw InputError("unexpected manifest header");
  std::vector<ManifestRow> rows;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) f.push_back(trim(item));
    if (line.back() == ',') f.emplace_back();
    if (f.size() != 11) throw InputError("manifest row has wrong field count");
    ManifestRow m;
    try {
      m.runid = f[0];
      m.d = std::stoi(f[1]);
      m.kappa = std::stod(f[2]);
      m.init = f[3];
      m.method = f[4];
      m.iters = std::stoi(f[5]);
      m.final_gap_ratio = f[6].empty() ? std::nan("") : std::stod(f[6]);
      m.t_unit = f[7].empty() ? -1 : std::stoi(f[7]);
      m.max_lambda = std::stoi(f[8]);
      m.mean_lambda = std::stod(f[9]);
      m.status = f[10];
    } catch (const std::exception&) {
      throw InputError("malformed manifest row: " + line);
    }
    rows.push_back(m);
  }
  return rows;
}

std::vector<RunOutcome> execute_sweep(const ExperimentConfig& cfg, bool write_files) {
  cfg.validate();
  const auto grid = expand_grid(cfg);
  if (grid.empty()) throw ConfigError("experiment grid is empty");
  std::vector<RunOutcome> results(grid.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < grid.size();) {
      try {
        results[i] = execute_run(cfg, grid[i], write_files);
      } catch (const Error& e) {
        results[i].runid = run_id(cfg, grid[i]);
        results[i].spec = grid[i];
        results[i].error = e.what();
      }
    }
  };
  unsigned n = cfg.workers > 0 ? static_cast<unsigned>(cfg.workers) : std::thread::hardware_concurrency();
  n = std::max(1u, std::min<unsigned>(n, static_cast<unsigned>(grid.size())));
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < n; ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return results;
}

std::string theory_report(const ExperimentConfig& cfg) {
  cfg.validate();
  std::ostringstream out;
  const DeltaConstants dc = delta_constants(cfg.alpha, cfg.beta);
  out << fmt::format("line search alpha={:g} beta={:g}\n", cfg.alpha, cfg.beta);
  out << fmt::format("delta1..8 = {:.6g} {:.6g} {:.6g} {:.6g} {:.6g} {:.6g} {:.6g} {:.6g}\n\n", dc.d1, dc.d2,
                     dc.d3, dc.d4, dc.d5, dc.d6, dc.d7, dc.d8);
  for (const RunSpec& s : expand_grid(cfg)) {
    if (s.method != Method::bfgs) continue;
    const Problem p = build_problem(cfg, s);
    const SolverConfig sc = build_solver(cfg, p, s);
    InitScheme init = sc.init;
    if (init.kind == InitKind::c_identity)
      init.probes = std::make_pair(Vector(*sc.x0), Vector(*sc.x0 + probe_direction(p.dim(), sc.seed)));
    const Matrix b0 = initial_matrix(p.dim(), init, p);
    const double pbar = psi(b0 / p.L());
    const double ptil = WeightScheme::hessian_at_star(p).psi_of(b0);
    const double c0 = compute_Ct(p.value(*sc.x0), p.f_star(), p.mu(), p.M());
    const double k = p.kappa();
    const auto s3 = thm3_constants(ptil, pbar, c0, k, cfg.alpha, cfg.beta);
    const double sigma = lambda_sigma(pbar, k, c0, cfg.alpha, cfg.beta);
    out << fmt::format("{}: d={} kappa={:.6g} mu={:.6g} L={:.6g} M={:.6g}\n", run_id(cfg, s), p.dim(), k,
                       p.mu(), p.L(), p.M());
    out << fmt::format("  C0={:.6g} psi(Bbar0)={:.6g} psi(Btilde0)={:.6g} B0 scale={:.6g}\n", c0, pbar, ptil,
                       b0(0, 0));
    out << fmt::format("  kappa-free linear phase from t >= {:.6g}\n",
                       thm2_threshold(ptil, pbar, c0, k, cfg.alpha, cfg.beta));
    out << fmt::format("  superlinear envelope K={:.6g}, C_t <= delta1 from t >= {:.6g}\n", s3.K, s3.t0);
    out << fmt::format("  iterations with rho outside [delta2, delta3] <= {:.6g}\n",
                       bad_rho_bound(ptil, pbar, c0, k, cfg.alpha, cfg.beta));
    out << fmt::format("  sigma={:.6g}, average loops <= {:.6g} at t=100\n", sigma,
                       bound_linesearch_lambda(100, sigma, ptil, cfg.alpha, cfg.beta));
    if (s.init != InitKind::custom) {
      const double c = b0(0, 0);
      const auto cr = complexity_report(p.dim(), k, c0, 1e-10, s.init, c, p.mu(), p.L());
      out << fmt::format("  complexity at eps=1e-10: linear={:.6g} linear_free={:.6g} superlinear={:.6g} ({})\n",
                         cr.linear, cr.linear_free, cr.superlinear, cr.label());
    }
  }
  return out.str();
}

}  // namespace qnlab
