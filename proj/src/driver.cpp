#include "qnlab/driver.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace qnlab {

const char* method_name(Method m) { return m == Method::bfgs ? "bfgs" : "gd"; }

Method parse_method(const std::string& name) {
  if (name == "bfgs") return Method::bfgs;
  if (name == "gd") return Method::gd;
  throw ConfigError("unknown method '" + name + "' (expected bfgs or gd)");
}

const char* status_name(RunStatus s) {
  switch (s) {
    case RunStatus::converged_grad: return "converged_grad";
    case RunStatus::converged_gap: return "converged_gap";
    case RunStatus::max_iters: return "max_iters";
    case RunStatus::aborted: return "aborted";
  }
  return "?";
}

void SolverConfig::validate() const {
  if (max_iters < 1) throw ConfigError("max_iters must be at least 1");
  if (!(stop_grad_tol > 0.0) || !(stop_gap_tol > 0.0)) throw ConfigError("tolerances must be positive");
  if (snapshot_stride < 1) throw ConfigError("snapshot stride must be positive");
  if (method == Method::bfgs) wolfe.validate();
  if (method == Method::gd && !(wolfe.alpha > 0.0 && wolfe.alpha < 1.0))
    throw ConfigError("backtracking needs 0 < alpha < 1");
}

const Matrix* RunTrace::snapshot_at(int t) const {
  for (const auto& s : snapshots)
    if (s.t == t) return &s.B;
  return nullptr;
}

Vector probe_direction(int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Vector u(d);
  do {
    for (int i = 0; i < d; ++i) u[i] = normal(rng);
  } while (u.norm() == 0.0);
  return u / u.norm();
}

namespace {

struct Start {
  Vector x;
  double f;
  Vector g;
};

Start start_point(const Problem& problem, const SolverConfig& config) {
  Start s;
  s.x = config.x0 ? *config.x0 : Vector::Zero(problem.dim());
  if (s.x.size() != problem.dim()) throw ConfigError("x0 length does not match problem dimension");
  if (!s.x.allFinite()) throw ConfigError("x0 has non-finite entries");
  s.f = problem.value(s.x);
  s.g = problem.gradient(s.x);
  return s;
}

IterRecord make_record(int t, const Vector& x, double f, const Vector& g, double f_star, bool keep) {
  IterRecord r;
  r.t = t;
  r.f = f;
  r.grad_norm = g.norm();
  r.f_gap = f - f_star;
  if (keep) {
    r.x = x;
    r.g = g;
  }
  return r;
}

// Decides whether the run stops at the freshly appended record. Gradients below
// the reference solve tolerance cannot be told apart from the minimizer.
bool should_stop(RunTrace& trace, const SolverConfig& config, const Problem& problem) {
  const IterRecord& r = trace.records.back();
  if (r.grad_norm <= std::max(config.stop_grad_tol, problem.reference_tol())) {
    trace.status = RunStatus::converged_grad;
    return true;
  }
  const double gap0 = trace.records.front().f_gap;
  if (gap0 > 0.0 && r.f_gap / gap0 <= config.stop_gap_tol) {
    trace.status = RunStatus::converged_gap;
    return true;
  }
  if (r.t >= config.max_iters) {
    trace.status = RunStatus::max_iters;
    return true;
  }
  return false;
}

void fill_step(IterRecord& r, const Vector& g, const Vector& d, const Vector& s, const Vector& y,
               bool keep) {
  r.has_step = true;
  r.g_dot_d = g.dot(d);
  r.g_dot_s = g.dot(s);
  r.sy_dot = s.dot(y);
  if (keep) {
    r.d = d;
    r.s = s;
    r.y = y;
  }
}

[[noreturn]] void abort_run(RunTrace&& trace, const Error& e) {
  trace.status = RunStatus::aborted;
  trace.error = e.what();
  throw RunAborted(std::string("run aborted: ") + e.what(),
                   std::make_shared<RunTrace>(std::move(trace)));
}

}  // namespace

RunTrace run_bfgs(const Problem& problem, const SolverConfig& config) {
  config.validate();
  RunTrace trace;
  trace.config = config;
  trace.config.method = Method::bfgs;
  trace.f_star = problem.f_star();
  Start st = start_point(problem, config);

  InitScheme init = config.init;
  if (init.kind == InitKind::c_identity && !init.probes) {
    init.probes = std::make_pair(Vector(st.x), Vector(st.x + probe_direction(problem.dim(), config.seed)));
    trace.config.init = init;
  }
  trace.B0 = initial_matrix(problem.dim(), init, problem);
  BfgsState state(trace.B0, config.form);
  // Direct copy kept alongside the inverse form when B_t snapshots are requested.
  std::optional<BfgsState> shadow;
  if (config.record_matrices && config.form == MatrixForm::inverse)
    shadow.emplace(trace.B0, MatrixForm::direct);

  Vector x = std::move(st.x);
  double f = st.f;
  Vector g = std::move(st.g);
  for (int t = 0;; ++t) {
    trace.records.push_back(make_record(t, x, f, g, trace.f_star, config.record_vectors));
    if (config.record_matrices && t % config.snapshot_stride == 0)
      trace.snapshots.push_back({t, shadow ? shadow->matrix() : state.approximation()});
    if (should_stop(trace, config, problem)) break;
    try {
      const Vector d = state.direction(g);
      LineSearchResult ls = log_bisection(problem, x, f, g, d, config.wolfe);
      const Vector s = ls.x - x;
      const Vector y = ls.g - g;
      IterRecord& r = trace.records.back();
      r.eta = ls.eta;
      r.loops = ls.loops;
      r.evals = ls.evals;
      r.unit_step = ls.unit_step_accepted;
      fill_step(r, g, d, s, y, config.record_vectors);
      state.update(s, y);
      if (shadow) shadow->update(s, y);
      x = std::move(ls.x);
      f = ls.f;
      g = std::move(ls.g);
    } catch (const Error& e) {
      abort_run(std::move(trace), e);
    }
  }
  return trace;
}

RunTrace run_gd(const Problem& problem, const SolverConfig& config) {
  config.validate();
  RunTrace trace;
  trace.config = config;
  trace.config.method = Method::gd;
  trace.config.record_matrices = false;
  trace.f_star = problem.f_star();
  Start st = start_point(problem, config);
  Vector x = std::move(st.x);
  double f = st.f;
  Vector g = std::move(st.g);
  for (int t = 0;; ++t) {
    trace.records.push_back(make_record(t, x, f, g, trace.f_star, config.record_vectors));
    if (should_stop(trace, config, problem)) break;
    try {
      const Vector d = -g;
      BacktrackResult bt = backtracking(problem, x, f, g, d, config.wolfe.alpha, config.gd_shrink);
      Vector gn = problem.gradient(bt.x);
      const Vector s = bt.x - x;
      const Vector y = gn - g;
      IterRecord& r = trace.records.back();
      r.eta = bt.eta;
      r.loops = bt.trials;
      r.evals = bt.trials + 1;
      r.unit_step = bt.trials == 1;
      fill_step(r, g, d, s, y, config.record_vectors);
      x = std::move(bt.x);
      f = bt.f;
      g = std::move(gn);
    } catch (const Error& e) {
      abort_run(std::move(trace), e);
    }
  }
  return trace;
}

RunTrace run(const Problem& problem, const SolverConfig& config) {
  return config.method == Method::bfgs ? run_bfgs(problem, config) : run_gd(problem, config);
}

}  // namespace qnlab
