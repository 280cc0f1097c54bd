#include "qnlab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <fmt/format.h>

namespace qnlab {

const char* check_state_name(CheckState s) {
  switch (s) {
    case CheckState::pass: return "pass";
    case CheckState::fail: return "FAIL";
    case CheckState::not_applicable: return "n/a";
    case CheckState::not_evaluated: return "not evaluated";
  }
  return "?";
}

bool BoundReport::all_pass() const { return first_failure() == nullptr; }

const CheckResult* BoundReport::first_failure() const {
  for (const auto& c : checks)
    if (c.state == CheckState::fail) return &c;
  return nullptr;
}

const CheckResult* BoundReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

namespace {

constexpr double kRatioTol = 1e-9;
constexpr double kRatioFloor = 1e-14;

class Check {
 public:
  explicit Check(std::string name) { r_.name = std::move(name); }

  void observe(int t, double slack) {
    ++r_.evaluated;
    if (r_.t_first < 0) r_.t_first = t;
    r_.t_last = t;
    r_.margin = std::min(r_.margin, slack);
    if (!(slack >= 0.0)) {
      if (r_.violations++ == 0) r_.first_fail_t = t;
    }
  }
  void vacuous() { ++r_.vacuous; }
  void note(std::string n) { r_.note = std::move(n); }

  CheckResult finish() {
    r_.state = r_.violations > 0 ? CheckState::fail : CheckState::pass;
    return r_;
  }

 private:
  CheckResult r_;
};

CheckResult marker(const std::string& name, CheckState state, std::string note) {
  CheckResult r;
  r.name = name;
  r.state = state;
  r.note = std::move(note);
  return r;
}

bool has(double v) { return !std::isnan(v); }

// Names in report order; in-memory checks carry a placeholder from verify_table.
const char* const kTrajectoryOnly[] = {"one_step_identity_L", "q_bound_L",
                                       "y_ratio_L",           "y_ratio_hstar",
                                       "potential_recursion_L", "potential_recursion_hstar",
                                       "hessian_sandwich"};

}  // namespace

BoundReport verify_table(const TraceTable& table) {
  const RunContext& c = table.ctx;
  const auto& rows = table.rows;
  const bool bfgs = c.method == Method::bfgs;
  const int n = static_cast<int>(rows.size());
  const double a = c.alpha, b = c.beta;
  BoundReport rep;
  auto qn_only = [&](const std::string& name) {
    rep.checks.push_back(marker(name, CheckState::not_applicable, "quasi-Newton check on a gradient descent trace"));
  };

  {
    Check ch("monotone");
    for (int t = 0; t + 1 < n; ++t) ch.observe(t, rows[t].f - rows[t + 1].f);
    rep.checks.push_back(ch.finish());
  }
  {
    Check ch("armijo_ratio");
    for (int t = 0; t + 1 < n; ++t)
      if (has(rows[t].p_hat)) ch.observe(t, rows[t].p_hat - (a - 1e-12));
    rep.checks.push_back(ch.finish());
  }
  if (bfgs) {
    Check ch("curvature_ratio");
    for (int t = 0; t + 1 < n; ++t)
      if (has(rows[t].n_hat)) ch.observe(t, rows[t].n_hat - ((1.0 - b) - 1e-12));
    rep.checks.push_back(ch.finish());
  } else {
    qn_only("curvature_ratio");
  }
  {
    Check ch("one_step_identity_hstar");
    for (int t = 0; t + 1 < n; ++t) {
      const TraceRow& r = rows[t];
      if (!has(r.p_hat) || !has(r.q_hat) || !has(r.m_hat) || !has(r.n_hat) || !has(r.cos_theta)) continue;
      if (!has(r.f_gap_ratio) || !has(rows[t + 1].f_gap_ratio) || r.f_gap_ratio < kRatioFloor) continue;
      const double factor = r.p_hat * r.q_hat * r.n_hat * r.cos_theta * r.cos_theta / r.m_hat;
      const double res = std::abs(rows[t + 1].f_gap_ratio - (1.0 - factor) * r.f_gap_ratio) / r.f_gap_ratio;
      ch.observe(t, 1e-8 - res);
    }
    rep.checks.push_back(ch.finish());
  }
  {
    Check ch("q_bound_hstar");
    for (int t = 0; t + 1 < n; ++t)
      if (has(rows[t].q_hat) && has(rows[t].C_t))
        ch.observe(t, rows[t].q_hat - (2.0 / ((1.0 + rows[t].C_t) * (1.0 + rows[t].C_t)) - 1e-8));
    rep.checks.push_back(ch.finish());
  }
  for (const char* name : kTrajectoryOnly)
    rep.checks.push_back(marker(name, CheckState::not_evaluated, "needs the in-memory trajectory"));

  if (!bfgs) {
    for (const char* name : {"evals_accounting", "unit_step_lemma2", "unit_step_lemma3", "omega_sum",
                             "thm1", "prop_second_linear", "thm2", "thm3", "ct_threshold",
                             "bad_rho_count", "loop_bound", "avg_loop_bound"})
      qn_only(name);
    return rep;
  }

  const DeltaConstants dc = delta_constants(a, b);
  const double psi_bar0 = n > 0 ? rows[0].psi_Bbar : TraceRow::nan;
  const double psi_tilde0 = n > 0 ? rows[0].psi_Btilde : TraceRow::nan;
  const double c0 = n > 0 ? rows[0].C_t : TraceRow::nan;
  const bool have_consts = has(psi_bar0) && has(psi_tilde0) && has(c0);

  {
    Check ch("evals_accounting");
    for (int t = 0; t < n; ++t)
      if (rows[t].lambda_t >= 0)
        ch.observe(t, std::min(2 * rows[t].lambda_t - rows[t].evals, rows[t].evals - rows[t].lambda_t));
    rep.checks.push_back(ch.finish());
  }
  {
    Check ch("unit_step_lemma2");
    for (int t = 0; t + 1 < n; ++t) {
      const TraceRow& r = rows[t];
      if (!(r.eta == 1.0) || !has(r.p_hat) || !has(r.n_hat) || !has(r.C_t) || !has(r.rho_t)) continue;
      const double sp = r.p_hat - (1.0 - (1.0 + r.C_t) / (2.0 * r.rho_t)) + 1e-8;
      const double sn = r.n_hat - 1.0 / ((1.0 + r.C_t) * r.rho_t) + 1e-8;
      ch.observe(t, std::min(sp, sn));
    }
    rep.checks.push_back(ch.finish());
  }
  {
    Check ch("unit_step_lemma3");
    for (int t = 0; t + 1 < n; ++t) {
      const TraceRow& r = rows[t];
      if (r.lambda_t < 0 || !has(r.C_t) || !has(r.rho_t)) continue;
      if (r.C_t <= dc.d1 && r.rho_t >= dc.d2 && r.rho_t <= dc.d3) ch.observe(t, r.unit_step == 1 ? 0.0 : -1.0);
    }
    rep.checks.push_back(ch.finish());
  }
  if (has(psi_tilde0)) {
    Check ch("omega_sum");
    double lhs = 0.0, csum = 0.0;
    for (int t = 0; t + 1 < n; ++t) {
      if (!has(rows[t].rho_t) || !has(rows[t].C_t)) break;
      lhs += omega(rows[t].rho_t - 1.0);
      csum += rows[t].C_t;
      ch.observe(t + 1, psi_tilde0 + 2.0 * csum + 1e-8 - lhs);
    }
    rep.checks.push_back(ch.finish());
  } else {
    rep.checks.push_back(marker("omega_sum", CheckState::not_evaluated, "initial potential missing"));
  }

  const bool have_ratio = n > 0 && has(rows[0].f_gap_ratio);
  auto envelope = [&](const std::string& name, auto bound_at, double t_min, std::string note) {
    if (!have_ratio || !have_consts) {
      rep.checks.push_back(marker(name, CheckState::not_evaluated, "initial gap or constants missing"));
      return;
    }
    Check ch(name);
    ch.note(std::move(note));
    for (int t = 1; t < n; ++t) {
      if (t < t_min) continue;
      const double bound = bound_at(t);
      if (bound > 1.0) {
        ch.vacuous();
        continue;
      }
      ch.observe(t, bound + kRatioTol - rows[t].f_gap_ratio);
    }
    rep.checks.push_back(ch.finish());
  };

  envelope("thm1", [&](int t) { return bound_thm1(t, psi_bar0, c.kappa, a, b); }, 1, "");
  {
    std::vector<double> csum(n + 1, 0.0);
    for (int t = 0; t < n; ++t) csum[t + 1] = csum[t] + (has(rows[t].C_t) ? rows[t].C_t : 0.0);
    envelope("prop_second_linear",
             [&](int t) { return bound_prop_second_linear(t, psi_tilde0, csum[t], a, b); }, 1, "");
  }
  if (have_consts) {
    const double th = thm2_threshold(psi_tilde0, psi_bar0, c0, c.kappa, a, b);
    envelope("thm2", [&](int t) { return bound_thm2(t, a, b); }, th, fmt::format("threshold t >= {:.6g}", th));
    const SuperlinearConstants sc = thm3_constants(psi_tilde0, psi_bar0, c0, c.kappa, a, b);
    envelope("thm3", [&](int t) { return bound_thm3(t, sc.K); }, 1,
             fmt::format("K = {:.6g}, t0 = {:.6g}", sc.K, sc.t0));
    Check ct("ct_threshold");
    ct.note(fmt::format("t0 = {:.6g}, delta1 = {:.6g}", sc.t0, dc.d1));
    for (int t = 0; t < n; ++t)
      if (t >= sc.t0 && has(rows[t].C_t)) ct.observe(t, dc.d1 - rows[t].C_t);
    rep.checks.push_back(ct.finish());

    const double cap = bad_rho_bound(psi_tilde0, psi_bar0, c0, c.kappa, a, b);
    Check br("bad_rho_count");
    int bad = 0, last = -1;
    for (int t = 0; t < n; ++t)
      if (has(rows[t].rho_t)) {
        last = t;
        if (rows[t].rho_t < dc.d2 || rows[t].rho_t > dc.d3) ++bad;
      }
    if (last >= 0) br.observe(last, cap - bad);
    br.note(fmt::format("{} of the recorded steps outside [delta2, delta3], cap {:.6g}", bad, cap));
    rep.checks.push_back(br.finish());
  } else {
    for (const char* name : {"thm2", "thm3", "ct_threshold", "bad_rho_count"})
      rep.checks.push_back(marker(name, CheckState::not_evaluated, "initial constants missing"));
  }
  {
    Check ch("loop_bound");
    for (int t = 0; t < n; ++t) {
      const TraceRow& r = rows[t];
      if (r.lambda_t < 0 || !has(r.C_t) || !has(r.rho_t)) continue;
      ch.observe(t, bound_loops(r.C_t, r.rho_t, a, b) + 1.0 - r.lambda_t);
    }
    rep.checks.push_back(ch.finish());
  }
  if (have_consts) {
    Check ch("avg_loop_bound");
    const double sigma = lambda_sigma(psi_bar0, c.kappa, c0, a, b);
    ch.note(fmt::format("sigma = {:.6g}", sigma));
    double total = 0.0;
    for (int t = 1; t < n; ++t) {
      if (rows[t - 1].lambda_t < 0) break;
      total += rows[t - 1].lambda_t;
      ch.observe(t, bound_linesearch_lambda(t, sigma, psi_tilde0, a, b) + 0.5 - total / t);
    }
    rep.checks.push_back(ch.finish());
  } else {
    rep.checks.push_back(marker("avg_loop_bound", CheckState::not_evaluated, "initial constants missing"));
  }
  return rep;
}

BoundReport verify_run(const RunTrace& trace, const Problem& problem,
                       const std::vector<DiagnosticsRow>& diag, const TraceTable& table) {
  BoundReport rep = verify_table(table);
  const bool bfgs = trace.config.method == Method::bfgs;
  const auto& recs = trace.records;
  const int n = static_cast<int>(recs.size());
  const bool vectors = n > 0 && recs[0].g.size() > 0;
  const WeightScheme wl = WeightScheme::scaled_identity(problem.L());
  const WeightScheme ws = WeightScheme::hessian_at_star(problem);

  auto replace = [&rep](CheckResult r) {
    for (auto& c : rep.checks)
      if (c.name == r.name) c = std::move(r);
  };
  if (!vectors) {
    for (const char* name : kTrajectoryOnly)
      replace(marker(name, CheckState::not_evaluated, "iterate vectors were not recorded"));
    return rep;
  }

  std::vector<std::optional<WeightedQuantities>> ql(n), qs(n);
  for (int t = 0; t + 1 < n; ++t) {
    ql[t] = weighted_quantities(recs[t], recs[t + 1].f, wl, trace.f_star);
    qs[t] = weighted_quantities(recs[t], recs[t + 1].f, ws, trace.f_star);
  }
  const double gap0 = trace.gap0();
  {
    Check ch("one_step_identity_L");
    for (int t = 0; t + 1 < n; ++t) {
      if (!ql[t] || !(gap0 > 0.0) || recs[t].f_gap < kRatioFloor * gap0) continue;
      const double gt = recs[t].f_gap, gn = recs[t + 1].f_gap;
      ch.observe(t, 1e-8 - std::abs(gn - (1.0 - ql[t]->factor) * gt) / gt);
    }
    replace(ch.finish());
  }
  {
    Check ch("q_bound_L");
    for (int t = 0; t + 1 < n; ++t)
      if (ql[t]) ch.observe(t, ql[t]->q_hat - (2.0 / problem.kappa() - 1e-10));
    replace(ch.finish());
  }
  {
    Check ch("y_ratio_L");
    for (int t = 0; t + 1 < n; ++t)
      if (ql[t]) ch.observe(t, 1.0 + 1e-10 - ql[t]->y_ratio);
    replace(ch.finish());
  }
  {
    Check ch("y_ratio_hstar");
    for (int t = 0; t + 1 < n; ++t)
      if (qs[t]) ch.observe(t, 1.0 + diag[t].C_t + 1e-8 - qs[t]->y_ratio);
    replace(ch.finish());
  }
  if (!bfgs) {
    for (const char* name : {"potential_recursion_L", "potential_recursion_hstar"})
      replace(marker(name, CheckState::not_applicable, "quasi-Newton check on a gradient descent trace"));
  } else if (trace.snapshots.size() < 2) {
    for (const char* name : {"potential_recursion_L", "potential_recursion_hstar"})
      replace(marker(name, CheckState::not_evaluated, "needs B_t snapshots at consecutive iterations"));
  } else {
    Check cl("potential_recursion_L"), cs("potential_recursion_hstar");
    for (int t = 0; t + 1 < n; ++t) {
      const Matrix* b0 = trace.snapshot_at(t);
      const Matrix* b1 = trace.snapshot_at(t + 1);
      if (!b0 || !b1) continue;
      auto step = [&](Check& ch, const WeightScheme& w, const std::optional<WeightedQuantities>& q) {
        if (!q) return;
        const double p0 = w.psi_of(*b0), p1 = w.psi_of(*b1);
        const double rhs = p0 + q->y_ratio - 1.0 + std::log(q->cos_theta * q->cos_theta / q->m_hat);
        ch.observe(t, rhs + 1e-8 - p1);
      };
      step(cl, wl, ql[t]);
      step(cs, ws, qs[t]);
    }
    replace(cl.finish());
    replace(cs.finish());
  }
  {
    Check ch("hessian_sandwich");
    const int stride = problem.dim() <= 100 ? 1 : std::max(1, (n + 49) / 50);
    for (int t = 0; t < n; t += stride) {
      double m = 0.0;
      hessian_sandwich_check(problem, recs[t].x, diag[t].C_t, &m);
      ch.observe(t, m);
    }
    if (stride > 1) ch.note(fmt::format("every {}th iterate", stride));
    replace(ch.finish());
  }
  return rep;
}

std::string format_report(const BoundReport& report, const RunContext& c) {
  std::ostringstream out;
  out << fmt::format("run {}: {} d={} kappa={:.6g} mu={:.6g} L={:.6g} M={:.6g}\n", c.runid, c.problem_kind,
                     c.d, c.kappa, c.mu, c.L, c.M);
  out << fmt::format("method={} init={} alpha={:.6g} beta={:.6g} status={}\n\n", method_name(c.method),
                     init_name(c.init), c.alpha, c.beta, c.status);
  out << fmt::format("{:<26} {:<14} {:>6} {:>7} {:>12} {:>6} {:>14}  {}\n", "check", "state", "rows",
                     "vacuous", "t-range", "fails", "margin", "note");
  for (const auto& ch : report.checks) {
    const std::string range = ch.t_first < 0 ? "-" : fmt::format("{}..{}", ch.t_first, ch.t_last);
    std::string note = ch.note;
    if (ch.state == CheckState::fail) note = fmt::format("first failure at t={}; ", ch.first_fail_t) + note;
    out << fmt::format("{:<26} {:<14} {:>6} {:>7} {:>12} {:>6} {:>14.6g}  {}\n", ch.name,
                       check_state_name(ch.state), ch.evaluated, ch.vacuous, range, ch.violations,
                       ch.margin, note);
  }
  out << "\n# machine-readable\n";
  for (const auto& ch : report.checks) {
    if (ch.state != CheckState::pass && ch.state != CheckState::fail) continue;
    out << fmt::format("check={} pass={} margin={}\n", ch.name, ch.state == CheckState::pass ? "true" : "false",
                       std::isinf(ch.margin) ? std::string("inf") : format_double(ch.margin));
  }
  return out.str();
}

int superlinear_onset(const std::vector<TraceRow>& rows, int run) {
  int streak = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    streak = rows[i].unit_step == 1 ? streak + 1 : 0;
    if (streak == run) return rows[i].t - run + 1;
  }
  return -1;
}

int iterations_to_ratio(const std::vector<TraceRow>& rows, double level) {
  for (const auto& r : rows)
    if (!std::isnan(r.f_gap_ratio) && r.f_gap_ratio <= level) return r.t;
  return -1;
}

}  // namespace qnlab
