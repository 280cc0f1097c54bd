#include "qnlab/trace_io.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

namespace qnlab {

const char* const kTraceColumns[17] = {"t",       "f",     "f_gap_ratio", "grad_norm", "eta",
                                       "lambda_t", "evals", "unit_step",   "p_hat",     "q_hat",
                                       "m_hat",   "n_hat", "cos_theta",   "C_t",       "rho_t",
                                       "psi_Bbar", "psi_Btilde"};

std::string format_double(double v) {
  if (std::isnan(v)) return "";
  return fmt::format("{:.17g}", v);
}

TraceTable make_table(const RunTrace& trace, const std::vector<DiagnosticsRow>& diag,
                      const Problem& problem, const std::string& runid) {
  if (diag.size() != trace.records.size()) throw InputError("diagnostics do not match trace");
  TraceTable tab;
  RunContext& c = tab.ctx;
  c.runid = runid;
  c.problem_kind = problem.kind() == ProblemKind::cubic_chain ? "cubic" : "quadratic";
  c.d = problem.dim();
  c.mu = problem.mu();
  c.L = problem.L();
  c.M = problem.M();
  c.kappa = problem.kappa();
  c.f_star = trace.f_star;
  c.method = trace.config.method;
  c.init = trace.config.init.kind;
  c.alpha = trace.config.wolfe.alpha;
  c.beta = trace.config.wolfe.beta;
  c.status = status_name(trace.status);
  const double gap0 = trace.gap0();
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    const IterRecord& r = trace.records[i];
    const DiagnosticsRow& g = diag[i];
    TraceRow row;
    row.t = r.t;
    row.f = r.f;
    if (gap0 > 0.0) row.f_gap_ratio = r.f_gap / gap0;
    row.grad_norm = r.grad_norm;
    if (r.has_step) {
      row.eta = r.eta;
      row.lambda_t = r.loops;
      row.evals = r.evals;
      row.unit_step = r.unit_step ? 1 : 0;
    }
    row.p_hat = g.p_hat;
    row.q_hat = g.q_hat;
    row.m_hat = g.m_hat;
    row.n_hat = g.n_hat;
    row.cos_theta = g.cos_theta;
    row.C_t = g.C_t;
    row.rho_t = g.rho_t;
    row.psi_Bbar = g.psi_Bbar;
    row.psi_Btilde = g.psi_Btilde;
    tab.rows.push_back(row);
  }
  return tab;
}

namespace {

std::string fmt_int(int v) { return v < 0 ? std::string() : std::to_string(v); }

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, int line) {
  if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw InputError(fmt::format("line {}: '{}' is not a number", line, s));
  }
  if (pos != s.size()) throw InputError(fmt::format("line {}: '{}' is not a number", line, s));
  return v;
}

int parse_int(const std::string& s, int line, bool allow_empty) {
  if (s.empty()) {
    if (allow_empty) return -1;
    throw InputError(fmt::format("line {}: missing integer", line));
  }
  std::size_t pos = 0;
  long v = 0;
  try {
    v = std::stol(s, &pos);
  } catch (const std::exception&) {
    throw InputError(fmt::format("line {}: '{}' is not an integer", line, s));
  }
  if (pos != s.size() || v < 0) throw InputError(fmt::format("line {}: '{}' is not an integer", line, s));
  return static_cast<int>(v);
}

}  // namespace

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& rows) {
  for (int i = 0; i < 17; ++i) out << (i ? "," : "") << kTraceColumns[i];
  out << '\n';
  for (const TraceRow& r : rows) {
    out << r.t << ',' << format_double(r.f) << ',' << format_double(r.f_gap_ratio) << ','
        << format_double(r.grad_norm) << ',' << format_double(r.eta) << ',' << fmt_int(r.lambda_t)
        << ',' << fmt_int(r.evals) << ',' << fmt_int(r.unit_step) << ',' << format_double(r.p_hat)
        << ',' << format_double(r.q_hat) << ',' << format_double(r.m_hat) << ','
        << format_double(r.n_hat) << ',' << format_double(r.cos_theta) << ','
        << format_double(r.C_t) << ',' << format_double(r.rho_t) << ','
        << format_double(r.psi_Bbar) << ',' << format_double(r.psi_Btilde) << '\n';
  }
}

std::vector<TraceRow> read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("empty trace file");
  const auto header = split(line, ',');
  if (header.size() != 17) throw InputError("trace header has wrong column count");
  for (int i = 0; i < 17; ++i)
    if (header[i] != kTraceColumns[i]) throw InputError("unexpected trace column '" + header[i] + "'");
  std::vector<TraceRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto f = split(line, ',');
    if (f.size() != 17) throw InputError(fmt::format("line {}: expected 17 fields", lineno));
    TraceRow r;
    r.t = parse_int(f[0], lineno, false);
    r.f = parse_double(f[1], lineno);
    if (std::isnan(r.f)) throw InputError(fmt::format("line {}: missing f", lineno));
    r.f_gap_ratio = parse_double(f[2], lineno);
    r.grad_norm = parse_double(f[3], lineno);
    r.eta = parse_double(f[4], lineno);
    r.lambda_t = parse_int(f[5], lineno, true);
    r.evals = parse_int(f[6], lineno, true);
    r.unit_step = parse_int(f[7], lineno, true);
    if (r.unit_step > 1) throw InputError(fmt::format("line {}: unit_step must be 0 or 1", lineno));
    r.p_hat = parse_double(f[8], lineno);
    r.q_hat = parse_double(f[9], lineno);
    r.m_hat = parse_double(f[10], lineno);
    r.n_hat = parse_double(f[11], lineno);
    r.cos_theta = parse_double(f[12], lineno);
    r.C_t = parse_double(f[13], lineno);
    r.rho_t = parse_double(f[14], lineno);
    r.psi_Bbar = parse_double(f[15], lineno);
    r.psi_Btilde = parse_double(f[16], lineno);
    if (!rows.empty() && r.t != rows.back().t + 1)
      throw InputError(fmt::format("line {}: iteration index is not consecutive", lineno));
    rows.push_back(r);
  }
  if (rows.empty()) throw InputError("trace has no rows");
  if (rows.front().t != 0) throw InputError("trace must start at t = 0");
  return rows;
}

void write_context(std::ostream& out, const RunContext& c) {
  out << "runid = " << c.runid << '\n'
      << "problem.kind = " << c.problem_kind << '\n'
      << "problem.d = " << c.d << '\n'
      << "problem.mu = " << format_double(c.mu) << '\n'
      << "problem.L = " << format_double(c.L) << '\n'
      << "problem.M = " << format_double(c.M) << '\n'
      << "problem.kappa = " << format_double(c.kappa) << '\n'
      << "problem.f_star = " << format_double(c.f_star) << '\n'
      << "solver.method = " << method_name(c.method) << '\n'
      << "solver.init = " << init_name(c.init) << '\n'
      << "solver.alpha = " << format_double(c.alpha) << '\n'
      << "solver.beta = " << format_double(c.beta) << '\n'
      << "run.status = " << c.status << '\n';
  for (const auto& [k, v] : c.extra) out << k << " = " << v << '\n';
}

RunContext read_context(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    if (trim(line).empty()) continue;
    if (eq == std::string::npos) throw InputError(fmt::format("context line {}: expected key = value", lineno));
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  auto take = [&kv](const std::string& k) {
    auto it = kv.find(k);
    if (it == kv.end()) throw InputError("context is missing '" + k + "'");
    std::string v = it->second;
    kv.erase(it);
    return v;
  };
  auto num = [&take](const std::string& k) {
    const std::string s = take(k);
    const double v = parse_double(s, 0);
    if (std::isnan(v)) throw InputError("context value '" + k + "' is empty");
    return v;
  };
  RunContext c;
  try {
    c.runid = take("runid");
    c.problem_kind = take("problem.kind");
    c.d = parse_int(take("problem.d"), 0, false);
    c.mu = num("problem.mu");
    c.L = num("problem.L");
    c.M = num("problem.M");
    c.kappa = num("problem.kappa");
    c.f_star = num("problem.f_star");
    c.method = parse_method(take("solver.method"));
    c.init = parse_init(take("solver.init"));
    c.alpha = num("solver.alpha");
    c.beta = num("solver.beta");
    c.status = take("run.status");
  } catch (const ConfigError& e) {
    throw InputError(e.what());
  }
  c.extra = std::move(kv);
  return c;
}

void save_table(const TraceTable& table, const std::string& csv_path, const std::string& ctx_path) {
  std::ofstream csv(csv_path, std::ios::binary);
  if (!csv) throw InputError("cannot write " + csv_path);
  write_trace_csv(csv, table.rows);
  std::ofstream ctx(ctx_path, std::ios::binary);
  if (!ctx) throw InputError("cannot write " + ctx_path);
  write_context(ctx, table.ctx);
}

TraceTable load_table(const std::string& csv_path, const std::string& ctx_path) {
  std::ifstream csv(csv_path, std::ios::binary);
  if (!csv) throw InputError("cannot read " + csv_path);
  std::ifstream ctx(ctx_path, std::ios::binary);
  if (!ctx) throw InputError("cannot read " + ctx_path);
  TraceTable t;
  t.rows = read_trace_csv(csv);
  t.ctx = read_context(ctx);
  return t;
}

}  // namespace qnlab
