#pragma once

#include <iosfwd>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "qnlab/analysis.hpp"

namespace qnlab {

// Column order of the trace CSV.
extern const char* const kTraceColumns[17];

struct TraceRow {
  static constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  int t = 0;
  double f = nan, f_gap_ratio = nan, grad_norm = nan, eta = nan;
  int lambda_t = -1, evals = -1, unit_step = -1;  // -1 when absent
  double p_hat = nan, q_hat = nan, m_hat = nan, n_hat = nan, cos_theta = nan;
  double C_t = nan, rho_t = nan, psi_Bbar = nan, psi_Btilde = nan;
};

// Constants a trace needs for verification; serialized as the config sidecar.
struct RunContext {
  std::string runid;
  std::string problem_kind;
  int d = 0;
  double mu = 0.0, L = 0.0, M = 0.0, kappa = 0.0;
  double f_star = 0.0;
  Method method = Method::bfgs;
  InitKind init = InitKind::L_identity;
  double alpha = 0.1, beta = 0.9;
  std::string status;
  std::map<std::string, std::string> extra;  // remaining echoed config keys
};

struct TraceTable {
  RunContext ctx;
  std::vector<TraceRow> rows;
};

TraceTable make_table(const RunTrace& trace, const std::vector<DiagnosticsRow>& diag,
                      const Problem& problem, const std::string& runid);

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& rows);
// Throws InputError on malformed content.
std::vector<TraceRow> read_trace_csv(std::istream& in);

void write_context(std::ostream& out, const RunContext& ctx);
RunContext read_context(std::istream& in);

void save_table(const TraceTable& table, const std::string& csv_path, const std::string& ctx_path);
TraceTable load_table(const std::string& csv_path, const std::string& ctx_path);

// 17 significant digits, empty for NaN.
std::string format_double(double v);

}  // namespace qnlab
