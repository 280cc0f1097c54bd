#pragma once

#include <limits>
#include <string>
#include <vector>

#include "qnlab/trace_io.hpp"

namespace qnlab {

enum class CheckState { pass, fail, not_applicable, not_evaluated };

const char* check_state_name(CheckState s);

struct CheckResult {
  std::string name;
  CheckState state = CheckState::not_evaluated;
  int evaluated = 0;  // iterations the check was applied to
  int vacuous = 0;    // iterations whose envelope exceeded 1
  int t_first = -1;
  int t_last = -1;
  // Worst slack (bound + tolerance - observed); negative means violated.
  double margin = std::numeric_limits<double>::infinity();
  int violations = 0;
  int first_fail_t = -1;
  std::string note;

  bool operator==(const CheckResult&) const = default;
};

struct BoundReport {
  std::vector<CheckResult> checks;

  bool all_pass() const;
  const CheckResult* first_failure() const;
  const CheckResult* find(const std::string& name) const;
  bool operator==(const BoundReport&) const = default;
};

// Checks computable from the CSV columns and the run context alone.
BoundReport verify_table(const TraceTable& table);

// verify_table plus the checks that need iterates, vectors or B_t snapshots.
BoundReport verify_run(const RunTrace& trace, const Problem& problem,
                       const std::vector<DiagnosticsRow>& diag, const TraceTable& table);

// Human-readable section followed by `check=name pass=bool margin=float` lines.
std::string format_report(const BoundReport& report, const RunContext& ctx);

// First t starting `run` consecutive unit steps, or -1.
int superlinear_onset(const std::vector<TraceRow>& rows, int run = 10);
// First t with f_gap_ratio <= level, or -1.
int iterations_to_ratio(const std::vector<TraceRow>& rows, double level);

}  // namespace qnlab
