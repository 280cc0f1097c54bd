#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qnlab/bfgs.hpp"
#include "qnlab/linesearch.hpp"

namespace qnlab {

enum class Method { bfgs, gd };
enum class RunStatus { converged_grad, converged_gap, max_iters, aborted };

const char* method_name(Method m);
Method parse_method(const std::string& name);
const char* status_name(RunStatus s);

struct SolverConfig {
  Method method = Method::bfgs;
  InitScheme init;
  MatrixForm form = MatrixForm::inverse;
  WolfeParams wolfe;
  int max_iters = 1000;
  double stop_grad_tol = 1e-12;  // floored at the problem's reference tolerance
  double stop_gap_tol = 1e-12;  // on (f_t - f*) / (f_0 - f*)
  std::uint64_t seed = 0;
  bool record_matrices = false;  // snapshot B_t every snapshot_stride iterations
  int snapshot_stride = 1;
  bool record_vectors = true;    // keep x_t, g_t, d_t, s_t, y_t on each record
  std::optional<Vector> x0;      // zero vector when unset
  double gd_shrink = 0.5;

  void validate() const;
};

// State at iterate t and, unless t is terminal, the step taken from it.
struct IterRecord {
  int t = 0;
  double f = 0.0;
  double grad_norm = 0.0;
  double f_gap = 0.0;
  bool has_step = false;
  double eta = 0.0;
  int loops = 0;
  int evals = 0;
  bool unit_step = false;
  double g_dot_d = 0.0;
  double g_dot_s = 0.0;
  double sy_dot = 0.0;
  Vector x, g, d, s, y;
};

struct MatrixSnapshot {
  int t = 0;
  Matrix B;
};

struct RunTrace {
  SolverConfig config;
  std::vector<IterRecord> records;
  RunStatus status = RunStatus::max_iters;
  std::vector<MatrixSnapshot> snapshots;
  Matrix B0;  // empty for gradient descent
  double f_star = 0.0;
  std::string error;  // set when aborted

  double gap0() const { return records.front().f_gap; }
  int iterations() const { return static_cast<int>(records.size()) - 1; }
  const Matrix* snapshot_at(int t) const;
};

// Solver failure with the trace recorded up to the failing iteration.
class RunAborted : public Error {
 public:
  RunAborted(const std::string& what, std::shared_ptr<RunTrace> partial)
      : Error(what), partial_(std::move(partial)) {}
  const RunTrace& partial() const { return *partial_; }

 private:
  std::shared_ptr<RunTrace> partial_;
};

// Unit vector drawn from the seeded generator used for cI probes.
Vector probe_direction(int d, std::uint64_t seed);

RunTrace run_bfgs(const Problem& problem, const SolverConfig& config);
RunTrace run_gd(const Problem& problem, const SolverConfig& config);
RunTrace run(const Problem& problem, const SolverConfig& config);

}  // namespace qnlab
