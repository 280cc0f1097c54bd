#include "qnlab/linesearch.hpp"

#include <cmath>
#include <limits>

namespace qnlab {

namespace {

constexpr double kEtaFloor = 1e-16;
constexpr double kEtaCeil = 1e16;

void require_descent(double gd0) {
  if (!(gd0 < 0.0)) throw NonDescentError("direction is not a descent direction");
}

}  // namespace

void WolfeParams::validate() const {
  if (!(alpha > 0.0 && alpha < 0.5)) throw ConfigError("line search needs 0 < alpha < 1/2");
  if (!(beta > alpha && beta < 1.0)) throw ConfigError("line search needs alpha < beta < 1");
  if (max_loops < 1) throw ConfigError("max_loops must be positive");
}

bool armijo_holds(double f0, double gd0, double f_eta, double eta, double alpha) {
  require_descent(gd0);
  return f_eta - f0 <= alpha * eta * gd0;
}

bool curvature_holds(double gd_eta, double gd0, double beta) {
  require_descent(gd0);
  return gd_eta >= beta * gd0;
}

bool strong_wolfe_holds(double f0, double gd0, double f_eta, double gd_eta, double eta,
                        double alpha, double beta) {
  WolfeParams{alpha, beta}.validate();
  return armijo_holds(f0, gd0, f_eta, eta, alpha) && std::abs(gd_eta) <= beta * std::abs(gd0);
}

bool armijo_goldstein_holds(double f0, double gd0, double f_eta, double eta, double c1,
                            double c2) {
  if (!(c1 > 0.0 && c1 <= c2 && c2 < 1.0)) throw ConfigError("Goldstein needs 0 < c1 <= c2 < 1");
  require_descent(gd0);
  const double dec = f0 - f_eta;
  return -c1 * eta * gd0 <= dec && dec <= -c2 * eta * gd0;
}

LineSearchResult log_bisection(const Problem& problem, const Vector& x, const Vector& d,
                               const WolfeParams& params) {
  return log_bisection(problem, x, problem.value(x), problem.gradient(x), d, params);
}

LineSearchResult log_bisection(const Problem& problem, const Vector& x, double f0,
                               const Vector& g0, const Vector& d, const WolfeParams& params) {
  params.validate();
  const double gd0 = g0.dot(d);
  require_descent(gd0);

  constexpr double inf = std::numeric_limits<double>::infinity();
  LineSearchResult r;
  double eta = 1.0;
  double lo = 0.0;
  double hi = inf;
  for (int i = 0; i < params.max_loops; ++i) {
    LineSearchTrial trial;
    trial.eta = eta;
    trial.eta_min = lo;
    trial.eta_max = hi;
    trial.gd = std::numeric_limits<double>::quiet_NaN();
    Vector xt = x + eta * d;
    trial.f = problem.value(xt);
    ++r.evals;
    ++r.loops;
    trial.armijo = armijo_holds(f0, gd0, trial.f, eta, params.alpha);
    Vector gt;
    if (trial.armijo) {
      gt = problem.gradient(xt);
      ++r.evals;
      trial.gd = gt.dot(d);
      trial.curvature = curvature_holds(trial.gd, gd0, params.beta);
    }
    r.history.push_back(trial);

    const double grow = std::exp2(std::exp2(i + 1) - 1.0);
    if (!trial.armijo) {
      hi = eta;
      eta = lo == 0.0 ? 1.0 / grow : std::sqrt(lo * hi);
    } else if (!trial.curvature) {
      lo = eta;
      eta = hi == inf ? grow : std::sqrt(lo * hi);
    } else {
      r.eta = eta;
      r.unit_step_accepted = r.loops == 1;
      r.eta_min = lo;
      r.eta_max = hi;
      r.x = std::move(xt);
      r.f = trial.f;
      r.g = std::move(gt);
      return r;
    }
    if (!(eta >= kEtaFloor && eta <= kEtaCeil))
      throw BracketingError("line search trial step left [1e-16, 1e16]", std::move(r.history));
  }
  throw BracketingError("line search exceeded its loop budget", std::move(r.history));
}

BacktrackResult backtracking(const Problem& problem, const Vector& x, const Vector& d,
                             double alpha, double shrink) {
  return backtracking(problem, x, problem.value(x), problem.gradient(x), d, alpha, shrink);
}

BacktrackResult backtracking(const Problem& problem, const Vector& x, double f0,
                             const Vector& g0, const Vector& d, double alpha, double shrink) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("backtracking needs 0 < alpha < 1");
  if (!(shrink > 0.0 && shrink < 1.0)) throw ConfigError("backtracking needs 0 < shrink < 1");
  const double gd0 = g0.dot(d);
  require_descent(gd0);
  std::vector<LineSearchTrial> history;
  double eta = 1.0;
  for (int k = 0; k <= 100; ++k, eta *= shrink) {
    Vector xt = x + eta * d;
    const double ft = problem.value(xt);
    LineSearchTrial trial;
    trial.eta = eta;
    trial.f = ft;
    trial.gd = std::numeric_limits<double>::quiet_NaN();
    trial.armijo = armijo_holds(f0, gd0, ft, eta, alpha);
    history.push_back(trial);
    if (trial.armijo) return {eta, k + 1, std::move(xt), ft};
  }
  throw BracketingError("backtracking exceeded 100 reductions", std::move(history));
}

}  // namespace qnlab
