#pragma once

#include <vector>

#include "qnlab/errors.hpp"
#include "qnlab/objective.hpp"

namespace qnlab {

struct WolfeParams {
  double alpha = 0.1;
  double beta = 0.9;
  int max_loops = 100;

  // Throws ConfigError unless 0 < alpha < 1/2 and alpha < beta < 1.
  void validate() const;
};

// Sufficient decrease: f_eta <= f0 + alpha eta gd0. Ties hold.
bool armijo_holds(double f0, double gd0, double f_eta, double eta, double alpha);
// Curvature lower bound: gd_eta >= beta gd0.
bool curvature_holds(double gd_eta, double gd0, double beta);
// Armijo plus |gd_eta| <= beta |gd0|.
bool strong_wolfe_holds(double f0, double gd0, double f_eta, double gd_eta, double eta,
                        double alpha, double beta);
// -c1 eta gd0 <= f0 - f_eta <= -c2 eta gd0 with 0 < c1 <= c2 < 1.
bool armijo_goldstein_holds(double f0, double gd0, double f_eta, double eta, double c1,
                            double c2);

struct LineSearchResult {
  double eta = 0.0;
  int loops = 0;
  int evals = 0;
  bool unit_step_accepted = false;
  double eta_min = 0.0;  // final bracket
  double eta_max = 0.0;
  Vector x;  // accepted point x + eta d
  double f = 0.0;
  Vector g;
  std::vector<LineSearchTrial> history;
};

// Weak Wolfe search by doubling/halving on a doubly exponential schedule,
// then bisection in log space. f0 and g0 are the cached values at x.
LineSearchResult log_bisection(const Problem& problem, const Vector& x, double f0,
                               const Vector& g0, const Vector& d, const WolfeParams& params);
LineSearchResult log_bisection(const Problem& problem, const Vector& x, const Vector& d,
                               const WolfeParams& params);

struct BacktrackResult {
  double eta = 0.0;
  int trials = 0;
  Vector x;
  double f = 0.0;
};

// Largest eta in {shrink^k} passing the Armijo test, k <= 100.
BacktrackResult backtracking(const Problem& problem, const Vector& x, double f0,
                             const Vector& g0, const Vector& d, double alpha, double shrink = 0.5);
BacktrackResult backtracking(const Problem& problem, const Vector& x, const Vector& d,
                             double alpha, double shrink = 0.5);

}  // namespace qnlab
