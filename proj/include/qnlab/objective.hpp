#pragma once

#include <Eigen/Dense>
#include <memory>
#include <mutex>
#include <vector>

namespace qnlab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class ProblemKind { cubic_chain, quadratic };

struct CubicParams {
  double alpha_f = 1.0;
  double beta_f = 1.0;
  double lambda = 1.0;
  double delta = 1.0;
};

struct CubicG {
  double value;
  double d1;
  double d2;
};

// Piecewise cubic/quadratic chain link.
CubicG cubic_g(double w, double delta);

class Problem;

struct ReferenceSolution {
  Vector x;
  double f = 0.0;
  int newton_steps = 0;
};

// Damped Newton solve of grad f = 0 to ||grad f|| <= tol.
ReferenceSolution reference_solution(const Problem& problem, double tol);
ReferenceSolution reference_solution(const Problem& problem, double tol, const Vector& start);

// Smooth strongly convex test objective with exact derivatives and known
// curvature constants. Immutable once built; the minimizer is cached lazily.
class Problem {
 public:
  // Chain function with hyperparameters given directly.
  static Problem cubic(int d, const CubicParams& params);
  // f(x) = 1/2 sum_i eig_i x_i^2.
  static Problem quadratic(std::vector<double> eigenvalues);

  ProblemKind kind() const { return kind_; }
  int dim() const { return d_; }
  const CubicParams& cubic_params() const { return cubic_; }
  const std::vector<double>& eigenvalues() const { return eigs_; }

  double mu() const { return mu_; }
  double L() const { return L_; }
  double M() const { return M_; }
  double kappa() const { return L_ / mu_; }

  double value(const Vector& x) const;
  Vector gradient(const Vector& x) const;
  Matrix hessian(const Vector& x) const;

  // Tolerance used for the cached minimizer: 1e-12 * max(1, L).
  double reference_tol() const;
  const Vector& x_star() const;
  double f_star() const;

 private:
  Problem() = default;
  void check_dim(const Vector& x) const;
  void validate_constants() const;

  struct Cache {
    std::once_flag once;
    ReferenceSolution sol;
  };

  ProblemKind kind_ = ProblemKind::quadratic;
  int d_ = 0;
  CubicParams cubic_{};
  std::vector<double> eigs_;
  double mu_ = 0.0;
  double L_ = 0.0;
  double M_ = 0.0;
  std::shared_ptr<Cache> cache_ = std::make_shared<Cache>();
};

// Chain function tuned so that mu = 1 and L = kappa_target.
Problem make_cubic_problem(int d, double kappa_target, double delta = 1.0, double beta_f = 1.0);
Problem make_quadratic_problem(int d, const std::vector<double>& eigenvalues);

// max_i |fd_i - g_i| / (1 + |g_i|) with central differences of step h.
double finite_diff_grad_check(const Problem& problem, const Vector& x, double h);

}  // namespace qnlab
