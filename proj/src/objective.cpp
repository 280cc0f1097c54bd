#include "qnlab/objective.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qnlab/errors.hpp"

namespace qnlab {

CubicG cubic_g(double w, double delta) {
  const double a = std::abs(w);
  if (a <= delta) return {a * a * a / 3.0, w * a, 2.0 * a};
  const double sign = w > 0.0 ? 1.0 : -1.0;
  return {delta * w * w - delta * delta * a + delta * delta * delta / 3.0,
          2.0 * delta * w - delta * delta * sign, 2.0 * delta};
}

Problem Problem::cubic(int d, const CubicParams& params) {
  if (d < 2) throw ConfigError("cubic problem needs d >= 2");
  if (!(params.alpha_f >= 0.0) || !(params.beta_f >= 0.0) || !(params.lambda > 0.0) ||
      !(params.delta > 0.0))
    throw ConfigError("cubic hyperparameters must be positive");
  Problem p;
  p.kind_ = ProblemKind::cubic_chain;
  p.d_ = d;
  p.cubic_ = params;
  p.mu_ = params.lambda;
  // ||D||^2 <= 4, g'' <= 2 Delta and g'' is 2-Lipschitz.
  p.L_ = 2.0 * params.alpha_f * params.delta / 3.0 + params.lambda;
  p.M_ = 4.0 * params.alpha_f / 3.0;
  p.validate_constants();
  return p;
}

Problem Problem::quadratic(std::vector<double> eigenvalues) {
  if (eigenvalues.empty()) throw ConfigError("quadratic problem needs at least one eigenvalue");
  for (double e : eigenvalues)
    if (!(e > 0.0) || !std::isfinite(e)) throw ConfigError("quadratic eigenvalues must be positive");
  Problem p;
  p.kind_ = ProblemKind::quadratic;
  p.d_ = static_cast<int>(eigenvalues.size());
  p.mu_ = *std::min_element(eigenvalues.begin(), eigenvalues.end());
  p.L_ = *std::max_element(eigenvalues.begin(), eigenvalues.end());
  p.M_ = 0.0;
  p.eigs_ = std::move(eigenvalues);
  return p;
}

void Problem::check_dim(const Vector& x) const {
  if (x.size() != d_)
    throw InputError("point has length " + std::to_string(x.size()) + ", expected " +
                     std::to_string(d_));
}

// Gershgorin discs of the tridiagonal Hessian at the origin and at a point
// where every link sits on the quadratic branch (largest curvature).
void Problem::validate_constants() const {
  for (int pass = 0; pass < 2; ++pass) {
    Vector x = Vector::Zero(d_);
    if (pass == 1)
      for (int i = 0; i < d_; ++i) x[i] = (i % 2 ? -1.0 : 1.0) * 2.0 * cubic_.delta;
    const Matrix h = hessian(x);
    for (int i = 0; i < d_; ++i) {
      const double off = h.row(i).cwiseAbs().sum() - std::abs(h(i, i));
      if (h(i, i) + off > L_ * (1.0 + 1e-12) || h(i, i) - off < mu_ * (1.0 - 1e-12))
        throw ConfigError("cubic curvature constants do not bound the Hessian");
    }
  }
}

double Problem::value(const Vector& x) const {
  check_dim(x);
  if (kind_ == ProblemKind::quadratic) {
    double s = 0.0;
    for (int i = 0; i < d_; ++i) s += eigs_[i] * x[i] * x[i];
    return 0.5 * s;
  }
  double chain = 0.0;
  for (int i = 0; i + 1 < d_; ++i) chain += cubic_g(x[i] - x[i + 1], cubic_.delta).value;
  return cubic_.alpha_f / 12.0 * (chain - cubic_.beta_f * x[0]) + 0.5 * cubic_.lambda * x.squaredNorm();
}

Vector Problem::gradient(const Vector& x) const {
  check_dim(x);
  Vector g(d_);
  if (kind_ == ProblemKind::quadratic) {
    for (int i = 0; i < d_; ++i) g[i] = eigs_[i] * x[i];
    return g;
  }
  const double c = cubic_.alpha_f / 12.0;
  g = cubic_.lambda * x;
  for (int i = 0; i + 1 < d_; ++i) {
    const double r = c * cubic_g(x[i] - x[i + 1], cubic_.delta).d1;
    g[i] += r;
    g[i + 1] -= r;
  }
  g[0] -= c * cubic_.beta_f;
  return g;
}

Matrix Problem::hessian(const Vector& x) const {
  check_dim(x);
  if (kind_ == ProblemKind::quadratic) {
    Matrix h = Matrix::Zero(d_, d_);
    for (int i = 0; i < d_; ++i) h(i, i) = eigs_[i];
    return h;
  }
  const double c = cubic_.alpha_f / 12.0;
  Matrix h = Matrix::Identity(d_, d_) * cubic_.lambda;
  for (int i = 0; i + 1 < d_; ++i) {
    const double w = c * cubic_g(x[i] - x[i + 1], cubic_.delta).d2;
    h(i, i) += w;
    h(i + 1, i + 1) += w;
    h(i, i + 1) -= w;
    h(i + 1, i) -= w;
  }
  return h;
}

double Problem::reference_tol() const { return 1e-12 * std::max(1.0, L_); }

const Vector& Problem::x_star() const {
  std::call_once(cache_->once, [this] { cache_->sol = reference_solution(*this, reference_tol()); });
  return cache_->sol.x;
}

double Problem::f_star() const {
  x_star();
  return cache_->sol.f;
}

ReferenceSolution reference_solution(const Problem& problem, double tol) {
  return reference_solution(problem, tol, Vector::Zero(problem.dim()));
}

ReferenceSolution reference_solution(const Problem& problem, double tol, const Vector& start) {
  if (!(tol > 0.0)) throw ConfigError("reference tolerance must be positive");
  ReferenceSolution sol;
  if (problem.kind() == ProblemKind::quadratic) {
    sol.x = Vector::Zero(problem.dim());
    sol.f = 0.0;
    return sol;
  }
  Vector x = start;
  double f = problem.value(x);
  Vector g = problem.gradient(x);
  constexpr int kMaxSteps = 500;
  for (int k = 0; k < kMaxSteps; ++k) {
    const double gnorm = g.norm();
    if (gnorm <= tol) {
      sol.x = x;
      sol.f = f;
      sol.newton_steps = k;
      return sol;
    }
    Eigen::LLT<Matrix> llt(problem.hessian(x));
    if (llt.info() != Eigen::Success) throw SpdError("Hessian factorization failed in reference solve");
    const Vector p = -llt.solve(g);
    const double gp = g.dot(p);
    double eta = 1.0;
    bool moved = false;
    for (int h = 0; h < 60; ++h, eta *= 0.5) {
      Vector xn = x + eta * p;
      const double fn = problem.value(xn);
      Vector gn = problem.gradient(xn);
      // Near the solution f differences drown in rounding; fall back to the
      // gradient norm as the merit.
      if (fn <= f + 1e-4 * eta * gp || gn.norm() < gnorm) {
        x = std::move(xn);
        f = fn;
        g = std::move(gn);
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  if (g.norm() <= tol) {
    sol.x = x;
    sol.f = f;
    sol.newton_steps = kMaxSteps;
    return sol;
  }
  throw ConvergenceError("reference Newton solve did not reach tolerance");
}

Problem make_cubic_problem(int d, double kappa_target, double delta, double beta_f) {
  if (!(kappa_target > 1.0)) throw ConfigError("kappa must exceed 1");
  if (!(delta > 0.0)) throw ConfigError("Delta must be positive");
  CubicParams p;
  p.lambda = 1.0;
  p.delta = delta;
  p.beta_f = beta_f;
  p.alpha_f = 3.0 * (kappa_target - 1.0) / (2.0 * delta);
  return Problem::cubic(d, p);
}

Problem make_quadratic_problem(int d, const std::vector<double>& eigenvalues) {
  if (d != static_cast<int>(eigenvalues.size()))
    throw ConfigError("eigenvalue count does not match dimension");
  return Problem::quadratic(eigenvalues);
}

double finite_diff_grad_check(const Problem& problem, const Vector& x, double h) {
  if (!(h > 0.0)) throw ConfigError("finite-difference step must be positive");
  const Vector g = problem.gradient(x);
  double worst = 0.0;
  Vector xp = x;
  for (int i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    xp[i] = xi + h;
    const double fp = problem.value(xp);
    xp[i] = xi - h;
    const double fm = problem.value(xp);
    xp[i] = xi;
    const double fd = (fp - fm) / (2.0 * h);
    worst = std::max(worst, std::abs(fd - g[i]) / (1.0 + std::abs(g[i])));
  }
  return worst;
}

}  // namespace qnlab
