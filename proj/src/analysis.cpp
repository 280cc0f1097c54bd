#include "qnlab/analysis.hpp"

#include <algorithm>
#include <cmath>

namespace qnlab {

double psi(const Matrix& a) {
  if (a.rows() != a.cols()) throw DomainError("potential needs a square matrix");
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) throw DomainError("potential needs a positive definite matrix");
  const auto& l = llt.matrixLLT();
  double logdet = 0.0;
  for (int i = 0; i < a.rows(); ++i) logdet += std::log(l(i, i));
  return a.trace() - static_cast<double>(a.rows()) - 2.0 * logdet;
}

double omega(double x) {
  if (!(x > -1.0)) throw DomainError("omega needs x > -1");
  return x - std::log1p(x);
}

double compute_Ct(double f_t, double f_star, double mu, double M) {
  if (!(mu > 0.0)) throw DomainError("C_t needs mu > 0");
  double gap = f_t - f_star;
  if (gap < -1e-12 * std::max(1.0, std::abs(f_star)))
    throw ConvergenceError("iterate value lies below the reference optimum");
  gap = std::max(gap, 0.0);
  return M / std::pow(mu, 1.5) * std::sqrt(2.0 * gap);
}

double compute_rho(const Vector& g, const Vector& d, const Matrix& h_star) {
  const double dhd = d.dot(h_star * d);
  if (!(dhd > 0.0)) throw DomainError("rho needs a nonzero direction");
  return -g.dot(d) / dhd;
}

DeltaConstants delta_constants(double alpha, double beta) {
  WolfeParams{alpha, beta}.validate();
  DeltaConstants c{};
  c.d1 = std::min({1.0 / 6.0, std::sqrt(2.0 * (1.0 - alpha)) - 1.0, 1.0 / std::sqrt(1.0 - beta) - 1.0});
  c.d2 = std::max(7.0 / 8.0, 1.0 / std::sqrt(2.0 * (1.0 - alpha)));
  c.d3 = 1.0 / std::sqrt(1.0 - beta);
  c.d4 = 1.0 / std::min(omega(c.d2 - 1.0), omega(c.d3 - 1.0));
  c.d5 = std::max(2.0 + 2.0 / c.d2, 4.0 * c.d3) / (2.0 * c.d2 - 1.0 - c.d1);
  c.d6 = std::log(1.0 / (2.0 * alpha * (1.0 - beta)));
  c.d7 = 1.0 + c.d4 * c.d6 + c.d5;
  c.d8 = 1.0 + 2.0 * c.d7 + (2.0 * c.d2 - c.d1 - std::log(c.d2)) / (2.0 * c.d2 - 1.0 - c.d1);
  return c;
}

// ---------------------------------------------------------------------------

WeightScheme WeightScheme::scaled_identity(double L) {
  if (!(L > 0.0)) throw ConfigError("weight scale must be positive");
  WeightScheme w;
  w.kind_ = WeightKind::scaled_identity_L;
  w.scalar_ = true;
  w.c_ = L;
  return w;
}

WeightScheme WeightScheme::hessian_at_star(const Problem& problem) {
  WeightScheme w;
  w.from_matrix(problem.hessian(problem.x_star()));
  w.kind_ = WeightKind::hessian_at_star;
  return w;
}

WeightScheme WeightScheme::custom(const Matrix& p) {
  WeightScheme w;
  w.from_matrix(p);
  w.kind_ = WeightKind::custom;
  return w;
}

void WeightScheme::from_matrix(const Matrix& p) {
  if (p.rows() != p.cols() || p.rows() == 0) throw ConfigError("weight matrix must be square");
  Eigen::SelfAdjointEigenSolver<Matrix> es(p);
  if (es.info() != Eigen::Success) throw ConfigError("weight eigendecomposition failed");
  const Vector& ev = es.eigenvalues();
  if (!(ev.minCoeff() > 0.0)) throw ConfigError("weight matrix is not positive definite");
  const double floor = 1e-14 * ev.maxCoeff();
  const Vector lam = ev.cwiseMax(floor);
  const Matrix& v = es.eigenvectors();
  p_ = p;
  half_ = v * lam.cwiseSqrt().asDiagonal() * v.transpose();
  inv_half_ = v * lam.cwiseSqrt().cwiseInverse().asDiagonal() * v.transpose();
  inv_ = v * lam.cwiseInverse().asDiagonal() * v.transpose();
  logdet_ = lam.array().log().sum();
}

double WeightScheme::norm2(const Vector& v) const {
  return scalar_ ? c_ * v.squaredNorm() : v.dot(p_ * v);
}

double WeightScheme::inv_norm2(const Vector& v) const {
  return scalar_ ? v.squaredNorm() / c_ : v.dot(inv_ * v);
}

double WeightScheme::psi_of(const Matrix& b) const {
  Eigen::LLT<Matrix> llt(b);
  if (llt.info() != Eigen::Success) throw DomainError("potential needs a positive definite matrix");
  const auto& l = llt.matrixLLT();
  double logdet_b = 0.0;
  for (int i = 0; i < b.rows(); ++i) logdet_b += 2.0 * std::log(l(i, i));
  const double d = static_cast<double>(b.rows());
  if (scalar_) return b.trace() / c_ - d - logdet_b + d * std::log(c_);
  if (b.rows() != p_.rows()) throw InputError("weight and matrix dimensions differ");
  return inv_.cwiseProduct(b).sum() - d - logdet_b + logdet_;
}

std::optional<WeightedQuantities> weighted_quantities(const IterRecord& rec, double f_next,
                                                      const WeightScheme& w, double f_star) {
  if (!rec.has_step || rec.g.size() == 0 || rec.s.size() == 0 || rec.y.size() == 0) return std::nullopt;
  const double gap = rec.f - f_star;
  const double gs = rec.g.dot(rec.s);
  const double ys = rec.y.dot(rec.s);
  if (!(gap > 0.0) || !(gs < 0.0) || !(ys > 0.0)) return std::nullopt;
  const double gg = w.inv_norm2(rec.g);
  const double ss = w.norm2(rec.s);
  const double yy = w.inv_norm2(rec.y);
  WeightedQuantities q{};
  q.p_hat = (rec.f - f_next) / -gs;
  q.q_hat = gg / gap;
  q.m_hat = ys / ss;
  q.n_hat = ys / -gs;
  q.cos_theta = -gs / std::sqrt(gg * ss);
  q.y_ratio = yy / ys;
  q.factor = q.p_hat * q.q_hat * q.n_hat * q.cos_theta * q.cos_theta / q.m_hat;
  return q;
}

// ---------------------------------------------------------------------------

namespace {

double ab(double alpha, double beta) { return alpha * (1.0 - beta); }

double clamped_log_ratio(double c0, double d1) {
  return c0 > 0.0 ? std::max(0.0, std::log(c0 / d1)) : 0.0;
}

double superlinear_tail(double kappa, double c0, double alpha, double beta, const DeltaConstants& dc) {
  const double k = 3.0 / ab(alpha, beta);
  return (k * dc.d6 * clamped_log_ratio(c0, dc.d1) + k * dc.d8 * c0) * kappa;
}

}  // namespace

double bound_thm1(int t, double psi_bbar0, double kappa, double alpha, double beta) {
  const double r = std::exp(-psi_bbar0 / t) * 2.0 * ab(alpha, beta) / kappa;
  return std::pow(1.0 - r, t);
}

double bound_cor1_L(int t, double kappa, double alpha, double beta) {
  return std::pow(1.0 - 2.0 * ab(alpha, beta) / kappa, t);
}

double bound_cor1_mu(int t, double kappa, double alpha, double beta) {
  return std::pow(1.0 - 2.0 * ab(alpha, beta) / (3.0 * kappa), t);
}

double bound_prop_second_linear(int t, double psi_btilde0, double sum_c, double alpha, double beta) {
  return std::pow(1.0 - 2.0 * ab(alpha, beta) * std::exp(-(psi_btilde0 + 3.0 * sum_c) / t), t);
}

double bound_thm2(int t, double alpha, double beta) {
  return std::pow(1.0 - 2.0 * ab(alpha, beta) / 3.0, t);
}

double thm2_threshold(double psi_btilde0, double psi_bbar0, double c0, double kappa, double alpha,
                      double beta) {
  return psi_btilde0 + 3.0 * c0 * psi_bbar0 + 9.0 / ab(alpha, beta) * c0 * kappa;
}

double cor2_threshold_L(int d, double kappa, double c0, double alpha, double beta) {
  return d * kappa + 9.0 / ab(alpha, beta) * c0 * kappa;
}

double cor2_threshold_mu(int d, double kappa, double c0, double alpha, double beta) {
  return (1.0 + 3.0 * c0) * d * std::log(kappa) + 9.0 / ab(alpha, beta) * c0 * kappa;
}

SuperlinearConstants thm3_constants(double psi_btilde0, double psi_bbar0, double c0, double kappa,
                                    double alpha, double beta) {
  const DeltaConstants dc = delta_constants(alpha, beta);
  SuperlinearConstants s{};
  s.K = dc.d7 * psi_btilde0 + (dc.d6 + dc.d8 * c0) * psi_bbar0 +
        superlinear_tail(kappa, c0, alpha, beta, dc);
  s.t0 = ct_threshold(psi_bbar0, c0, kappa, alpha, beta);
  return s;
}

double cor3_K_L(int d, double kappa, double c0, double alpha, double beta) {
  const DeltaConstants dc = delta_constants(alpha, beta);
  return dc.d7 * d * kappa + superlinear_tail(kappa, c0, alpha, beta, dc);
}

double cor3_K_mu(int d, double kappa, double c0, double alpha, double beta) {
  const DeltaConstants dc = delta_constants(alpha, beta);
  return (dc.d6 + dc.d7 + dc.d8 * c0) * d * std::log(kappa) + superlinear_tail(kappa, c0, alpha, beta, dc);
}

double bound_thm3(int t, double K) { return std::pow(K / t, t); }

double ct_threshold(double psi_bbar0, double c0, double kappa, double alpha, double beta) {
  const DeltaConstants dc = delta_constants(alpha, beta);
  return std::max(psi_bbar0, 3.0 * kappa / ab(alpha, beta) * clamped_log_ratio(c0, dc.d1));
}

double bad_rho_bound(double psi_btilde0, double psi_bbar0, double c0, double kappa, double alpha,
                     double beta) {
  const DeltaConstants dc = delta_constants(alpha, beta);
  return dc.d4 * (psi_btilde0 + 2.0 * c0 * psi_bbar0 + 6.0 * c0 * kappa / ab(alpha, beta));
}

double bound_loops(double c_t, double rho_t, double alpha, double beta) {
  return 2.0 + std::log2(1.0 + (1.0 - beta) * (1.0 + 2.0 * c_t) / (beta - alpha)) +
         2.0 * std::log2(1.0 + std::log2(2.0 * (1.0 - alpha) * (1.0 + c_t)) + std::abs(std::log2(rho_t)));
}

double lambda_sigma(double psi_bbar0, double kappa, double c0, double alpha, double beta) {
  return (psi_bbar0 + 3.0 / ab(alpha, beta) * kappa) * c0;
}

double bound_linesearch_lambda(int t, double sigma, double psi_btilde0, double alpha, double beta) {
  const double st = sigma / t;
  return 2.0 + std::log2(1.0 + (1.0 - beta) / (beta - alpha) + 2.0 * (1.0 - beta) / (beta - alpha) * st) +
         2.0 * std::log2(std::log2(16.0 * (1.0 - alpha)) + std::log2(1.0 + st) +
                         (6.0 * psi_btilde0 + 12.0 * sigma) / t);
}

const char* ComplexityReport::label() const {
  switch (argmin) {
    case 0: return "linear";
    case 1: return "linear_free";
    default: return "superlinear";
  }
}

ComplexityReport complexity_report(int d, double kappa, double c0, double epsilon, InitKind scheme,
                                   double c, double mu, double L) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("epsilon must lie in (0, 1)");
  if (!(kappa >= 1.0) || d < 1 || !(c0 >= 0.0)) throw ConfigError("invalid complexity inputs");
  const double lg = std::log(1.0 / epsilon);
  auto superlinear = [lg](double omega_) {
    if (lg == 0.0) return 0.0;
    if (!(omega_ > 0.0)) return 0.0;
    return lg / std::log(0.5 + std::sqrt(0.25 + lg / omega_));
  };
  ComplexityReport r{};
  switch (scheme) {
    case InitKind::L_identity:
      r.linear = kappa * lg;
      r.linear_free = (d + c0) * kappa + lg;
      r.superlinear = superlinear(d * kappa + c0 * kappa);
      break;
    case InitKind::mu_identity: {
      const double w = d * std::log(kappa);
      r.linear = w + kappa * lg;
      r.linear_free = c0 * (w + kappa) + lg;
      r.superlinear = superlinear(c0 * (w + kappa));
      break;
    }
    case InitKind::identity:
    case InitKind::c_identity: {
      const double cc = scheme == InitKind::identity ? 1.0 : c;
      if (!(cc >= mu && cc <= L && mu > 0.0)) throw ConfigError("cI complexity needs mu <= c <= L");
      const double bar = d * (cc / L - 1.0 + std::log(L / cc));
      const double tilde = d * (cc / mu - 1.0 + std::log(L / cc));
      const double w = tilde + c0 * bar + c0 * kappa;
      r.linear = bar + kappa * lg;
      r.linear_free = w + lg;
      r.superlinear = superlinear(w);
      break;
    }
    case InitKind::custom: throw ConfigError("no closed-form complexity for a custom B0");
  }
  const double v[3] = {r.linear, r.linear_free, r.superlinear};
  r.argmin = static_cast<int>(std::min_element(v, v + 3) - v);
  return r;
}

// ---------------------------------------------------------------------------

std::vector<DiagnosticsRow> compute_diagnostics(const RunTrace& trace, const Problem& problem) {
  const WeightScheme star = WeightScheme::hessian_at_star(problem);
  const Matrix& h_star = star.P();
  std::vector<DiagnosticsRow> rows;
  rows.reserve(trace.records.size());
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    const IterRecord& rec = trace.records[i];
    DiagnosticsRow row;
    row.t = rec.t;
    row.C_t = compute_Ct(rec.f, trace.f_star, problem.mu(), problem.M());
    if (rec.has_step && rec.d.size() > 0 && rec.d.squaredNorm() > 0.0)
      row.rho_t = compute_rho(rec.g, rec.d, h_star);
    if (i + 1 < trace.records.size()) {
      if (auto q = weighted_quantities(rec, trace.records[i + 1].f, star, trace.f_star)) {
        row.p_hat = q->p_hat;
        row.q_hat = q->q_hat;
        row.m_hat = q->m_hat;
        row.n_hat = q->n_hat;
        row.cos_theta = q->cos_theta;
        row.factor = q->factor;
      } else if (rec.has_step && rec.g.size() == 0 && rec.g_dot_s < 0.0) {
        row.p_hat = (rec.f - trace.records[i + 1].f) / -rec.g_dot_s;
        row.n_hat = rec.sy_dot / -rec.g_dot_s;
      }
    }
    const Matrix* b = rec.t == 0 && trace.B0.size() > 0 ? &trace.B0 : trace.snapshot_at(rec.t);
    if (b) {
      row.psi_Bbar = psi(*b / problem.L());
      row.psi_Btilde = star.psi_of(*b);
    }
    rows.push_back(row);
  }
  return rows;
}

bool hessian_sandwich_check(const Problem& problem, const Vector& x, double c_t, double* margin) {
  const Matrix h_star = problem.hessian(problem.x_star());
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(problem.hessian(x), h_star, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw DomainError("generalized eigensolve failed");
  const Vector& ev = es.eigenvalues();
  const double lo = 1.0 / (1.0 + c_t) - 1e-8;
  const double hi = 1.0 + c_t + 1e-8;
  const double m = std::min(ev.minCoeff() - lo, hi - ev.maxCoeff());
  if (margin) *margin = m;
  return m >= 0.0;
}

}  // namespace qnlab
