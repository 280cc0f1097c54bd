#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "qnlab/driver.hpp"

namespace qnlab {

// Tr(A) - d - log det(A) via Cholesky. Throws DomainError if A is not SPD.
double psi(const Matrix& a);

// x - log(1 + x) for x > -1.
double omega(double x);

// (M / mu^{3/2}) sqrt(2 (f_t - f*)).
double compute_Ct(double f_t, double f_star, double mu, double M);

// -g'd / (d' H* d)
double compute_rho(const Vector& g, const Vector& d, const Matrix& h_star);

struct DeltaConstants {
  double d1, d2, d3, d4, d5, d6, d7, d8;
};

DeltaConstants delta_constants(double alpha, double beta);

enum class WeightKind { scaled_identity_L, hessian_at_star, custom };

// Weight matrix P with its square roots.
class WeightScheme {
 public:
  static WeightScheme scaled_identity(double L);
  static WeightScheme hessian_at_star(const Problem& problem);
  static WeightScheme custom(const Matrix& p);

  WeightKind kind() const { return kind_; }
  int dim() const { return static_cast<int>(p_.rows()); }
  bool is_scalar() const { return scalar_; }
  double scale() const { return c_; }  // P = c I when is_scalar()
  const Matrix& P() const { return p_; }
  const Matrix& half() const { return half_; }
  const Matrix& inv_half() const { return inv_half_; }

  // v' P v and v' P^{-1} v
  double norm2(const Vector& v) const;
  double inv_norm2(const Vector& v) const;
  // Psi(P^{-1/2} B P^{-1/2})
  double psi_of(const Matrix& b) const;

 private:
  WeightKind kind_ = WeightKind::custom;
  bool scalar_ = false;
  double c_ = 1.0;
  Matrix p_, half_, inv_half_, inv_;
  double logdet_ = 0.0;
  void from_matrix(const Matrix& p);
};

struct WeightedQuantities {
  double p_hat, q_hat, m_hat, n_hat, cos_theta;
  double y_ratio;  // ||y^||^2 / (y^' s^)
  double factor;   // p q n cos^2 / m
};

// Quantities for the step leaving `rec`; f_next is f at the following iterate.
// Empty when the record has no step or sits at the optimum.
std::optional<WeightedQuantities> weighted_quantities(const IterRecord& rec, double f_next,
                                                      const WeightScheme& w, double f_star);

// ---------------------------------------------------------------------------
// Envelopes and thresholds.

double bound_thm1(int t, double psi_bbar0, double kappa, double alpha, double beta);
double bound_cor1_L(int t, double kappa, double alpha, double beta);
// (1 - 2a(1-b)/(3 kappa))^t, valid for t >= d log kappa.
double bound_cor1_mu(int t, double kappa, double alpha, double beta);
double bound_prop_second_linear(int t, double psi_btilde0, double sum_c, double alpha, double beta);
double bound_thm2(int t, double alpha, double beta);
double thm2_threshold(double psi_btilde0, double psi_bbar0, double c0, double kappa, double alpha,
                      double beta);
double cor2_threshold_L(int d, double kappa, double c0, double alpha, double beta);
double cor2_threshold_mu(int d, double kappa, double c0, double alpha, double beta);

struct SuperlinearConstants {
  double K;
  double t0;  // envelope checked for t > t0
};
SuperlinearConstants thm3_constants(double psi_btilde0, double psi_bbar0, double c0, double kappa,
                                    double alpha, double beta);
double cor3_K_L(int d, double kappa, double c0, double alpha, double beta);
double cor3_K_mu(int d, double kappa, double c0, double alpha, double beta);
double bound_thm3(int t, double K);

// C_t <= delta1 from this iteration on.
double ct_threshold(double psi_bbar0, double c0, double kappa, double alpha, double beta);
// Cap on #{t : rho_t outside [delta2, delta3]}.
double bad_rho_bound(double psi_btilde0, double psi_bbar0, double c0, double kappa, double alpha,
                     double beta);

double bound_loops(double c_t, double rho_t, double alpha, double beta);
double lambda_sigma(double psi_bbar0, double kappa, double c0, double alpha, double beta);
double bound_linesearch_lambda(int t, double sigma, double psi_btilde0, double alpha, double beta);

struct ComplexityReport {
  double linear;       // kappa-dependent linear phase
  double linear_free;  // condition-number-free linear phase
  double superlinear;
  int argmin;  // 0, 1 or 2
  const char* label() const;
};
// c is only read for InitKind::c_identity.
ComplexityReport complexity_report(int d, double kappa, double c0, double epsilon, InitKind scheme,
                                   double c = 0.0, double mu = 1.0, double L = 1.0);

// ---------------------------------------------------------------------------
// Per-iterate diagnostics (CSV row payload).

struct DiagnosticsRow {
  static constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  int t = 0;
  double p_hat = nan, q_hat = nan, m_hat = nan, n_hat = nan, cos_theta = nan;
  double factor = nan;
  double C_t = nan;
  double rho_t = nan;
  double psi_Bbar = nan;
  double psi_Btilde = nan;
};

// Weighted columns use P = Hessian at the minimizer. Psi columns are filled at
// t = 0 and wherever a B_t snapshot exists.
std::vector<DiagnosticsRow> compute_diagnostics(const RunTrace& trace, const Problem& problem);

bool hessian_sandwich_check(const Problem& problem, const Vector& x, double c_t,
                            double* margin = nullptr);

}  // namespace qnlab
