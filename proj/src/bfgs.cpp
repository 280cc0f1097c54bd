#include "qnlab/bfgs.hpp"

#include <cmath>

#include "qnlab/errors.hpp"
#include "qnlab/kernels.hpp"

namespace qnlab {

namespace {

Matrix spd_inverse(const Matrix& a) {
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) throw SpdError("matrix is not positive definite");
  Matrix inv = llt.solve(Matrix::Identity(a.rows(), a.cols()));
  return 0.5 * (inv + inv.transpose());
}

}  // namespace

const char* init_name(InitKind kind) {
  switch (kind) {
    case InitKind::L_identity: return "LI";
    case InitKind::mu_identity: return "muI";
    case InitKind::identity: return "I";
    case InitKind::c_identity: return "cI";
    case InitKind::custom: return "custom";
  }
  return "?";
}

InitKind parse_init(const std::string& name) {
  if (name == "LI") return InitKind::L_identity;
  if (name == "muI") return InitKind::mu_identity;
  if (name == "I") return InitKind::identity;
  if (name == "cI") return InitKind::c_identity;
  throw ConfigError("unknown init scheme '" + name + "' (expected LI, muI, I or cI)");
}

double c_identity_scale(const Problem& problem, const Vector& x1, const Vector& x2) {
  const Vector s = x2 - x1;
  const double ss = s.squaredNorm();
  if (!(ss > 0.0)) throw ConfigError("c_identity probes must be distinct points");
  const Vector y = problem.gradient(x2) - problem.gradient(x1);
  return s.dot(y) / ss;
}

Matrix initial_matrix(int d, const InitScheme& scheme, const Problem& problem) {
  if (d != problem.dim()) throw ConfigError("init dimension does not match problem");
  switch (scheme.kind) {
    case InitKind::L_identity: return problem.L() * Matrix::Identity(d, d);
    case InitKind::mu_identity: return problem.mu() * Matrix::Identity(d, d);
    case InitKind::identity: return Matrix::Identity(d, d);
    case InitKind::c_identity: {
      if (!scheme.probes) throw ConfigError("c_identity needs a probe pair");
      return c_identity_scale(problem, scheme.probes->first, scheme.probes->second) *
             Matrix::Identity(d, d);
    }
    case InitKind::custom: {
      const Matrix& c = scheme.custom;
      if (c.rows() != d || c.cols() != d) throw ConfigError("custom B0 has wrong shape");
      if ((c - c.transpose()).cwiseAbs().maxCoeff() > 0.0) throw ConfigError("custom B0 is not symmetric");
      Eigen::LLT<Matrix> llt(c);
      if (llt.info() != Eigen::Success) throw ConfigError("custom B0 is not positive definite");
      return c;
    }
  }
  throw ConfigError("unknown init scheme");
}

BfgsState::BfgsState(const Matrix& b0, MatrixForm form) : form_(form) {
  if (b0.rows() != b0.cols() || b0.rows() == 0) throw ConfigError("B0 must be square and nonempty");
  try {
    m_ = form == MatrixForm::direct ? b0 : spd_inverse(b0);
  } catch (const SpdError&) {
    throw ConfigError("B0 is not positive definite");
  }
  if (form == MatrixForm::direct) {
    Eigen::LLT<Matrix> llt(m_);
    if (llt.info() != Eigen::Success) throw ConfigError("B0 is not positive definite");
  }
}

Vector BfgsState::direction(const Vector& g) const {
  if (g.size() != m_.rows()) throw InputError("gradient length does not match state");
  const auto n = static_cast<std::size_t>(g.size());
  Vector d(g.size());
  if (form_ == MatrixForm::inverse) {
    kernels::symv(m_.data(), g.data(), d.data(), n);
    return -d;
  }
  Eigen::LLT<Matrix> llt(m_);
  if (llt.info() != Eigen::Success) throw SpdError("B_t lost positive definiteness");
  return -llt.solve(g);
}

void BfgsState::update(const Vector& s, const Vector& y) {
  const auto n = static_cast<std::size_t>(m_.rows());
  if (s.size() != m_.rows() || y.size() != m_.rows()) throw InputError("curvature pair length mismatch");
  const double sy = kernels::dot(s.data(), y.data(), n);
  if (!(sy > 0.0) || !std::isfinite(sy)) throw CurvaturePairError("curvature pair has s'y <= 0", sy);
  Vector w(s.size());
  if (form_ == MatrixForm::direct) {
    kernels::symv(m_.data(), s.data(), w.data(), n);
    const double sbs = kernels::dot(s.data(), w.data(), n);
    kernels::sym_rank2(m_.data(), w.data(), y.data(), 0.0, -1.0 / sbs, 1.0 / sy, n);
  } else {
    kernels::symv(m_.data(), y.data(), w.data(), n);
    const double yhy = kernels::dot(y.data(), w.data(), n);
    kernels::sym_rank2(m_.data(), s.data(), w.data(), -1.0 / sy, (1.0 + yhy / sy) / sy, 0.0, n);
  }
  ++updates_;
  last_sy_ = sy;
}

Matrix BfgsState::approximation() const {
  return form_ == MatrixForm::direct ? m_ : spd_inverse(m_);
}

Matrix BfgsState::inverse_approximation() const {
  return form_ == MatrixForm::inverse ? m_ : spd_inverse(m_);
}

BfgsState init_state(int d, const InitScheme& scheme, const Problem& problem, MatrixForm form) {
  return BfgsState(initial_matrix(d, scheme, problem), form);
}

}  // namespace qnlab
