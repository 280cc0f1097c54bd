#pragma once

#include <optional>
#include <string>
#include <utility>

#include "qnlab/objective.hpp"

namespace qnlab {

enum class MatrixForm { direct, inverse };

enum class InitKind { L_identity, mu_identity, identity, c_identity, custom };

const char* init_name(InitKind kind);
InitKind parse_init(const std::string& name);

struct InitScheme {
  InitKind kind = InitKind::L_identity;
  Matrix custom;                                     // custom only
  std::optional<std::pair<Vector, Vector>> probes;  // c_identity only
};

// c = s'y / ||s||^2 for s = x2 - x1, y = grad f(x2) - grad f(x1).
double c_identity_scale(const Problem& problem, const Vector& x1, const Vector& x2);

// B_0 for the given scheme.
Matrix initial_matrix(int d, const InitScheme& scheme, const Problem& problem);

// Dense BFGS approximation kept either as B (direct) or as H = B^{-1} (inverse).
class BfgsState {
 public:
  // b0 is the initial Hessian approximation in both forms.
  BfgsState(const Matrix& b0, MatrixForm form);

  int dim() const { return static_cast<int>(m_.rows()); }
  MatrixForm form() const { return form_; }
  const Matrix& matrix() const { return m_; }
  int update_count() const { return updates_; }
  double last_pair_dot() const { return last_sy_; }

  // -B^{-1} g
  Vector direction(const Vector& g) const;
  // Throws CurvaturePairError unless s'y > 0.
  void update(const Vector& s, const Vector& y);

  Matrix approximation() const;          // B
  Matrix inverse_approximation() const;  // H

 private:
  Matrix m_;
  MatrixForm form_;
  int updates_ = 0;
  double last_sy_ = 0.0;
};

BfgsState init_state(int d, const InitScheme& scheme, const Problem& problem, MatrixForm form);

}  // namespace qnlab
