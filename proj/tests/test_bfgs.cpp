#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "qnlab/bfgs.hpp"
#include "qnlab/errors.hpp"
#include "qnlab/kernels.hpp"

using namespace qnlab;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

Vector random_vector(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> n;
  Vector v(d);
  for (int i = 0; i < d; ++i) v[i] = n(rng);
  return v;
}

Matrix random_spd(std::mt19937_64& rng, int d) {
  Matrix a(d, d);
  for (int j = 0; j < d; ++j) a.col(j) = random_vector(rng, d);
  return a * a.transpose() + Matrix::Identity(d, d) * d;
}

// Textbook direct update, written out independently of the library.
Matrix textbook_direct(const Matrix& b, const Vector& s, const Vector& y) {
  const Vector bs = b * s;
  return b - bs * bs.transpose() / s.dot(bs) + y * y.transpose() / s.dot(y);
}

Matrix textbook_inverse(const Matrix& h, const Vector& s, const Vector& y) {
  const int d = static_cast<int>(s.size());
  const double r = 1.0 / y.dot(s);
  const Matrix left = Matrix::Identity(d, d) - r * s * y.transpose();
  return left * h * left.transpose() + r * s * s.transpose();
}

bool is_spd(const Matrix& m) { return Eigen::LLT<Matrix>(m).info() == Eigen::Success; }

}  // namespace

TEST_CASE("init names round trip") {
  for (InitKind k : {InitKind::L_identity, InitKind::mu_identity, InitKind::identity, InitKind::c_identity})
    CHECK(parse_init(init_name(k)) == k);
  CHECK_THROWS_AS(parse_init("custom"), ConfigError);
  CHECK_THROWS_AS(parse_init("bogus"), ConfigError);
}

TEST_CASE("initial matrices") {
  const Problem q = make_quadratic_problem(2, {1.0, 4.0});
  CHECK(initial_matrix(2, {InitKind::mu_identity, {}, {}}, q) == Matrix::Identity(2, 2));
  CHECK(initial_matrix(2, {InitKind::L_identity, {}, {}}, q) == 4.0 * Matrix::Identity(2, 2));
  CHECK(initial_matrix(2, {InitKind::identity, {}, {}}, q) == Matrix::Identity(2, 2));

  InitScheme ci{InitKind::c_identity, {}, std::make_pair(Vector(Vector::Zero(2)), vec({1.0, 0.0}))};
  CHECK(c_identity_scale(q, Vector::Zero(2), vec({1.0, 0.0})) == 1.0);
  CHECK(initial_matrix(2, ci, q) == Matrix::Identity(2, 2));

  InitScheme same{InitKind::c_identity, {}, std::make_pair(Vector(Vector::Ones(2)), Vector(Vector::Ones(2)))};
  CHECK_THROWS_AS(initial_matrix(2, same, q), ConfigError);
  InitScheme noprobe{InitKind::c_identity, {}, std::nullopt};
  CHECK_THROWS_AS(initial_matrix(2, noprobe, q), ConfigError);

  Matrix bad(2, 2);
  bad << 1, 2, 2, 1;
  CHECK_THROWS_AS(initial_matrix(2, {InitKind::custom, bad, {}}, q), ConfigError);
  Matrix asym(2, 2);
  asym << 2, 0.5, 0, 2;
  CHECK_THROWS_AS(initial_matrix(2, {InitKind::custom, asym, {}}, q), ConfigError);
  Matrix good(2, 2);
  good << 2, 0.5, 0.5, 2;
  CHECK(initial_matrix(2, {InitKind::custom, good, {}}, q) == good);
  CHECK_THROWS_AS(initial_matrix(3, {InitKind::custom, good, {}}, q), ConfigError);
}

TEST_CASE("c lies in [mu, L] for random probes") {
  std::mt19937_64 rng(4);
  const Problem cubic = make_cubic_problem(20, 500.0);
  const Problem quad = make_quadratic_problem(5, {1.0, 3.0, 7.0, 20.0, 90.0});
  for (int k = 0; k < 200; ++k) {
    for (const Problem* p : {&cubic, &quad}) {
      const int d = p->dim();
      const Vector x1 = random_vector(rng, d) * (k % 4 + 0.1);
      const Vector x2 = x1 + random_vector(rng, d) * (k % 3 + 0.01);
      const double c = c_identity_scale(*p, x1, x2);
      CHECK(c >= p->mu() * (1 - 1e-12));
      CHECK(c <= p->L() * (1 + 1e-12));
    }
  }
}

TEST_CASE("direction examples") {
  BfgsState s1(Matrix::Constant(1, 1, 2.0), MatrixForm::direct);
  CHECK(s1.direction(Vector::Constant(1, 4.0))[0] == doctest::Approx(-2.0));
  BfgsState s1i(Matrix::Constant(1, 1, 2.0), MatrixForm::inverse);
  CHECK(s1i.direction(Vector::Constant(1, 4.0))[0] == doctest::Approx(-2.0));

  Matrix b(2, 2);
  b << 1, 0, 0, 4;
  for (MatrixForm f : {MatrixForm::direct, MatrixForm::inverse}) {
    BfgsState st(b, f);
    CHECK((st.direction(vec({1.0, 4.0})) - vec({-1.0, -1.0})).norm() <= 1e-15);
    CHECK(st.direction(Vector::Zero(2)).isZero(0.0));
  }
}

TEST_CASE("update examples") {
  const Vector s = vec({1.0, 0.0}), y = vec({2.0, 0.0});
  BfgsState direct(Matrix::Identity(2, 2), MatrixForm::direct);
  direct.update(s, y);
  CHECK((direct.matrix() - Matrix(vec({2.0, 1.0}).asDiagonal())).norm() <= 1e-15);
  CHECK((direct.matrix() * s - y).norm() <= 1e-15);
  CHECK(direct.update_count() == 1);
  CHECK(direct.last_pair_dot() == 2.0);

  BfgsState inverse(Matrix::Identity(2, 2), MatrixForm::inverse);
  inverse.update(s, y);
  CHECK((inverse.matrix() - Matrix(vec({0.5, 1.0}).asDiagonal())).norm() <= 1e-15);
  CHECK((inverse.approximation() - direct.matrix()).norm() <= 1e-14);
  CHECK((direct.inverse_approximation() - inverse.matrix()).norm() <= 1e-14);

  std::mt19937_64 rng(8);
  for (int k = 0; k < 10; ++k) {
    const Matrix b0 = random_spd(rng, 4);
    const Vector v = random_vector(rng, 4);
    BfgsState st(b0, MatrixForm::direct);
    st.update(v, v);
    CHECK((st.matrix() * v - v).norm() <= 1e-10 * (1 + v.norm()));
  }
}

TEST_CASE("nonpositive curvature pairs are rejected") {
  for (MatrixForm f : {MatrixForm::direct, MatrixForm::inverse}) {
    BfgsState st(Matrix::Identity(2, 2), f);
    CHECK_THROWS_AS(st.update(vec({1.0, 0.0}), vec({-1.0, 0.0})), CurvaturePairError);
    CHECK_THROWS_AS(st.update(vec({1.0, 0.0}), vec({0.0, 1.0})), CurvaturePairError);
    CHECK(st.update_count() == 0);
    try {
      st.update(vec({1.0, 0.0}), vec({-3.0, 0.0}));
    } catch (const CurvaturePairError& e) {
      CHECK(e.sy() == -3.0);
    }
  }
}

TEST_CASE("update invariants on random pair streams") {
  std::mt19937_64 rng(12);
  for (auto isa : {kernels::Isa::scalar, kernels::Isa::avx2}) {
    kernels::set_isa(isa);
    for (int d : {1, 3, 8, 30}) {
      const Matrix b0 = random_spd(rng, d);
      BfgsState direct(b0, MatrixForm::direct), inverse(b0, MatrixForm::inverse);
      Matrix ref_b = b0, ref_h = b0.inverse();
      for (int k = 0; k < 2 * d + 3; ++k) {
        const Vector s = random_vector(rng, d);
        Vector y = random_spd(rng, d) * s / d;
        if (y.dot(s) <= 0) continue;
        direct.update(s, y);
        inverse.update(s, y);
        ref_b = textbook_direct(ref_b, s, y);
        ref_h = textbook_inverse(ref_h, s, y);
        const Matrix& B = direct.matrix();
        const Matrix& H = inverse.matrix();
        CHECK((B * s - y).norm() <= 1e-10 * (1 + y.norm()));
        CHECK((H * y - s).norm() <= 1e-10 * (1 + s.norm()));
        CHECK((B - B.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * B.cwiseAbs().maxCoeff());
        CHECK((H - H.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * H.cwiseAbs().maxCoeff());
        CHECK(is_spd(B));
        CHECK(is_spd(H));
        CHECK((B - ref_b).cwiseAbs().maxCoeff() <= 1e-9 * (1 + ref_b.cwiseAbs().maxCoeff()));
        CHECK((H - ref_h).cwiseAbs().maxCoeff() <= 1e-9 * (1 + ref_h.cwiseAbs().maxCoeff()));
        const double cond = B.norm() * H.norm();
        CHECK((B * H - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() <= 1e-8 * std::max(1.0, cond));
      }
    }
  }
  kernels::set_isa(kernels::detect_isa());
}

TEST_CASE("quadratic termination with exact line search") {
  std::mt19937_64 rng(21);
  for (int d : {2, 5, 12}) {
    const Matrix A = random_spd(rng, d);
    BfgsState st(Matrix::Identity(d, d), MatrixForm::inverse);
    Vector x = random_vector(rng, d);
    std::vector<Vector> steps;
    for (int k = 0; k < d; ++k) {
      const Vector g = A * x;
      if (g.norm() < 1e-13) break;
      const Vector p = st.direction(g);
      const double eta = -g.dot(p) / p.dot(A * p);
      const Vector s = eta * p;
      st.update(s, A * s);
      steps.push_back(s);
      x += s;
    }
    const Matrix B = st.approximation();
    for (const Vector& s : steps) CHECK((B * s - A * s).norm() <= 1e-6 * (1 + (A * s).norm()));
    if (static_cast<int>(steps.size()) == d) CHECK((B - A).norm() <= 1e-6 * A.norm());
  }
}

TEST_CASE("indefinite initial matrices are rejected") {
  Matrix b(2, 2);
  b << 1, 2, 2, 1;
  CHECK_THROWS_AS(BfgsState(b, MatrixForm::direct), ConfigError);
  CHECK_THROWS_AS(BfgsState(b, MatrixForm::inverse), ConfigError);
  CHECK_THROWS_AS(BfgsState(Matrix(2, 3), MatrixForm::direct), ConfigError);
}
