#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "qnlab/errors.hpp"
#include "qnlab/objective.hpp"

using namespace qnlab;

namespace {

Vector random_vector(std::mt19937_64& rng, int d, double scale) {
  std::normal_distribution<double> n(0.0, scale);
  Vector v(d);
  for (int i = 0; i < d; ++i) v[i] = n(rng);
  return v;
}

// Independent evaluation of the chain objective by explicit loops.
double chain_value(const CubicParams& p, const Vector& x) {
  double s = 0.0;
  for (int i = 0; i + 1 < x.size(); ++i) {
    const double w = std::abs(x[i] - x[i + 1]);
    s += w <= p.delta ? w * w * w / 3.0 : p.delta * w * w - p.delta * p.delta * w + p.delta * p.delta * p.delta / 3.0;
  }
  return p.alpha_f / 12.0 * (s - p.beta_f * x[0]) + 0.5 * p.lambda * x.squaredNorm();
}

}  // namespace

TEST_CASE("cubic_g examples") {
  auto g0 = cubic_g(0.0, 1.0);
  CHECK(g0.value == 0.0);
  CHECK(g0.d1 == 0.0);
  CHECK(g0.d2 == 0.0);
  auto g1 = cubic_g(1.0, 1.0);
  CHECK(g1.value == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(g1.d1 == doctest::Approx(1.0));
  CHECK(g1.d2 == doctest::Approx(2.0));
  auto g2 = cubic_g(2.0, 1.0);
  CHECK(g2.value == doctest::Approx(7.0 / 3.0).epsilon(1e-15));
  CHECK(g2.d1 == doctest::Approx(3.0));
  CHECK(g2.d2 == doctest::Approx(2.0));
  auto gm = cubic_g(-2.0, 1.0);
  CHECK(gm.value == doctest::Approx(7.0 / 3.0));
  CHECK(gm.d1 == doctest::Approx(-3.0));
}

TEST_CASE("cubic_g derivatives match central differences") {
  const double h = 1e-6;
  for (double delta : {0.5, 1.0, 2.0})
    for (double w = -3.0; w <= 3.0; w += 0.37) {
      const auto g = cubic_g(w, delta);
      const double fd1 = (cubic_g(w + h, delta).value - cubic_g(w - h, delta).value) / (2 * h);
      const double fd2 = (cubic_g(w + h, delta).d1 - cubic_g(w - h, delta).d1) / (2 * h);
      CHECK(g.d1 == doctest::Approx(fd1).epsilon(1e-7));
      CHECK(g.d2 == doctest::Approx(fd2).epsilon(1e-6));
    }
}

TEST_CASE("cubic_g is continuous at the branch points") {
  for (double delta : {0.25, 1.0, 3.0})
    for (double sign : {-1.0, 1.0}) {
      const double w = sign * delta;
      const auto in = cubic_g(std::nextafter(w, 0.0), delta);
      const auto out = cubic_g(std::nextafter(w, sign * 1e9), delta);
      CHECK(std::abs(in.value - out.value) <= 1e-14 * (1 + delta * delta * delta));
      CHECK(std::abs(in.d1 - out.d1) <= 1e-14 * (1 + delta * delta));
      CHECK(std::abs(in.d2 - out.d2) <= 1e-14 * (1 + delta));
    }
}

TEST_CASE("cubic objective examples") {
  const Problem p = make_cubic_problem(5, 100.0);
  const Vector z = Vector::Zero(5);
  CHECK(p.value(z) == 0.0);
  Vector g_expected = Vector::Zero(5);
  g_expected[0] = -p.cubic_params().alpha_f * p.cubic_params().beta_f / 12.0;
  CHECK((p.gradient(z) - g_expected).norm() == doctest::Approx(0.0));

  const Problem q = Problem::cubic(3, CubicParams{12.0, 0.0, 1.0, 1.0});
  Vector x(3);
  x << 1.0, 0.0, 0.0;
  CHECK(q.value(x) == doctest::Approx(5.0 / 6.0).epsilon(1e-15));
  Vector gx(3);
  gx << 2.0, -1.0, 0.0;
  CHECK((q.gradient(x) - gx).norm() <= 1e-14);
}

TEST_CASE("quadratic objective examples") {
  const Problem p = make_quadratic_problem(2, {1.0, 4.0});
  Vector x = Vector::Ones(2);
  CHECK(p.value(x) == 2.5);
  CHECK(p.gradient(x) == Vector((Vector(2) << 1.0, 4.0).finished()));
  CHECK(p.hessian(x) == Matrix((Matrix(2, 2) << 1, 0, 0, 4).finished()));
  CHECK(p.kappa() == 4.0);
  CHECK(p.M() == 0.0);
  CHECK(p.x_star().isZero(0.0));
  CHECK(p.f_star() == 0.0);

  const Problem one = make_quadratic_problem(1, {1.0});
  CHECK(one.value(Vector::Constant(1, 3.0)) == 4.5);
  const Problem three = make_quadratic_problem(3, {1.0, 2.0, 8.0});
  CHECK(three.gradient(Vector::Ones(3)) == Vector((Vector(3) << 1, 2, 8).finished()));
}

TEST_CASE("make_cubic_problem constants") {
  const Problem p = make_cubic_problem(2, 2.0, 1.0, 1.0);
  CHECK(p.mu() == 1.0);
  CHECK(p.cubic_params().lambda == 1.0);
  CHECK(p.cubic_params().alpha_f == doctest::Approx(1.5));
  CHECK(p.L() == doctest::Approx(2.0));
  CHECK(p.M() == doctest::Approx(2.0));
  CHECK(make_cubic_problem(100, 100.0).cubic_params().alpha_f == doctest::Approx(148.5));
  const Problem flat = make_cubic_problem(4, 1.0 + 1e-12);
  CHECK(flat.cubic_params().alpha_f < 1e-11);
  CHECK_THROWS_AS(make_cubic_problem(4, 1.0), ConfigError);
  CHECK_THROWS_AS(make_cubic_problem(4, 0.5), ConfigError);
  CHECK_THROWS_AS(make_quadratic_problem(2, {1.0, 0.0}), ConfigError);
  CHECK_THROWS_AS(make_quadratic_problem(2, {1.0, -2.0}), ConfigError);
}

TEST_CASE("dimension mismatch is an input error") {
  const Problem p = make_cubic_problem(4, 10.0);
  CHECK_THROWS_AS(p.value(Vector::Zero(3)), InputError);
  CHECK_THROWS_AS(p.gradient(Vector::Zero(5)), InputError);
  CHECK_THROWS_AS(p.hessian(Vector::Zero(2)), InputError);
}

TEST_CASE("cubic value matches an explicit loop") {
  std::mt19937_64 rng(7);
  const Problem p = make_cubic_problem(9, 50.0, 0.7, 1.3);
  for (int k = 0; k < 20; ++k) {
    const Vector x = random_vector(rng, 9, 1.5);
    CHECK(p.value(x) == doctest::Approx(chain_value(p.cubic_params(), x)).epsilon(1e-13));
  }
}

TEST_CASE("gradient consistency at random points") {
  std::mt19937_64 rng(11);
  for (int d : {2, 10, 40}) {
    const Problem p = make_cubic_problem(d, 1000.0);
    for (int k = 0; k < 20; ++k) CHECK(finite_diff_grad_check(p, random_vector(rng, d, 1.0), 1e-6) <= 1e-5);
    CHECK(finite_diff_grad_check(p, p.x_star(), 1e-6) <= 1e-5);
  }
  const Problem q = make_quadratic_problem(2, {1.0, 4.0});
  CHECK(finite_diff_grad_check(q, Vector::Ones(2), 1e-6) <= 1e-8);
}

TEST_CASE("hessian is symmetric and matches gradient differences") {
  std::mt19937_64 rng(3);
  const Problem p = make_cubic_problem(12, 100.0);
  const double h = 1e-6;
  for (int k = 0; k < 5; ++k) {
    const Vector x = random_vector(rng, 12, 1.0);
    const Matrix H = p.hessian(x);
    CHECK((H - H.transpose()).cwiseAbs().maxCoeff() == 0.0);
    for (int j = 0; j < 12; ++j) {
      Vector e = Vector::Zero(12);
      e[j] = h;
      const Vector col = (p.gradient(x + e) - p.gradient(x - e)) / (2 * h);
      CHECK((col - H.col(j)).cwiseAbs().maxCoeff() <= 1e-5 * (1 + H.col(j).cwiseAbs().maxCoeff()));
    }
  }
}

TEST_CASE("eigenvalue sandwich at random points") {
  std::mt19937_64 rng(5);
  for (auto [d, kappa] : {std::pair{2, 2.0}, std::pair{20, 100.0}, std::pair{50, 1000.0}}) {
    const Problem p = make_cubic_problem(d, kappa);
    for (int k = 0; k < 100; ++k) {
      const Vector x = random_vector(rng, d, k % 2 ? 0.3 : 3.0);
      Eigen::SelfAdjointEigenSolver<Matrix> es(p.hessian(x), Eigen::EigenvaluesOnly);
      CHECK(es.eigenvalues().minCoeff() >= p.mu() - 1e-9);
      CHECK(es.eigenvalues().maxCoeff() <= p.L() + 1e-9);
    }
  }
}

TEST_CASE("hessian Lipschitz sample check") {
  std::mt19937_64 rng(9);
  for (double delta : {0.5, 1.0}) {
    const Problem p = make_cubic_problem(15, 300.0, delta);
    for (int k = 0; k < 100; ++k) {
      const Vector x = random_vector(rng, 15, 0.6);
      const Vector y = x + random_vector(rng, 15, k % 3 ? 0.05 : 0.8);
      Eigen::SelfAdjointEigenSolver<Matrix> es(p.hessian(x) - p.hessian(y), Eigen::EigenvaluesOnly);
      const double op = es.eigenvalues().cwiseAbs().maxCoeff();
      CHECK(op <= p.M() * (x - y).norm() + 1e-9);
    }
  }
}

TEST_CASE("reference solution") {
  const Problem q = make_quadratic_problem(3, {1.0, 2.0, 8.0});
  const auto rq = reference_solution(q, 1e-12);
  CHECK(rq.x.isZero(0.0));
  CHECK(rq.f == 0.0);
  CHECK(rq.newton_steps == 0);

  const Problem flat = make_cubic_problem(6, 50.0, 1.0, 0.0);
  CHECK(flat.x_star().norm() <= 1e-12);
  CHECK(flat.f_star() == doctest::Approx(0.0));

  const Problem p = Problem::cubic(2, CubicParams{12.0, 1.0, 1.0, 1.0});
  CHECK(p.gradient(p.x_star()).norm() <= 1e-12 * std::max(1.0, p.L()));
  const auto other = reference_solution(p, 1e-13, Vector::Constant(2, 5.0));
  CHECK((other.x - p.x_star()).norm() <= 1e-10);

  for (double kappa : {100.0, 1000.0}) {
    const Problem c = make_cubic_problem(100, kappa);
    CHECK(c.gradient(c.x_star()).norm() <= c.reference_tol());
    CHECK(c.f_star() < 0.0);
  }
}

TEST_CASE("reference solution is shared between copies") {
  const Problem p = make_cubic_problem(30, 100.0);
  const Problem copy = p;
  CHECK(&p.x_star() == &copy.x_star());
}
