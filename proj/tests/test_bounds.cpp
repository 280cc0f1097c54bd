#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qnlab/analysis.hpp"

using namespace qnlab;

namespace {

// Independent transcription of the constants at alpha = 1/4, beta = 3/4.
struct Ref {
  double d1 = 1.0 / 6, d2 = 7.0 / 8, d3 = 2.0, d4, d5, d6 = std::log(8.0), d7, d8;
  Ref() {
    auto w = [](double x) { return x - std::log(1 + x); };
    d4 = 1 / std::min(w(d2 - 1), w(d3 - 1));
    d5 = std::max(2 + 2 / d2, 4 * d3) / (2 * d2 - 1 - d1);
    d7 = 1 + d4 * d6 + d5;
    d8 = 1 + 2 * d7 + (2 * d2 - d1 - std::log(d2)) / (2 * d2 - 1 - d1);
  }
};

constexpr double A = 0.25, B = 0.75, AB = A * (1 - B);

}  // namespace

TEST_CASE("linear envelopes") {
  for (int t : {1, 5, 40}) {
    CHECK(bound_thm1(t, 0.0, 50.0, A, B) == doctest::Approx(std::pow(1 - 2 * AB / 50.0, t)));
    CHECK(bound_thm1(t, 0.0, 50.0, A, B) == doctest::Approx(bound_cor1_L(t, 50.0, A, B)));
    CHECK(bound_cor1_mu(t, 50.0, A, B) == doctest::Approx(std::pow(1 - 2 * AB / 150.0, t)));
    CHECK(bound_thm2(t, A, B) == doctest::Approx(std::pow(1 - 2 * AB / 3, t)));
  }
  // kappa = 1 and alpha(1-beta) = 1/2 collapse the one-step factor to zero.
  CHECK(bound_thm1(1, 0.0, 1.0, 1.0, 0.5) == doctest::Approx(0.0));
  // A positive potential only loosens the envelope.
  CHECK(bound_thm1(10, 3.0, 50.0, A, B) > bound_thm1(10, 0.0, 50.0, A, B));
  CHECK(bound_thm1(10, 3.0, 50.0, A, B) ==
        doctest::Approx(std::pow(1 - std::exp(-0.3) * 2 * AB / 50.0, 10)));
  CHECK(bound_prop_second_linear(4, 1.0, 2.0, A, B) ==
        doctest::Approx(std::pow(1 - 2 * AB * std::exp(-7.0 / 4), 4)));
}

TEST_CASE("second linear phase thresholds") {
  const int d = 100;
  const double k = 100.0, c0 = 1.0;
  CHECK(thm2_threshold(2.0, 3.0, c0, k, A, B) == doctest::Approx(2 + 9 + 9 / AB * 100));
  CHECK(cor2_threshold_L(d, k, c0, A, B) == doctest::Approx(d * k + 9 / AB * c0 * k));
  CHECK(cor2_threshold_mu(d, k, c0, A, B) ==
        doctest::Approx(4 * d * std::log(k) + 9 / AB * c0 * k));
}

TEST_CASE("superlinear constant for mu I at d = 100, kappa = 100") {
  const Ref r;
  const int d = 100;
  const double k = 100.0, c0 = 1.0;
  const double tail = 3 / AB * (r.d6 * std::log(c0 / r.d1) + r.d8 * c0) * k;
  const double expect = (r.d6 + r.d7 + r.d8 * c0) * d * std::log(k) + tail;
  CHECK(cor3_K_mu(d, k, c0, A, B) == doctest::Approx(expect).epsilon(1e-12));
  CHECK(cor3_K_L(d, k, c0, A, B) == doctest::Approx(r.d7 * d * k + tail).epsilon(1e-12));
  // Specialising the general constant with the mu I potentials.
  const double bar = d * (1 / k - 1 + std::log(k));
  const auto s = thm3_constants(d * std::log(k), bar, c0, k, A, B);
  CHECK(s.K == doctest::Approx(r.d7 * d * std::log(k) + (r.d6 + r.d8 * c0) * bar + tail).epsilon(1e-12));
  CHECK(s.K <= cor3_K_mu(d, k, c0, A, B));
  CHECK(s.t0 == doctest::Approx(std::max(bar, 3 * k / AB * std::log(6.0))));
  // Below the threshold the clamp removes the log term.
  CHECK(ct_threshold(5.0, 0.1, k, A, B) == doctest::Approx(5.0));
  CHECK(bound_thm3(10, 5.0) == doctest::Approx(std::pow(0.5, 10)));
}

TEST_CASE("bad rho cap") {
  const Ref r;
  CHECK(bad_rho_bound(1.0, 2.0, 0.5, 10.0, A, B) ==
        doctest::Approx(r.d4 * (1 + 2 + 6 * 0.5 * 10 / AB)).epsilon(1e-12));
}

TEST_CASE("loop bounds") {
  // At C_t = 0, rho = 1: 2 + log2(1 + 1/2) + 2 log2(1 + log2(3/2)).
  CHECK(bound_loops(0.0, 1.0, A, B) ==
        doctest::Approx(2 + std::log2(1.5) + 2 * std::log2(1 + std::log2(1.5))));
  CHECK(bound_loops(0.0, 8.0, A, B) > bound_loops(0.0, 1.0, A, B));
  CHECK(bound_loops(0.0, 1.0 / 8, A, B) == doctest::Approx(bound_loops(0.0, 8.0, A, B)));
  CHECK(bound_loops(1.0, 1.0, A, B) > bound_loops(0.0, 1.0, A, B));
  CHECK(lambda_sigma(2.0, 10.0, 0.5, A, B) == doctest::Approx((2 + 3 / AB * 10) * 0.5));
}

TEST_CASE("average loop envelope limit") {
  const double limit = 2 + std::log2(1.5) + 2 * std::log2(std::log2(12.0));
  CHECK(limit == doctest::Approx(6.27).epsilon(1e-3));
  CHECK(bound_linesearch_lambda(1000000000, 0.0, 0.0, A, B) == doctest::Approx(limit).epsilon(1e-9));
  CHECK(bound_linesearch_lambda(100, 5.0, 1.0, A, B) > limit);
  CHECK(bound_linesearch_lambda(10, 5.0, 1.0, A, B) > bound_linesearch_lambda(100, 5.0, 1.0, A, B));
}

TEST_CASE("complexity report branches") {
  const int d = 100;
  const double k = 100.0, c0 = 1.0, eps = 1e-10;
  const double lg = std::log(1e10);
  auto sup = [lg](double w) { return lg / std::log(0.5 + std::sqrt(0.25 + lg / w)); };

  const auto li = complexity_report(d, k, c0, eps, InitKind::L_identity);
  CHECK(li.linear == doctest::Approx(k * lg));
  CHECK(li.linear_free == doctest::Approx(101 * k + lg));
  CHECK(li.superlinear == doctest::Approx(sup(d * k + c0 * k)));
  CHECK(li.argmin == 0);
  CHECK(std::string(li.label()) == "linear");

  const auto mi = complexity_report(d, k, c0, eps, InitKind::mu_identity);
  const double w = d * std::log(k);
  CHECK(mi.linear == doctest::Approx(w + k * lg));
  CHECK(mi.linear_free == doctest::Approx(c0 * (w + k) + lg));
  CHECK(mi.superlinear == doctest::Approx(sup(c0 * (w + k))));
  CHECK(mi.linear_free < mi.superlinear);
  CHECK(mi.argmin == 1);

  const auto ci = complexity_report(d, k, c0, eps, InitKind::c_identity, 10.0, 1.0, k);
  const double bar = d * (0.1 - 1 + std::log(10.0)), tilde = d * (10.0 - 1 + std::log(10.0));
  CHECK(ci.linear == doctest::Approx(bar + k * lg));
  CHECK(ci.linear_free == doctest::Approx(tilde + c0 * bar + c0 * k + lg));
  CHECK(ci.superlinear == doctest::Approx(sup(tilde + c0 * bar + c0 * k)));

  // c = mu reproduces the mu I potentials.
  const auto id = complexity_report(d, k, c0, eps, InitKind::identity, 0.0, 1.0, k);
  CHECK(id.linear == doctest::Approx(d * (1 / k - 1 + std::log(k)) + k * lg));

  CHECK_THROWS_AS(complexity_report(d, k, c0, 0.0, InitKind::L_identity), ConfigError);
  CHECK_THROWS_AS(complexity_report(d, k, c0, eps, InitKind::custom), ConfigError);
  CHECK_THROWS_AS(complexity_report(d, k, c0, eps, InitKind::c_identity, 500.0, 1.0, k), ConfigError);
}
