#include <cmath>

#include "doctest.h"
#include "nls/core.hpp"
#include "nls/error.hpp"
#include "nls/functionals.hpp"
#include "nls/lab/threshold.hpp"

using namespace nls;

namespace {

const GroundState& Q1() {
  static const GroundState q = solve_1d_closed_form(PhysParams::make(1, 7.0), default_ground_state_grid(1));
  return q;
}

Field scaled(const Field& f, double a) {
  Field g = f;
  for (auto& z : g.values) z *= a;
  return g;
}

}  // namespace

TEST_CASE("functionals of Q") {
  const auto& Q = Q1();
  const auto r = evaluate(Q.profile, Q);
  CHECK(r.M == doctest::Approx(Q.mass).epsilon(1e-14));
  CHECK(r.E == doctest::Approx(Q.energy()).epsilon(1e-12));
  CHECK(std::abs(r.K) < 1e-6 * Q.grad_sq);
  CHECK(std::abs(r.mu) < 1e-12);
  CHECK(std::abs(r.P[0]) < 1e-14);
  CHECK(r.men_class == MenClass::ThresholdKzero);
  CHECK(is_threshold(r.men_class));
}

TEST_CASE("amplitude scaling gives the algebraic K") {
  const auto& Q = Q1();
  const double a = 1.1, p = 7.0;
  const auto r = evaluate(scaled(Q.profile, a), Q);
  const double expect = a * a * Q.grad_sq * (1 - std::pow(a, p - 1));
  CHECK(r.K < 0.0);
  CHECK(r.K == doctest::Approx(expect).epsilon(1e-6));
  // Negative energy puts the product M^{(1-sc)/sc} E below that of Q.
  CHECK(r.men_class == MenClass::Subthreshold);
}

TEST_CASE("zero field") {
  const auto& Q = Q1();
  const auto r = evaluate(Field(Q.params(), Q.grid()), Q);
  CHECK(r.M == 0.0);
  CHECK(r.E == 0.0);
  CHECK(r.K == 0.0);
  CHECK(r.gradL2sq == 0.0);
  CHECK(r.men_class == MenClass::Subthreshold);
}

TEST_CASE("critical exponent") {
  CHECK(sc(PhysParams::make(3, 3.0)) == doctest::Approx(0.5));
  CHECK(sc(PhysParams::make(1, 7.0)) == doctest::Approx(1.0 / 6.0));
  CHECK(sc(PhysParams::make(2, 5.0)) == doctest::Approx(0.5));
}

TEST_CASE("threshold products") {
  const auto& Q = Q1();
  const auto id = threshold_products(Q.profile, Q);
  CHECK(std::abs(id.me_ratio - 1) < 1e-8);
  CHECK(std::abs(id.grad_ratio - 1) < 1e-8);

  const Field u = lab::make_threshold_datum(Q, 1.2, -1);
  const auto t = threshold_products(u, Q);
  CHECK(std::abs(t.me_ratio - 1) < kTauMen);
  CHECK(t.grad_ratio > 1.0);

  CHECK(threshold_products(scaled(Q.profile, 0.5), Q).me_ratio < 1.0);
}

TEST_CASE("K-mu relation on the threshold level") {
  const auto& Q = Q1();
  const auto P = Q.params();
  CHECK(k_mu_relation_check(evaluate(Q.profile, Q), P) < 1e-6);
  const auto r = evaluate(lab::make_threshold_datum(Q, 1.2, -1), Q);
  REQUIRE(r.men_class == MenClass::ThresholdKneg);
  CHECK(k_mu_relation_check(r, P) < 1e-5);
  CHECK_THROWS_AS(k_mu_relation_check(evaluate(scaled(Q.profile, 0.5), Q), P), PreconditionError);
}

TEST_CASE("momentum of a boosted profile") {
  const auto& Q = Q1();
  const Field u = lab::make_scaled_datum(Q, 1.0, 0.3);
  const auto r = evaluate(u, Q);
  CHECK(r.P[0] == doctest::Approx(0.3 * Q.mass).epsilon(1e-10));
}

TEST_CASE("grid mismatch") {
  const auto& Q = Q1();
  CHECK_THROWS_AS(evaluate(Field(Q.params(), GridSpec::make(32.0, 512)), Q), GridMismatch);
}
