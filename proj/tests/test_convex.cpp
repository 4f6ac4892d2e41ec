#include <cmath>
#include <random>

#include "cbdep/convex.hpp"
#include "cbdep/errors.hpp"
#include "doctest.h"
#include "support.hpp"

using cbdep::ConvexFunction;
using Failure = ConvexFunction::ValidationReport::Failure;

TEST_CASE("evaluation of built-in kinds") {
  CHECK(ConvexFunction::abs_pow(2)(-0.5) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(ConvexFunction::exp_signed(1)(0.0) == 0.0);
  CHECK(ConvexFunction::exp_abs(5)(0.2) ==
        doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-14));
  CHECK(ConvexFunction::abs_pow(1)(-1.0) == 1.0);
}

TEST_CASE("unit domain is enforced") {
  const auto f = ConvexFunction::abs_pow(2);
  CHECK_THROWS_AS(f(1.5), std::domain_error);
  CHECK_NOTHROW(f(1.0));
  CHECK_NOTHROW(ConvexFunction::abs_pow(2, ConvexFunction::Domain::Unbounded)(7.5));
}

TEST_CASE("descriptor parsing") {
  const auto f = ConvexFunction::parse("abs^p:2");
  CHECK(f.kind() == ConvexFunction::Kind::AbsPow);
  CHECK(f.param() == 2.0);
  CHECK(f.descriptor() == "abs^p:2");
  CHECK(ConvexFunction::parse("expsgn:0.2").param() == doctest::Approx(0.2));
  CHECK(ConvexFunction::parse("expabs:5").descriptor() == "expabs:5");
  CHECK_THROWS_AS(ConvexFunction::parse("abs^p:0.5"), cbdep::InputError);
  CHECK_THROWS_AS(ConvexFunction::parse("expsgn:0"), cbdep::InputError);
  CHECK_THROWS_AS(ConvexFunction::parse("huber:1"), cbdep::InputError);
  CHECK_THROWS_AS(ConvexFunction::parse("abs^p"), cbdep::InputError);
}

TEST_CASE("validation accepts the simulation grid") {
  for (const auto& f : cbdep_test::builtin_grid()) {
    const auto report = f.validate();
    CHECK_MESSAGE(report.ok(), f.descriptor(), ": ", report.message());
  }
  // Affine away from zero is fine as long as the kink at 0 is there.
  CHECK(ConvexFunction::abs_pow(1).validate().ok());
}

TEST_CASE("validation failure modes") {
  const auto linear = ConvexFunction::custom("linear", [](double x) { return x; });
  CHECK(linear.validate().failure == Failure::NotStrictlyConvexAtZero);

  const auto concave = ConvexFunction::custom("neg-square", [](double x) { return -x * x; });
  const auto report = concave.validate();
  CHECK(report.failure == Failure::NotConvex);
  // Witness triple really violates midpoint convexity.
  const double lhs = -report.witness[1] * report.witness[1];
  const double rhs =
      0.5 * (-report.witness[0] * report.witness[0] - report.witness[2] * report.witness[2]);
  CHECK(lhs > rhs);

  const auto shifted = ConvexFunction::custom("shifted", [](double x) { return x * x + 0.5; });
  CHECK(shifted.validate().failure == Failure::NotZeroAtZero);

  CHECK_THROWS_AS(linear.require_valid(), cbdep::HypothesisError);
}

TEST_CASE("segment integrals: frozen anchors") {
  // Two triangles of area 1/4 each.
  CHECK(ConvexFunction::abs_pow(1).segment_integral(-1.0, 1.0) ==
        doctest::Approx(0.5).epsilon(1e-14));
  // integral of t^2.
  CHECK(ConvexFunction::abs_pow(2).segment_integral(0.0, 1.0) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  // integral of (e^t - 1) = e - 2; cross-checked against quadrature below
  // before freezing the constant.
  const auto expsgn = ConvexFunction::exp_signed(1);
  const double closed = expsgn.segment_integral(0.0, 1.0);
  CHECK(closed == doctest::Approx(cbdep_test::gl64_segment(expsgn, 0.0, 1.0)).epsilon(1e-13));
  CHECK(closed == doctest::Approx(std::exp(1.0) - 2.0).epsilon(1e-14));
}

TEST_CASE("segment integrals: degenerate and reversed paths") {
  std::mt19937_64 gen(42);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (const auto& f : cbdep_test::builtin_grid()) {
    for (int trial = 0; trial < 100; ++trial) {
      const double d = unif(gen);
      CHECK(f.segment_integral(d, d) == doctest::Approx(f(d)).epsilon(1e-13));
      const double d0 = unif(gen), d1 = unif(gen);
      CHECK(f.segment_integral(d0, d1) ==
            doctest::Approx(f.segment_integral(d1, d0)).epsilon(1e-13));
    }
  }
}

TEST_CASE("closed forms agree with order-64 quadrature") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (const auto& f : cbdep_test::builtin_grid()) {
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
      const double d0 = unif(gen), d1 = unif(gen);
      worst = std::max(worst,
                       std::abs(f.segment_integral(d0, d1) - cbdep_test::gl64_segment(f, d0, d1)));
    }
    CHECK_MESSAGE(worst < 1e-12, f.descriptor(), " worst deviation ", worst);
  }

  // Fractional exponents: |x|^1.7 has an algebraic singularity at the kink,
  // which the quadrature reference resolves only to ~1e-11; the closed form
  // is the more accurate side here.
  const auto frac = ConvexFunction::abs_pow(1.7);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const double d0 = unif(gen), d1 = unif(gen);
    worst = std::max(worst,
                     std::abs(frac.segment_integral(d0, d1) - cbdep_test::gl64_segment(frac, d0, d1)));
  }
  CHECK_MESSAGE(worst < 5e-11, "abs^p:1.7 worst deviation ", worst);
}

TEST_CASE("segment integral is decreasing in the abs^p exponent") {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const double ps[] = {1.0, 1.5, 2.0, 3.0};
  for (int trial = 0; trial < 200; ++trial) {
    const double d0 = unif(gen), d1 = unif(gen);
    double prev = ConvexFunction::abs_pow(ps[0]).segment_integral(d0, d1);
    for (int k = 1; k < 4; ++k) {
      const double cur = ConvexFunction::abs_pow(ps[k]).segment_integral(d0, d1);
      CHECK(cur <= prev + 1e-13);
      prev = cur;
    }
  }
}

TEST_CASE("custom evaluators integrate through quadrature") {
  const auto quartic = ConvexFunction::custom("x^4", [](double x) { return x * x * x * x; });
  // Order 16 is exact for polynomials on each smooth piece.
  CHECK(quartic.segment_integral(0.0, 1.0) == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(quartic.segment_integral(-1.0, 1.0) == doctest::Approx(0.2).epsilon(1e-14));
  const auto vee = ConvexFunction::custom("abs", [](double x) { return std::abs(x); });
  CHECK(vee.segment_integral(-1.0, 1.0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(vee.segment_integral(-0.3, 0.7) ==
        doctest::Approx(ConvexFunction::abs_pow(1).segment_integral(-0.3, 0.7)).epsilon(1e-14));
}
