#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ckn/error.hpp"
#include "ckn/grid.hpp"
#include "ckn/measure.hpp"
#include "ckn/radial_math.hpp"
#include "oracles.hpp"

using namespace ckn;
using std::numbers::pi;

TEST_CASE("unit sphere area against the even/odd recursion") {
  for (int N = 2; N <= 12; ++N) CHECK(unit_sphere_area(N) == doctest::Approx(oracle::sphere_area(N)).epsilon(1e-13));
}

TEST_CASE("centered ball measures") {
  const auto m = ball_measure(validate(3, 0, 0), centered_ball(3, 1.0));
  CHECK(m.value == doctest::Approx(4.0 * pi / 3.0).epsilon(1e-14));
  CHECK(m.method == MeasureMethod::closed_form);
  // a = 0.5 sits on the admissible boundary for N = 3, so use the raw exponent.
  CHECK(ball_integral(-1.0, centered_ball(3, 1.0)).value == doctest::Approx(2.0 * pi).epsilon(1e-14));
  CHECK(ball_integral(-1.0, centered_ball(3, 1.0)).value ==
        doctest::Approx(oracle::radial_integral(3, [](double r) { return 1.0 / r; }, 1.0)).epsilon(1e-10));
}

TEST_CASE("off-center ball within the interval envelope") {
  const double r = 0.5;
  const double d = 2.0;
  const double vol = 4.0 * pi / 3.0 * r * r * r;
  const double v = ball_integral(-1.0, BallSpec{{d, 0.0, 0.0}, r}).value;
  CHECK(v >= vol / (d + r));
  CHECK(v <= vol / (d - r));
  CHECK(ball_integral(-1.0, BallSpec{{d, 0.0, 0.0}, r}).method == MeasureMethod::quadrature);
}

TEST_CASE("off-center shell quadrature against spherical coordinates about the center") {
  // The ball B_r(x0) in R^3 integrated in spherical coordinates about x0:
  // \int_0^r \int_{S^2} |x0 + t w|^e t^2 dw dt, with the angle integral done
  // in closed form: \int_{S^2} |x0 + t w|^e dw = 2 pi \int_{-1}^1 (d^2 + t^2 + 2 d t c)^{e/2} dc.
  for (double e : {-1.6, -0.8, 0.6}) {
    for (double d : {0.3, 1.0, 2.5}) {
      const double r = 0.8;
      const auto inner = [&](double t) {
        if (t == 0.0) return 0.0;
        const double k = e / 2.0 + 1.0;
        const double hi = std::pow((d + t) * (d + t), k);
        const double lo = std::pow((d - t) * (d - t), k);
        return 2.0 * pi * t * t * (hi - lo) / (2.0 * d * t * k);
      };
      double ref = 0.0;
      if (d < r) {
        ref = -oracle::integrate_graded(inner, d, 0.0, 60) + oracle::integrate_graded(inner, d, r, 60);
      } else {
        ref = oracle::integrate(inner, 0.0, r, 256);
      }
      const double v = ball_integral(e, BallSpec{{d, 0.0, 0.0}, r}).value;
      INFO("e=" << e << " d=" << d);
      CHECK(v == doctest::Approx(ref).epsilon(1e-8));
    }
  }
}

TEST_CASE("closed form agrees with the quadrature route on centered balls") {
  for (int N = 3; N <= 7; ++N) {
    for (double e : {-1.5, -0.5, 0.0, 1.0}) {
      for (double r : {0.1, 1.0, 7.5}) {
        const auto ball = centered_ball(N, r);
        const double closed = ball_integral(e, ball).value;
        const double quad = ball_integral_quadrature(e, ball).value;
        CHECK(std::abs(quad - closed) <= 1e-8 * closed);
      }
    }
  }
}

TEST_CASE("doubling ratios") {
  const std::vector<double> origin(3, 0.0);
  CHECK(doubling_ratio(validate(3, 0, 0), origin, 1.0, 0.5) == doctest::Approx(8.0).epsilon(1e-12));
  CHECK(doubling_ratio(validate(3, 0.25, 0.25), origin, 0.7, 0.5) ==
        doctest::Approx(std::pow(2.0, 2.5)).epsilon(1e-12));
  // a = 0.5 via raw exponents: 2^{N - 2a} = 4
  CHECK(ball_integral(-1.0, centered_ball(3, 1.0)).value / ball_integral(-1.0, centered_ball(3, 0.5)).value ==
        doctest::Approx(4.0).epsilon(1e-12));
  const double far = doubling_ratio(validate(3, 0.45, 0.45), std::vector<double>{50.0, 0.0, 0.0}, 1.0, 0.5);
  CHECK(far == doctest::Approx(8.0).epsilon(0.05));
  CHECK_THROWS_AS(doubling_ratio(validate(3, 0, 0), origin, 1.0, 1.0), Error);
}

TEST_CASE("property: doubling bounded, monotone in r, rotation invariant") {
  oracle::ParamGenerator gen(4242);
  for (int i = 0; i < 100; ++i) {
    const double a = gen.uniform(-1.0, 0.45);
    const WeightParams w = validate(3, a, a);
    const double tau = 0.5;
    const double d = gen.uniform(0.0, 1.5);
    const double r = gen.uniform(0.05, 1.0);
    const std::vector<double> c{d, 0.0, 0.0};
    const double ratio = doubling_ratio(w, c, r, tau);
    CHECK(ratio < 10.0 * std::pow(2.0, 3.0 - 2.0 * a) * 8.0);
    const double m1 = ball_measure(w, BallSpec{c, r}).value;
    const double m2 = ball_measure(w, BallSpec{c, r * 1.01}).value;
    CHECK(m2 > m1);
    const double s = d / std::sqrt(2.0);
    const double rotated = ball_measure(w, BallSpec{{s, 0.0, s}, r}).value;
    CHECK(rotated == doctest::Approx(m1).epsilon(1e-12));
  }
}

TEST_CASE("weighted mean on a radial grid") {
  const auto w = validate(3, 0, 0);
  const auto disc = make_discretization(w, RadialGrid::make(0.0, 1.0, 400));
  const auto ball = centered_ball(3, 1.0);
  CHECK(weighted_mean(DiscreteField::constant(disc, 2.5), ball) == doctest::Approx(2.5).epsilon(1e-14));
  const auto r2 = DiscreteField::sample_radial(disc, [](double r) { return r * r; });
  CHECK(weighted_mean(r2, ball) == doctest::Approx(0.6).epsilon(1e-4));
  CHECK_THROWS_AS(weighted_mean(r2, centered_ball(3, 1.5)), Error);
}

TEST_CASE("weighted mean of x1 over a centered box ball vanishes") {
  const auto w = validate(3, 0.3, 0.4);
  const auto disc = make_discretization(w, BoxGrid({-1, -1, -1}, {1, 1, 1}, {12, 12, 12}));
  const auto u = DiscreteField::sample(disc, [](const Point3& x) { return x[0]; });
  CHECK(std::abs(weighted_mean(u, BallSpec{{0, 0, 0}, 0.7})) < 1e-13);
}

TEST_CASE("lemma A1 ratio on centered balls is radius independent") {
  oracle::ParamGenerator gen(5);
  for (int i = 0; i < 50; ++i) {
    const auto d = gen.next();
    const WeightParams w = validate(d.N, d.a, d.b);
    const double eps = gen.uniform(0.05, 1.0);
    const double r0 = lemma_a1_check(w, centered_ball(d.N, 0.3), eps).ratio;
    const double r1 = lemma_a1_check(w, centered_ball(d.N, 2.7), eps).ratio;
    CHECK(r0 > 0.0);
    CHECK(r1 == doctest::Approx(r0).epsilon(1e-10));
  }
}

TEST_CASE("property: lemma A1 ratio under its envelope") {
  oracle::ParamGenerator gen(6);
  for (int i = 0; i < 200; ++i) {
    const auto d = gen.next();
    const WeightParams w = validate(d.N, d.a, d.b);
    const double eps = gen.uniform(0.05, 1.5);
    std::vector<double> c(static_cast<std::size_t>(d.N), 0.0);
    c[0] = gen.uniform(0.0, 3.0);
    const BallSpec ball{c, gen.uniform(0.01, 1.0)};
    const double ratio = lemma_a1_check(w, ball, eps).ratio;
    CHECK(ratio > 0.0);
    CHECK(ratio <= lemma_a1_envelope(w, ball, eps) * (1.0 + 1e-6));
  }
}

TEST_CASE("measure errors") {
  CHECK_THROWS_AS(ball_integral(0.0, BallSpec{{0, 0, 0}, 0.0}), Error);
  CHECK_THROWS_AS(ball_integral(-3.5, centered_ball(3, 1.0)), Error);
}
