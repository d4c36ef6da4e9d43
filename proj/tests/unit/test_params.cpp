#include <doctest.h>

#include <cmath>

#include "ckn/error.hpp"
#include "ckn/params.hpp"
#include "oracles.hpp"

using namespace ckn;

namespace {

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected ckn::Error");
  return Errc::invalid_argument;
}

}  // namespace

TEST_CASE("critical exponent examples") {
  CHECK(validate(3, 0.0, 0.0).p() == doctest::Approx(6.0).epsilon(1e-15));
  CHECK(validate(4, 0.5, 0.75, 4.0).p() == doctest::Approx(3.2).epsilon(1e-15));
  CHECK(critical_exponent(5, 0.0, 0.0) == doctest::Approx(10.0 / 3.0));
}

TEST_CASE("validate rejects out-of-range tuples") {
  CHECK(code_of([] { validate(2, 0.0, 0.0); }) == Errc::dimension_too_small);
  CHECK(code_of([] { validate(3, 0.5, 0.5); }) == Errc::a_out_of_range);
  CHECK(code_of([] { validate(3, 0.0, -0.1); }) == Errc::b_out_of_range);
  CHECK(code_of([] { validate(3, 0.0, 1.2); }) == Errc::b_out_of_range);
  // s exactly p/(p-2) = 1.5 for p = 6
  CHECK(code_of([] { validate(3, 0.0, 0.0, 1.5, Mode::holder); }) == Errc::s_too_small);
  CHECK_NOTHROW(validate(3, 0.0, 0.0, 1.5000001, Mode::holder));
}

TEST_CASE("b = a + 1 is admissible in general mode only") {
  const WeightParams w = validate(3, 0.0, 1.0);
  CHECK(w.p() == doctest::Approx(2.0));
  CHECK_FALSE(w.strict_b());
  CHECK(code_of([] { validate(3, 0.0, 1.0, kInfinity, Mode::holder); }) == Errc::b_out_of_range);
}

TEST_CASE("epsilon choice") {
  CHECK(epsilon_choice(validate(3, 0, 0)) == doctest::Approx(4.0 / 3.0));
  CHECK(epsilon_choice(validate(3, 0, 0, 3.0)) == doctest::Approx(2.0 / 3.0));
  CHECK(code_of([] { epsilon_choice(validate(3, 0, 0, 1.5)); }) == Errc::s_too_small);
}

TEST_CASE("holder bound examples") {
  const HolderBound tie = holder_bound(validate(3, 0, 0, 3.0), 1.0);
  CHECK(tie.alpha_sup == doctest::Approx(1.0));
  CHECK(tie.limiting_branch == LimitingBranch::unit);

  const HolderBound small = holder_bound(validate(3, 0, 0, 1.6), 1.0);
  CHECK(small.alpha_sup == doctest::Approx(0.125));
  CHECK(small.limiting_branch == LimitingBranch::integrability_b_nonneg);

  const WeightParams neg = validate(3, -0.5, -0.2);
  CHECK(neg.p() == doctest::Approx(3.75));
  const HolderBound h = holder_bound(neg, 0.5);
  CHECK(h.alpha_sup == doctest::Approx(0.5));
  CHECK(h.limiting_branch == LimitingBranch::harmonic_exponent);
  // B = (N/p)(p - 2) = 1.4 on the b < 0 branch
  CHECK(holder_bound(neg, 1.0).limiting_branch == LimitingBranch::unit);
  CHECK(holder_bound(validate(3, -0.5, -0.2, 3.0), 1.0).alpha_sup ==
        doctest::Approx(3.0 / 3.75 * (3.75 - 2.0 - 1.25)));

  CHECK(code_of([] { holder_bound(validate(3, 0, 0), 0.0); }) == Errc::invalid_alpha_h);
  CHECK(code_of([] { holder_bound(validate(3, 0, 0), 1.5); }) == Errc::invalid_alpha_h);
}

TEST_CASE("moser ladder and k0") {
  CHECK(moser_ladder(6.0, 2) == std::vector<double>{6.0, 18.0, 54.0});
  CHECK(moser_ladder(4.0, 1) == std::vector<double>{4.0, 8.0});
  CHECK(moser_ladder(5.0, 0) == std::vector<double>{5.0});
  CHECK(k0_threshold(6.0) == 1);
  CHECK(k0_threshold(4.0) == 2);
  CHECK(k0_threshold(2.5) == 9);
}

TEST_CASE("property: exponent identity and ranges over random tuples") {
  oracle::ParamGenerator gen(0xC0FFEE);
  for (int i = 0; i < 10000; ++i) {
    const auto d = gen.next();
    const WeightParams w = validate(d.N, d.a, d.b);
    const double p = w.p();
    INFO("N=" << d.N << " a=" << d.a << " b=" << d.b);
    REQUIRE(p > 2.0);
    REQUIRE(p <= 2.0 * d.N / (d.N - 2) * (1.0 + 1e-15));
    const double lhs = (d.N - w.bp()) * (2.0 / p);
    REQUIRE(std::abs(lhs - (d.N - 2.0 - 2.0 * d.a)) <= 1e-12 * std::max(1.0, std::abs(lhs)));
  }
}

TEST_CASE("property: ladder increasing, q_k = p^{k+1}/2^k, k0 is minimal") {
  oracle::ParamGenerator gen(17);
  for (int i = 0; i < 500; ++i) {
    const auto d = gen.next();
    const WeightParams w = validate(d.N, d.a, d.b);
    const auto q = moser_ladder(w, 6);
    double expect = w.p();
    for (std::size_t k = 0; k < q.size(); ++k) {
      CHECK(q[k] == doctest::Approx(expect).epsilon(1e-14));
      if (k > 0) CHECK(q[k] > q[k - 1]);
      expect *= w.p() / 2.0;
    }
    // brute force
    const double target = 2.0 * (w.p() - 1.0) / (w.p() - 2.0);
    int k = 0;
    while (std::pow(w.p() / 2.0, k) < target) ++k;
    CHECK(k0_threshold(w) == k);
  }
}

TEST_CASE("property: holder bound nondecreasing in s") {
  oracle::ParamGenerator gen(99);
  for (int i = 0; i < 300; ++i) {
    const auto d = gen.next();
    const WeightParams w = validate(d.N, d.a, d.b);
    const double s_min = w.p() / (w.p() - 2.0);
    const double alpha_h = gen.uniform(0.05, 1.0);
    double prev = 0.0;
    for (double f : {1.01, 1.5, 2.0, 5.0, 50.0}) {
      const double s = s_min * f;
      const double bound = holder_bound(w.with_s(s, Mode::holder), alpha_h).alpha_sup;
      CHECK(bound > 0.0);
      CHECK(bound <= 1.0);
      CHECK(bound >= prev);
      prev = bound;
    }
    CHECK(holder_bound(w.with_s(kInfinity, Mode::holder), alpha_h).alpha_sup >= prev);
  }
}
