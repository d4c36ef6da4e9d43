#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ckn/error.hpp"
#include "ckn/fields.hpp"
#include "ckn/moser.hpp"
#include "ckn/radial_math.hpp"
#include "ckn/solver.hpp"
#include "oracles.hpp"

using namespace ckn;

namespace {

std::shared_ptr<const Discretization> ball_grid(const WeightParams& w, int n, double R = 1.0) {
  return make_discretization(w, RadialGrid::make(0.0, R, n));
}

}  // namespace

TEST_CASE("smallness check: trivial potentials") {
  const WeightParams w = validate(3, 0, 0);
  const auto disc = ball_grid(w, 64);
  for (double ell : {1e-3, 0.5, 10.0}) {
    const PotentialSplit s = smallness_check(DiscreteField::constant(disc, 0.0), ell, 2.0);
    CHECK(s.tail_mass == 0.0);
    CHECK(s.satisfied);
  }
  // supported in B_0.5, sup < 0.7
  const auto V = DiscreteField::sample_radial(disc, [](double r) { return r < 0.5 ? 0.6 : 0.0; });
  CHECK(smallness_check(V, 0.7, 2.0).tail_mass == 0.0);
  CHECK(smallness_check(V, 0.3, 2.0).tail_mass > 0.0);
  CHECK_THROWS_AS(smallness_check(V, 0.0, 2.0), Error);
  CHECK_THROWS_AS(smallness_check(V, -1.0, 2.0), Error);
}

TEST_CASE("smallness bound uses the stated formula") {
  const WeightParams w = validate(3, 0, 0);  // p = 6, p/(p-2) = 1.5
  const auto disc = ball_grid(w, 16);
  const PotentialSplit s = smallness_check(DiscreteField::constant(disc, 0.0), 1.0, 4.0);
  CHECK(s.q == 6.0);
  CHECK(s.bound_required == doctest::Approx(std::pow(0.125 / 4.0, 1.5)).epsilon(1e-14));
  const PotentialSplit s20 = smallness_check(DiscreteField::constant(disc, 0.0), 1.0, 4.0, 20.0);
  CHECK(s20.bound_required == doctest::Approx(std::pow(2.0 / 24.0 / 4.0, 1.5)).epsilon(1e-14));
}

TEST_CASE("smallness tail mass of V = K|u|^{p-2} against radial quadrature") {
  const WeightParams w = validate(3, 0.3, 0.4);
  const double p = w.p();
  const double e = p / (p - 2.0);
  const ConstantKSolution sol = constant_k_solution(w);
  const auto Vf = [&](double r) { return sol.K * std::pow(sol.u(r), p - 2.0); };
  const auto disc = ball_grid(w, 4096);
  const auto V = DiscreteField::sample_radial(disc, Vf);
  const double bp = w.bp();
  // r^{N-1} |x|^{-bp} |V|^{p/(p-2)}
  const auto density = [&](double r) { return std::pow(r, 2.0 - bp) * std::pow(Vf(r), e); };
  for (double ell : {0.25, 0.6}) {
    // |V| >= ell on [0, r_ell] (V decreasing), |x| >= ell on [ell, 1].
    double r_ell = 0.0;
    if (Vf(0.0) >= ell) {
      double lo = 0.0, hi = 1.0;
      if (Vf(1.0) >= ell) lo = hi = 1.0;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (Vf(mid) >= ell ? lo : hi) = mid;
      }
      r_ell = lo;
    }
    const double sigma = oracle::sphere_area(3);
    const auto piece = [&](double lo, double hi) {
      return lo < hi ? sigma * oracle::integrate_graded(density, lo, hi) : 0.0;
    };
    const double exact = piece(0.0, r_ell) + piece(ell, 1.0);
    CHECK(smallness_check(V, ell, 1.0).tail_mass == doctest::Approx(exact).epsilon(0.01));
  }
}

TEST_CASE("tail mass is nonincreasing in ell") {
  const WeightParams w = validate(3, 0.2, 0.3);
  const auto disc = ball_grid(w, 256, 2.0);
  const auto V = DiscreteField::sample_radial(disc, [](double r) { return 3.0 * std::exp(-r); });
  double prev = kInfinity;
  for (int k = 0; k < 20; ++k) {
    const double t = smallness_check(V, std::ldexp(1e-3, k), 1.0).tail_mass;
    CHECK(t <= prev);
    prev = t;
  }
}

TEST_CASE("find_ell examples") {
  const WeightParams w = validate(3, 0, 0);
  const auto disc = ball_grid(w, 128);
  CHECK(find_ell(DiscreteField::constant(disc, 0.0), 1.0) == doctest::Approx(1e-3));
  // Mass far above the bound at every ell on the search grid.
  CHECK_FALSE(find_ell(DiscreteField::constant(disc, 1e30), 1.0).has_value());
  const auto V = DiscreteField::sample_radial(disc, [](double r) { return 0.05 * (1.0 - r); });
  const auto ell1 = find_ell(V, 1.0);
  const auto ell2 = find_ell(V.scaled(4.0), 1.0);
  REQUIRE(ell1.has_value());
  CHECK((!ell2.has_value() || *ell2 >= *ell1));
}

TEST_CASE("lemma_a2_constant examples") {
  CHECK(lemma_a2_constant(4.0, 1.0, 0.5, 3.0, 2.5).tau == doctest::Approx(0.5));
  CHECK(lemma_a2_constant(1.0, 1.0, 0.5, 3.0, 1.0).tau == 0.5);
  CHECK(lemma_a2_constant(100.0, 1.0, 0.5, 3.0, 1.5).tau == doctest::Approx(0.01));
  const IterationEnvelope e = lemma_a2_constant(100.0, 1.0, 0.5, 3.0, 1.5, 8.0);
  CHECK(e.constant == doctest::Approx(512.0 / (0.01 * (1.0 - std::pow(0.01, 1.5)))));
  CHECK_THROWS_AS(lemma_a2_constant(1.0, 1.0, 2.0, 3.0, 1.0), Error);
  CHECK_THROWS_AS(lemma_a2_constant(1.0, 1.0, 0.5, 1.0, 2.0), Error);
  CHECK_THROWS_AS(lemma_a2_constant(1.0, 1.0, 0.0, 3.0, 2.0), Error);
}

TEST_CASE("random envelopes stay in range") {
  Rng rng(42);
  for (int i = 0; i < 200; ++i) {
    const IterationEnvelope e = random_envelope(rng);
    CHECK(e.alpha > 0.1);
    CHECK(e.alpha < e.gamma);
    CHECK(e.gamma < e.beta);
    CHECK(e.beta < 4.0);
    CHECK(e.tau <= 0.5);
    CHECK(e.tau >= 1e-4);
    CHECK(std::isfinite(e.constant));
  }
}

TEST_CASE("conclusion holds for the power profile by direct substitution") {
  // Phi(rho) = mu(B_rho) rho^{-alpha} satisfies the hypothesis with A1 = 1 and any A2 > 0;
  // the conclusion then holds with constant >= 1 since (rho/r)^{gamma - alpha} <= 1.
  const WeightParams w = validate(3, 0.3, 0.4);
  const double alpha = 0.7, beta = 3.0, gamma = 1.5, A2 = 0.1;
  const IterationEnvelope env = lemma_a2_constant(1.0, A2, alpha, beta, gamma, std::pow(2.0, 3.0 - 0.6));
  const auto mu = [&](double r) { return centered_ball_integral(3, w.energy_exponent(), r); };
  const auto phi = [&](double r) { return mu(r) * std::pow(r, -alpha); };
  for (double r : {1.0, 0.5, 0.1}) {
    for (double t : {1.0, 0.7, 0.3, 0.01}) {
      const double rho = t * r;
      const double hyp = mu(rho) / mu(r) * std::pow(rho / r, -alpha) * phi(r) + A2 * mu(r) * std::pow(r, -beta);
      CHECK(phi(rho) <= hyp * (1 + 1e-12));
      const double concl =
          env.constant * (mu(rho) / mu(r) * std::pow(rho / r, -gamma) * phi(r) + A2 * mu(rho) * std::pow(rho, -beta));
      CHECK(phi(rho) <= concl);
    }
  }
}

TEST_CASE("lemma A.2 property check") {
  Rng rng(5);
  const IterationEnvelope env = random_envelope(rng);
  for (double offset : {0.0, 0.5}) {
    const MeasureFamily fam{validate(3, 0.3, 0.4), offset};
    const LemmaA2Report r = lemma_a2_property_check(env, fam, 1.0, 40, 17);
    CHECK(r.pass());
    CHECK(r.trials == 40);
    CHECK(r.records.size() == 40);
    CHECK(r.envelope.doubling >= 1.0);
    for (const auto& rec : r.records) CHECK(rec.pairs == kLemmaA2PairsPerTrial);
    const LemmaA2Report again = lemma_a2_property_check(env, fam, 1.0, 40, 17);
    CHECK(again.max_ratio == r.max_ratio);
    std::ostringstream a, b;
    write_trials_csv(a, r.records);
    write_trials_csv(b, again.records);
    CHECK(a.str() == b.str());
  }
  const LemmaA2Report none = lemma_a2_property_check(env, {validate(3, 0, 0), 0.0}, 1.0, 0, 1);
  CHECK(none.pass());
}

TEST_CASE("integrability ladder on the constant-K solution") {
  const WeightParams w = validate(3, 0, 0);
  const ConstantKSolution s = constant_k_solution(w);
  const auto disc = ball_grid(w, 1024);
  const auto u = DiscreteField::sample_radial(disc, [&](double r) { return s.u(r); });
  const auto K = DiscreteField::constant(disc, s.K);
  const int k0 = k0_threshold(w);
  CHECK(k0 == 1);
  const LadderReport rep = run_ladder(u, K, k0 + 2, 0.2);
  REQUIRE(rep.states.size() == static_cast<std::size_t>(k0 + 3));
  const auto qs = moser_ladder(w, k0 + 2);
  for (std::size_t k = 0; k < qs.size(); ++k) CHECK(rep.states[k].q == qs[k]);
  CHECK(rep.all_finite);
  CHECK(rep.interpolation_ok);
  CHECK(rep.relative_residual < 1e-3);
  for (std::size_t k = 1; k < rep.states.size(); ++k) CHECK(rep.states[k].margin > rep.states[k - 1].margin);
  // One norm by 1D quadrature: the subdomain is B_{1 - margin}(0).
  const LadderState& st = rep.states[0];
  const double q = st.q;
  const double exact = std::pow(
      oracle::radial_integral(3, [&](double r) { return std::pow(s.u(r), q); }, 1.0 - st.margin), 1.0 / q);
  CHECK(st.norm_q == doctest::Approx(exact).epsilon(0.01));
  CHECK_THROWS_AS(run_ladder(u, K, k0 - 1, 0.2), Error);
  CHECK_THROWS_AS(run_ladder(u.scaled(1.1), K, k0 + 2, 0.2), Error);
}

TEST_CASE("ladder with K = 0 on a discrete harmonic field") {
  const WeightParams w = validate(3, 0.2, 0.3);
  const auto disc = make_discretization(w, RadialGrid::make(0.2, 1.0, 128));
  const auto data = DiscreteField::sample_radial(disc, [](double r) { return 1.0 + 1.0 / r; });
  const Solution sol = solve(assemble(DiscreteField::constant(disc, 0.0), data), 1e-13);
  const LadderReport rep = run_ladder(sol.u, DiscreteField::constant(disc, 0.0), k0_threshold(w) + 2, 0.2);
  CHECK(rep.all_finite);
  CHECK(rep.interpolation_ok);
}
