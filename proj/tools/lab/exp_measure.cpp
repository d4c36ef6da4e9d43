#include <cmath>
#include <numbers>

#include "ckn/error.hpp"
#include "ckn/format.hpp"
#include "ckn/measure.hpp"
#include "ckn/radial_math.hpp"
#include "ckn/rng.hpp"
#include "experiments.hpp"

namespace lab {

using ckn::format_double;

Outcome run_measure_identities(const Config& cfg, Reporter& rep, const RunOptions&) {
  const double tol = cfg.get_double("measure.tol", ckn::kDefaultMeasureTol);
  const double quad_rel = cfg.get_double("check.quadrature_rel", 1e-8);
  const double doubling_rel = cfg.get_double("check.doubling_rel", 1e-10);
  cfg.check_unused();

  auto out = rep.open("measure_report.csv");
  out << "check,N,a,radius,offset,value,reference,rel_error,pass\n";
  int failures = 0;
  int rows = 0;
  auto row = [&](const char* check, int N, double a, double r, double offset, double value, double ref,
                 double rel_tol) {
    const double rel = std::abs(value - ref) / std::abs(ref);
    const bool ok = rel <= rel_tol;
    failures += ok ? 0 : 1;
    ++rows;
    out << check << ',' << N << ',' << format_double(a) << ',' << format_double(r) << ',' << format_double(offset)
        << ',' << format_double(value) << ',' << format_double(ref) << ',' << format_double(rel) << ','
        << (ok ? 1 : 0) << '\n';
  };

  for (int N = 3; N <= 7; ++N) {
    const double a_hi = 0.5 * (N - 2);
    for (int k = 0; k < 4; ++k) {
      const double a = -1.0 + (k + 0.5) / 4.0 * (a_hi + 1.0);
      const ckn::WeightParams params = ckn::validate(N, a, a);
      for (double r : {0.1, 0.5, 1.0, 2.0, 7.5}) {
        const auto ball = ckn::centered_ball(N, r);
        const double closed = ckn::ball_measure(params, ball, tol).value;
        const double quad = ckn::ball_integral_quadrature(params.energy_exponent(), ball, tol).value;
        row("closed_vs_quadrature", N, a, r, 0.0, quad, closed, quad_rel);
        const double ratio = ckn::doubling_ratio(params, ball.center, r, 0.5, tol);
        row("centered_doubling", N, a, r, 0.0, ratio, std::pow(2.0, N - 2.0 * a), doubling_rel);
      }
    }
  }

  // Off-center balls: the weight is bounded between its values at |x0| -+ r.
  int interval_failures = 0;
  for (double a : {-0.5, 0.0, 0.25, 0.49}) {
    for (double offset : {0.75, 2.0, 5.0}) {
      const ckn::WeightParams params = ckn::validate(3, a, a);
      const double r = 0.5;
      const double value = ckn::ball_measure(params, ckn::BallSpec{{offset, 0.0, 0.0}, r}, tol).value;
      const double vol = ckn::centered_ball_integral(3, 0.0, r);
      const double w1 = std::pow(offset - r, -2.0 * a) * vol;
      const double w2 = std::pow(offset + r, -2.0 * a) * vol;
      const bool ok = value >= std::min(w1, w2) * (1.0 - 10.0 * tol) && value <= std::max(w1, w2) * (1.0 + 10.0 * tol);
      interval_failures += ok ? 0 : 1;
      out << "offcenter_interval,3," << format_double(a) << ',' << format_double(r) << ',' << format_double(offset)
          << ',' << format_double(value) << ',' << format_double(std::sqrt(w1 * w2)) << ",0," << (ok ? 1 : 0)
          << '\n';
    }
  }
  // Far balls double like Lebesgue measure.
  const ckn::WeightParams far_params = ckn::validate(3, 0.45, 0.45);
  const double far_ratio = ckn::doubling_ratio(far_params, std::vector<double>{100.0, 0.0, 0.0}, 1.0, 0.5, tol);
  row("far_doubling", 3, 0.45, 1.0, 100.0, far_ratio, 8.0, 0.05);

  Outcome o;
  o.passed = failures == 0 && interval_failures == 0;
  o.lines.push_back("rows: " + std::to_string(rows + 12) + ", tolerance failures: " + std::to_string(failures) +
                    ", interval failures: " + std::to_string(interval_failures));
  return o;
}

Outcome run_lemma_a1_envelope(const Config& cfg, Reporter& rep, const RunOptions&) {
  const std::uint64_t seed = cfg.get_seed();
  const int n_balls = cfg.get_int("lemma_a1.balls", 1000);
  const double slack = cfg.get_double("check.envelope_slack", 1e-6);
  const double tol = cfg.get_double("measure.tol", ckn::kDefaultMeasureTol);
  cfg.check_unused();

  ckn::Rng rng(seed);
  auto out = rep.open("lemma_a1.csv");
  out << "ball,N,a,b,eps,offset,radius,ratio,envelope,pass\n";
  int violations = 0;
  double max_ratio = 0.0;
  for (int i = 0; i < n_balls; ++i) {
    const int N = 3 + static_cast<int>(rng.below(4));
    const double a = rng.uniform(-1.0, 0.5 * (N - 2) - 0.05);
    const double b = a + rng.uniform(0.0, 0.95);
    const double eps = rng.uniform(0.05, 1.5);
    const double offset = rng.uniform() < 0.1 ? 0.0 : rng.uniform(0.0, 2.0);
    const double radius = std::exp(rng.uniform(std::log(0.01), std::log(1.5)));
    const ckn::WeightParams params = ckn::validate(N, a, b);
    std::vector<double> center(static_cast<std::size_t>(N), 0.0);
    center[0] = offset;
    const ckn::BallSpec ball{center, radius};
    const auto sample = ckn::lemma_a1_check(params, ball, eps, tol);
    const double env = ckn::lemma_a1_envelope(params, ball, eps);
    const bool ok = sample.ratio <= env * (1.0 + slack);
    violations += ok ? 0 : 1;
    max_ratio = std::max(max_ratio, sample.ratio);
    out << i << ',' << N << ',' << format_double(a) << ',' << format_double(b) << ',' << format_double(eps) << ','
        << format_double(offset) << ',' << format_double(radius) << ',' << format_double(sample.ratio) << ','
        << format_double(env) << ',' << (ok ? 1 : 0) << '\n';
  }
  Outcome o;
  o.passed = violations == 0;
  o.lines.push_back("balls: " + std::to_string(n_balls) + ", envelope violations: " + std::to_string(violations) +
                    ", max ratio (empirical constant): " + format_double(max_ratio));
  return o;
}

}  // namespace lab
