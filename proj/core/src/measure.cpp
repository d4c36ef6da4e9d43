#include "ckn/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "ckn/error.hpp"
#include "ckn/grid.hpp"
#include "ckn/radial_math.hpp"

namespace ckn {
namespace {

constexpr int kInitialShells = 16;
constexpr int kMaxShells = 1 << 20;

void check_ball(const BallSpec& ball) {
  if (ball.center.size() < 3) throw Error(Errc::dimension_too_small, "ball center needs N >= 3");
  if (!(ball.radius > 0.0)) throw Error(Errc::nonpositive_radius, "radius must be positive");
}

// Midpoint-product sum over n shells spanning |d - r| <= rho <= d + r.
double shell_sum(int N, double w, double d, double r, int n) {
  const double lo = std::abs(d - r);
  const double half = std::min(d, r);  // (hi - lo)/2
  const double mid = lo + half;
  const double step = std::numbers::pi / n;
  const double sigma = unit_sphere_area(N);
  double sum = 0.0;
  for (int j = 0; j < n; ++j) {
    const double phi0 = step * j;
    const double phi1 = step * (j + 1);
    const double phim = 0.5 * (phi0 + phi1);
    const double rho0 = mid - half * std::cos(phi0);
    // rho1 - rho0 written without cancellation
    const double width = 2.0 * half * std::sin(phim) * std::sin(0.5 * step);
    const double weight = sigma * power_integral_width(rho0, width, w);

    const double s = std::sin(0.5 * phim);
    const double c = std::cos(0.5 * phim);
    const double rho = mid - half * std::cos(phim);
    const double above_lo = 2.0 * half * s * s;  // rho - lo
    const double below_hi = 2.0 * half * c * c;  // hi - rho
    double one_minus_c;
    double one_plus_c;
    if (d >= r) {
      one_minus_c = below_hi * above_lo / (2.0 * rho * d);
      one_plus_c = (rho + d - r) * (rho + d + r) / (2.0 * rho * d);
    } else {
      one_minus_c = below_hi * (rho + lo) / (2.0 * rho * d);
      one_plus_c = above_lo * (rho + d + r) / (2.0 * rho * d);
    }
    sum += weight * cap_fraction(N, one_minus_c, one_plus_c);
  }
  return sum;
}

MeasureResult shell_quadrature(double e, const BallSpec& ball, double tol) {
  const int N = static_cast<int>(ball.center.size());
  const double w = N - 1 + e;
  const double d = ball.center_norm();
  const double r = ball.radius;
  if (d == 0.0) {
    // Shells of a centered ball lie entirely inside; the sum of exact shell
    // weights telescopes.
    const double sigma = unit_sphere_area(N);
    double sum = 0.0;
    for (int j = 0; j < kInitialShells; ++j) {
      const double r0 = r * j / kInitialShells;
      const double r1 = r * (j + 1) / kInitialShells;
      sum += sigma * power_integral(r0, r1, w);
    }
    return {sum, MeasureMethod::quadrature, 0.0};
  }
  const double core = d < r ? centered_ball_integral(N, e, r - d) : 0.0;

  double coarse = shell_sum(N, w, d, r, kInitialShells);
  double prev_extrap = 0.0;
  bool have_prev = false;
  for (int n = 2 * kInitialShells; n <= kMaxShells; n *= 2) {
    const double fine = shell_sum(N, w, d, r, n);
    const double extrap = fine + (fine - coarse) / 3.0;
    if (have_prev) {
      const double value = core + extrap;
      const double err = std::abs(extrap - prev_extrap);
      if (err <= tol * std::abs(value)) return {value, MeasureMethod::quadrature, err};
    }
    prev_extrap = extrap;
    have_prev = true;
    coarse = fine;
  }
  throw Error(Errc::quadrature_nonconvergence,
              "shell quadrature did not reach tol " + std::to_string(tol));
}

}  // namespace

MeasureResult ball_integral(double weight_exponent, const BallSpec& ball, double tol) {
  check_ball(ball);
  if (!(tol > 0.0)) throw Error(Errc::invalid_argument, "tol must be positive");
  const int N = static_cast<int>(ball.center.size());
  if (ball.center_norm() == 0.0) {
    return {centered_ball_integral(N, weight_exponent, ball.radius), MeasureMethod::closed_form, 0.0};
  }
  return shell_quadrature(weight_exponent, ball, tol);
}

MeasureResult ball_integral_quadrature(double weight_exponent, const BallSpec& ball, double tol) {
  check_ball(ball);
  if (!(tol > 0.0)) throw Error(Errc::invalid_argument, "tol must be positive");
  const int N = static_cast<int>(ball.center.size());
  if (!(N + weight_exponent > 0.0)) throw Error(Errc::singular_cell, "N + e <= 0");
  return shell_quadrature(weight_exponent, ball, tol);
}

MeasureResult ball_measure(const WeightParams& params, const BallSpec& ball, double tol) {
  if (static_cast<int>(ball.center.size()) != params.N()) {
    throw Error(Errc::invalid_argument, "ball dimension differs from N");
  }
  return ball_integral(params.energy_exponent(), ball, tol);
}

double doubling_ratio(const WeightParams& params, std::span<const double> center, double r,
                      double tau, double tol) {
  if (!(tau > 0.0 && tau < 1.0)) throw Error(Errc::invalid_argument, "tau must lie in (0, 1)");
  std::vector<double> c(center.begin(), center.end());
  const double big = ball_measure(params, BallSpec{c, r}, tol).value;
  const double small = ball_measure(params, BallSpec{c, tau * r}, tol).value;
  return big / small;
}

double weighted_mean(const DiscreteField& field, const BallSpec& ball) {
  const Discretization& disc = field.discretization();
  if (!disc.ball_inside(ball)) throw Error(Errc::ball_outside_domain, "ball leaves the grid domain");
  double num = 0.0;
  double den = 0.0;
  disc.ball_node_masses(ball, disc.params().energy_exponent(), [&](std::size_t i, double m) {
    num += m * field[i];
    den += m;
  });
  if (!(den > 0.0)) throw Error(Errc::empty_ball, "ball carries no discrete mass");
  return num / den;
}

LemmaA1Sample lemma_a1_check(const WeightParams& params, const BallSpec& ball, double eps, double tol) {
  if (!(eps > 0.0)) throw Error(Errc::invalid_argument, "eps must be positive");
  const double rho = ball.radius;
  const double d = ball.center_norm();
  const double source = ball_integral(params.source_exponent(), ball, tol).value;
  const double mu = ball_measure(params, ball, tol).value;
  const int N = params.N();
  LemmaA1Sample out;
  out.lhs = std::pow(source, 2.0 / params.p() + eps);
  out.rhs_without_constant =
      std::pow(rho, -2.0 + eps * N) * std::pow(std::max(rho, d), -eps * params.bp()) * mu;
  out.ratio = out.lhs / out.rhs_without_constant;
  return out;
}

double lemma_a1_envelope(const WeightParams& params, const BallSpec& ball, double eps) {
  if (!(eps > 0.0)) throw Error(Errc::invalid_argument, "eps must be positive");
  check_ball(ball);
  const int N = params.N();
  const double rho = ball.radius;
  const double d = ball.center_norm();
  const double bp = params.bp();
  const double a = params.a();
  const double volume = centered_ball_integral(N, 0.0, rho);

  double source_upper;
  double mu_lower;
  if (rho >= d / 2.0) {
    // B_rho(x0) is contained in B_{d+rho}(0), itself inside B_{3 rho}(0).
    source_upper = bp >= 0.0
                       ? std::min(centered_ball_integral(N, -bp, d + rho),
                                  centered_ball_integral(N, -bp, rho))
                       : std::pow(d + rho, -bp) * volume;
    mu_lower = a >= 0.0 ? std::pow(d + rho, -2.0 * a) * volume
                        : centered_ball_integral(N, -2.0 * a, rho);
  } else {
    const double near = d - rho;
    const double far = d + rho;
    source_upper = volume * std::max(std::pow(near, -bp), std::pow(far, -bp));
    mu_lower = volume * std::min(std::pow(near, -2.0 * a), std::pow(far, -2.0 * a));
  }
  const double lhs_upper = std::pow(source_upper, 2.0 / params.p() + eps);
  const double rhs_lower =
      std::pow(rho, -2.0 + eps * N) * std::pow(std::max(rho, d), -eps * bp) * mu_lower;
  return lhs_upper / rhs_lower;
}

}  // namespace ckn
