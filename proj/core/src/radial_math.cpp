#include "ckn/radial_math.hpp"

#include <algorithm>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <numbers>

#include "ckn/error.hpp"

namespace ckn {

double unit_sphere_area(int N) {
  const double half = 0.5 * N;
  return 2.0 * std::pow(std::numbers::pi, half) / std::tgamma(half);
}

double power_integral_width(double lo, double width, double w) {
  if (width <= 0.0) return 0.0;
  const double w1 = w + 1.0;
  if (lo == 0.0) {
    if (!(w1 > 0.0)) throw Error(Errc::singular_cell, "rho^w is not integrable at 0");
    return std::pow(width, w1) / w1;
  }
  const double x = std::log1p(width / lo);
  if (w1 == 0.0) return x;
  return std::pow(lo, w1) * std::expm1(w1 * x) / w1;
}

double power_integral(double lo, double hi, double w) { return power_integral_width(lo, hi - lo, w); }

double centered_ball_integral(int N, double weight_exponent, double radius) {
  const double k = N + weight_exponent;
  if (!(k > 0.0)) throw Error(Errc::singular_cell, "|x|^e not locally integrable: N + e <= 0");
  return unit_sphere_area(N) * std::pow(radius, k) / k;
}

double cap_fraction(int N, double one_minus_c, double one_plus_c) {
  one_minus_c = std::clamp(one_minus_c, 0.0, 2.0);
  one_plus_c = std::clamp(one_plus_c, 0.0, 2.0);
  if (N == 3) return 0.5 * one_minus_c;
  // Area of {t >= c} over the whole sphere equals I_{1-c^2}((N-1)/2, 1/2)/2 for c >= 0.
  const double x = std::min(1.0, one_minus_c * one_plus_c);
  const double half_ib = 0.5 * boost::math::ibeta(0.5 * (N - 1), 0.5, x);
  return one_minus_c <= 1.0 ? half_ib : 1.0 - half_ib;
}

}  // namespace ckn
