#pragma once

namespace ckn {

/// Surface area of the unit sphere S^{N-1}: 2 pi^{N/2} / Gamma(N/2).
double unit_sphere_area(int N);

/// Exact \int_lo^hi rho^w d rho for 0 <= lo <= hi. When lo == 0 requires w > -1.
/// Evaluated through log1p/expm1 so thin shells far from the origin keep full
/// relative accuracy.
double power_integral(double lo, double hi, double w);

/// Same integral with the shell thickness passed separately, for shells whose
/// width is below the resolution of hi - lo.
double power_integral_width(double lo, double width, double w);

/// \int_{B_r(0)} |x|^e dx in R^N, requires N + e > 0.
double centered_ball_integral(int N, double weight_exponent, double radius);

/// Fraction of the sphere S^{N-1} lying in the cap {t >= c}, where the caller
/// supplies 1 - c and 1 + c separately (both may be tiny).
double cap_fraction(int N, double one_minus_c, double one_plus_c);

}  // namespace ckn
