#pragma once

#include <span>

#include "ckn/geometry.hpp"
#include "ckn/params.hpp"

namespace ckn {

class DiscreteField;

enum class MeasureMethod { closed_form, quadrature };

struct MeasureResult {
  double value = 0.0;
  MeasureMethod method = MeasureMethod::closed_form;
  /// Richardson difference of the last two refinements; zero for closed forms.
  double est_error = 0.0;
};

inline constexpr double kDefaultMeasureTol = 1e-10;

/// \int_{ball} |x|^{weight_exponent} dx in R^N, N = ball.center.size().
///
/// Centered balls use the closed form. Off-center balls integrate over
/// spherical shells about the origin: each shell carries its exact radial
/// weight \int rho^{N-1+e} and the cap fraction of the sphere inside the ball
/// at the shell midpoint; shells are spaced uniformly in an angle variable so
/// the cap fraction is smooth, and the midpoint sums are Richardson
/// extrapolated. The part of a ball that contains a full centered ball is
/// split off and integrated in closed form.
MeasureResult ball_integral(double weight_exponent, const BallSpec& ball,
                            double tol = kDefaultMeasureTol);

/// Shell quadrature even for centered balls (cross-check route).
MeasureResult ball_integral_quadrature(double weight_exponent, const BallSpec& ball,
                                       double tol = kDefaultMeasureTol);

/// mu_a(B) = \int_B |x|^{-2a} dx.
MeasureResult ball_measure(const WeightParams& params, const BallSpec& ball,
                           double tol = kDefaultMeasureTol);

/// mu_a(B(x, r)) / mu_a(B(x, tau r)) for 0 < tau < 1.
double doubling_ratio(const WeightParams& params, std::span<const double> center, double r,
                      double tau, double tol = kDefaultMeasureTol);

/// (1/mu_a(B)) \int_B u dmu_a using the field's discretization.
double weighted_mean(const DiscreteField& field, const BallSpec& ball);

struct LemmaA1Sample {
  double lhs = 0.0;                   ///< (\int_B |x|^{-bp})^{2/p + eps}
  double rhs_without_constant = 0.0;  ///< rho^{-2+eps N} max(rho,|x0|)^{-eps bp} \int_B |x|^{-2a}
  double ratio = 0.0;
};

LemmaA1Sample lemma_a1_check(const WeightParams& params, const BallSpec& ball, double eps,
                             double tol = kDefaultMeasureTol);

/// Rigorous upper bound on lemma_a1_check().ratio from pointwise bounds of the
/// two weights: near balls (rho >= |x0|/2) sit inside B_{3 rho}(0), far balls
/// see |x| within [|x0| - rho, |x0| + rho].
double lemma_a1_envelope(const WeightParams& params, const BallSpec& ball, double eps);

}  // namespace ckn
