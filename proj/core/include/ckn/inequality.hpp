#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "ckn/geometry.hpp"
#include "ckn/grid.hpp"
#include "ckn/profile.hpp"

namespace ckn {

/// One sample of an inequality with its unknown constant factored out.
struct RatioSample {
  double lhs = 0.0;
  double rhs_core = 0.0;
  double ratio = 0.0;  ///< lhs / rhs_core, +inf when rhs_core == 0 < lhs
  std::string descriptor;
};

/// lhs = (\int |u|^p |x|^{-bp})^{1/p}, rhs_core = (\int |grad u|^2 |x|^{-2a})^{1/2}.
/// Throws zero_field for u == 0.
RatioSample ckn_ratio(const DiscreteField& u, std::string descriptor = {});

/// lhs = \int_B |u - u_B|^2 dmu_a, rhs_core = r^2 \int_B |grad u|^2 dmu_a.
RatioSample poincare_ratio(const DiscreteField& u, const BallSpec& ball, std::string descriptor = {});

/// lhs = max_{B_{r/2}} |u|, rhs_core = (mean over B_r of u^2 dmu_a)^{1/2}.
RatioSample sup_bound_ratio(const DiscreteField& u, const BallSpec& ball, std::string descriptor = {});

/// lhs = (mean over B_r of u^s dmu_a)^{1/s}, rhs_core = min over nodes in B_{r/2}.
/// Requires u >= 0 on B_{2r} (negative_field) and (Au)_i >= -tol * row scale at
/// every free node of B_{2r} (not_superharmonic). rhs_core == 0 gives ratio +inf.
RatioSample weak_harnack_check(const DiscreteField& u, const BallSpec& ball, double s_exp = 1.0,
                               double tol = 1e-10, std::string descriptor = {});

struct AlphaHEstimate {
  double alpha_h = 0.0;       ///< fitted slope clamped to (0, 1]
  double slope = 0.0;         ///< unclamped slope of log osc against log rho
  double fit_residual = 0.0;  ///< RMS deviation of the fit
  int n_samples = 0;
};

/// Least-squares slope of log osc(u, B_rho(center)) against log rho.
/// Throws degenerate_oscillation if some osc < 1e-14.
AlphaHEstimate estimate_alpha_h(const DiscreteField& u, const std::vector<double>& center,
                                const std::vector<double>& radii);

/// Phi(rho) = \int_{B_rho} |grad u|^2 dmu_a on the ladder.
GrowthProfile energy_decay_profile(const DiscreteField& u, const std::vector<double>& center,
                                   const std::vector<double>& radii);

/// Exponent lambda > 0 of the mu_a-harmonic functions x_1 |x|^{lambda-1}:
/// lambda^2 + (N-2-2a) lambda - (N-1) = 0.
double degree_one_exponent(const WeightParams& params);

struct SuiteField {
  std::string descriptor;
  std::function<double(const Point3&)> fn;
};

/// The fixed 50-member test suite: radial and off-center bumps, cut-off
/// polynomials, cut-off powers |x|^beta and seeded random Fourier sums. All
/// members vanish outside B_{0.85}(0).
std::vector<SuiteField> test_field_suite(std::uint64_t seed);

/// Balls used for the Poincare suite on the cube [-1, 1]^3.
std::vector<BallSpec> poincare_suite_balls();

struct SuiteResult {
  std::vector<RatioSample> samples;
  double max_ratio = 0.0;
  std::string argmax;
};

SuiteResult ckn_suite(const std::shared_ptr<const Discretization>& disc, std::uint64_t seed);
SuiteResult poincare_suite(const std::shared_ptr<const Discretization>& disc, std::uint64_t seed);

/// `descriptor,lhs,rhs_core,ratio` rows.
void write_ratio_csv(std::ostream& out, const std::vector<RatioSample>& samples);

}  // namespace ckn
