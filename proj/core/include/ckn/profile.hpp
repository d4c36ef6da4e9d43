#pragma once

#include <string_view>
#include <vector>

#include "ckn/grid.hpp"

namespace ckn {

enum class ProfileKind { campanato, gradient_energy };

std::string_view to_string(ProfileKind kind) noexcept;

/// Local integrals Phi(rho) sampled on a strictly decreasing radius ladder,
/// together with the discrete mu_a measure of each ball.
struct GrowthProfile {
  std::vector<double> center;
  std::vector<double> radii;
  std::vector<double> values;
  std::vector<double> measures;
  ProfileKind kind = ProfileKind::campanato;
};

/// values[i] = \int_{B_i} |u - u_{B_i}|^2 dmu_a.
GrowthProfile campanato_profile(const DiscreteField& u, const std::vector<double>& center,
                                const std::vector<double>& radii);

/// values[i] = \int_{B_i} |grad u|^2 dmu_a.
GrowthProfile gradient_profile(const DiscreteField& u, const std::vector<double>& center,
                               const std::vector<double>& radii);

/// Discrete mu_a(B) = sum of restricted node masses.
double discrete_ball_measure(const Discretization& disc, const BallSpec& ball);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms = 0.0;
};

/// Ordinary least squares y = slope x + intercept, needs >= 2 points.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace ckn
