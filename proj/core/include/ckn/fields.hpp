#pragma once

#include <vector>

#include "ckn/geometry.hpp"
#include "ckn/grid.hpp"

namespace ckn {

/// \int u |x|^e dx with the grid's node masses (lumped quadrature).
double weighted_integral(const DiscreteField& field, double weight_exponent);

/// Same over a ball, using the discretization's ball restriction.
double weighted_integral(const DiscreteField& field, double weight_exponent, const BallSpec& ball);

/// \int |grad u_h|^2 |x|^{-2a} dx, edge by edge.
double dirichlet_energy(const DiscreteField& field);

/// Energy restricted to the edge regions inside the ball.
double dirichlet_energy(const DiscreteField& field, const BallSpec& ball);

/// (\int |u|^q |x|^{-bp} dx)^{1/q}, q >= 1. Computed with the field's sup
/// factored out so large q does not overflow.
double lq_norm(const DiscreteField& field, double q);

/// Weighted L^q norm over the nodes with mask[i] set, weight |x|^e.
double lq_norm(const DiscreteField& field, double q, double weight_exponent, const std::vector<char>& mask);

/// max - min of the nodal values at nodes inside the ball. Throws empty_ball.
double oscillation(const DiscreteField& field, const BallSpec& ball);

/// \int_B |u - u_B|^2 dmu_a with u_B the weighted mean.
double ball_variance(const DiscreteField& field, const BallSpec& ball);

}  // namespace ckn
