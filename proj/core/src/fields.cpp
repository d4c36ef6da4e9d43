#include "ckn/fields.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ckn/error.hpp"
#include "ckn/measure.hpp"

namespace ckn {
namespace {

void check_q(double q) {
  if (!(q >= 1.0) || !std::isfinite(q)) throw Error(Errc::invalid_argument, "q must be finite and >= 1");
}

double scaled_norm(const std::vector<double>& u, const std::vector<double>& m, double q,
                   const std::vector<char>* mask) {
  double top = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (mask && !(*mask)[i]) continue;
    top = std::max(top, std::abs(u[i]));
  }
  if (top == 0.0) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (mask && !(*mask)[i]) continue;
    sum += m[i] * std::pow(std::abs(u[i]) / top, q);
  }
  const double out = top * std::pow(sum, 1.0 / q);
  if (!std::isfinite(out)) throw Error(Errc::norm_overflow, "weighted norm is not finite");
  return out;
}

}  // namespace

double weighted_integral(const DiscreteField& field, double weight_exponent) {
  const auto& m = field.discretization().masses(weight_exponent);
  double sum = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) sum += m[i] * field[i];
  return sum;
}

double weighted_integral(const DiscreteField& field, double weight_exponent, const BallSpec& ball) {
  const Discretization& disc = field.discretization();
  if (!disc.ball_inside(ball)) throw Error(Errc::ball_outside_domain, "ball leaves the grid domain");
  double sum = 0.0;
  disc.ball_node_masses(ball, weight_exponent, [&](std::size_t i, double m) { sum += m * field[i]; });
  return sum;
}

double dirichlet_energy(const DiscreteField& field) {
  double sum = 0.0;
  field.discretization().for_each_edge([&](std::size_t i, std::size_t j, double c) {
    const double d = field[i] - field[j];
    sum += c * d * d;
  });
  return sum;
}

double dirichlet_energy(const DiscreteField& field, const BallSpec& ball) {
  const Discretization& disc = field.discretization();
  if (!disc.ball_inside(ball)) throw Error(Errc::ball_outside_domain, "ball leaves the grid domain");
  double sum = 0.0;
  disc.ball_edges(ball, [&](std::size_t i, std::size_t j, double c) {
    const double d = field[i] - field[j];
    sum += c * d * d;
  });
  return sum;
}

double lq_norm(const DiscreteField& field, double q) {
  check_q(q);
  return scaled_norm(field.values(), field.discretization().source_masses(), q, nullptr);
}

double lq_norm(const DiscreteField& field, double q, double weight_exponent, const std::vector<char>& mask) {
  check_q(q);
  if (mask.size() != field.size()) throw Error(Errc::field_mismatch, "mask size differs from node count");
  return scaled_norm(field.values(), field.discretization().masses(weight_exponent), q, &mask);
}

double oscillation(const DiscreteField& field, const BallSpec& ball) {
  const auto nodes = field.discretization().nodes_in_ball(ball);
  if (nodes.empty()) throw Error(Errc::empty_ball, "no grid nodes inside the ball");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i : nodes) {
    lo = std::min(lo, field[i]);
    hi = std::max(hi, field[i]);
  }
  return hi - lo;
}

double ball_variance(const DiscreteField& field, const BallSpec& ball) {
  const double mean = weighted_mean(field, ball);
  const Discretization& disc = field.discretization();
  double sum = 0.0;
  disc.ball_node_masses(ball, disc.params().energy_exponent(), [&](std::size_t i, double m) {
    const double d = field[i] - mean;
    sum += m * d * d;
  });
  return sum;
}

}  // namespace ckn
