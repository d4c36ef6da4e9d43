#include "ckn/profile.hpp"

#include <cmath>

#include "ckn/error.hpp"
#include "ckn/fields.hpp"

namespace ckn {
namespace {

void check_radii(const std::vector<double>& radii) {
  if (radii.empty()) throw Error(Errc::insufficient_points, "empty radius ladder");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0)) throw Error(Errc::nonpositive_radius, "radii must be positive");
    if (i > 0 && !(radii[i] < radii[i - 1])) throw Error(Errc::invalid_argument, "radii must strictly decrease");
  }
}

template <typename Fn>
GrowthProfile build(const DiscreteField& u, const std::vector<double>& center, const std::vector<double>& radii,
                    ProfileKind kind, Fn&& value) {
  check_radii(radii);
  GrowthProfile prof;
  prof.center = center;
  prof.radii = radii;
  prof.kind = kind;
  for (double r : radii) {
    const BallSpec ball{center, r};
    if (!u.discretization().ball_inside(ball)) {
      throw Error(Errc::ball_outside_domain, "profile ball of radius " + std::to_string(r) + " leaves the domain");
    }
    prof.values.push_back(value(ball));
    prof.measures.push_back(discrete_ball_measure(u.discretization(), ball));
  }
  return prof;
}

}  // namespace

std::string_view to_string(ProfileKind kind) noexcept {
  return kind == ProfileKind::campanato ? "campanato" : "gradient_energy";
}

double discrete_ball_measure(const Discretization& disc, const BallSpec& ball) {
  double sum = 0.0;
  disc.ball_node_masses(ball, disc.params().energy_exponent(), [&](std::size_t, double m) { sum += m; });
  return sum;
}

GrowthProfile campanato_profile(const DiscreteField& u, const std::vector<double>& center,
                                const std::vector<double>& radii) {
  return build(u, center, radii, ProfileKind::campanato,
               [&](const BallSpec& ball) { return ball_variance(u, ball); });
}

GrowthProfile gradient_profile(const DiscreteField& u, const std::vector<double>& center,
                               const std::vector<double>& radii) {
  return build(u, center, radii, ProfileKind::gradient_energy,
               [&](const BallSpec& ball) { return dirichlet_energy(u, ball); });
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw Error(Errc::insufficient_points, "line fit needs >= 2 points");
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw Error(Errc::insufficient_points, "line fit needs distinct abscissae");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = y[i] - (fit.slope * x[i] + fit.intercept);
    ss += d * d;
  }
  fit.rms = std::sqrt(ss / static_cast<double>(n));
  return fit;
}

}  // namespace ckn
