#pragma once

#include <array>
#include <cmath>
#include <vector>

namespace ckn {

/// Node positions. Box grids use all three slots; radial grids place the node
/// on the first axis, {r, 0, 0}.
using Point3 = std::array<double, 3>;

inline double norm(const Point3& x) noexcept { return std::hypot(x[0], x[1], x[2]); }

inline double distance(const Point3& x, const Point3& y) noexcept {
  return std::hypot(x[0] - y[0], x[1] - y[1], x[2] - y[2]);
}

/// A ball B_radius(center) in R^N. center.size() is the ambient dimension.
struct BallSpec {
  std::vector<double> center;
  double radius = 0.0;

  double center_norm() const noexcept {
    double sum = 0.0;
    for (double c : center) sum += c * c;
    return std::sqrt(sum);
  }
};

/// Ball centered at the origin of R^N.
inline BallSpec centered_ball(int N, double radius) {
  return BallSpec{std::vector<double>(static_cast<std::size_t>(N), 0.0), radius};
}

/// Embeds a point of R^3 into R^N (N >= 3) by zero padding.
inline std::vector<double> embed(const Point3& x, int N) {
  std::vector<double> v(static_cast<std::size_t>(N), 0.0);
  for (std::size_t i = 0; i < 3; ++i) v[i] = x[i];
  return v;
}

}  // namespace ckn
