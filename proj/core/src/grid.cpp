#include "ckn/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>

#include "ckn/error.hpp"
#include "ckn/format.hpp"
#include "ckn/radial_math.hpp"

namespace ckn {
namespace {

// ---------------------------------------------------------------------------
// Box weight integrals

struct GaussRule {
  std::array<double, 6> x;
  std::array<double, 6> w;
  int n;
};

constexpr GaussRule kGauss3{{-0.7745966692414834, 0.0, 0.7745966692414834},
                            {0.5555555555555556, 0.8888888888888888, 0.5555555555555556},
                            3};
constexpr GaussRule kGauss4{
    {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526},
    {0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538},
    4};
constexpr GaussRule kGauss6{{-0.9324695142031521, -0.6612093864662645, -0.2386191860831969,
                             0.2386191860831969, 0.6612093864662645, 0.9324695142031521},
                            {0.1713244923791704, 0.3607615730481386, 0.4679139345726910,
                             0.4679139345726910, 0.3607615730481386, 0.1713244923791704},
                            6};

constexpr int kMaxBoxDepth = 48;

double gauss_box(const Point3& lo, const Point3& hi, double e, const GaussRule& rule) {
  std::array<std::array<double, 6>, 3> pts{};
  std::array<double, 3> half{};
  for (std::size_t a = 0; a < 3; ++a) {
    half[a] = 0.5 * (hi[a] - lo[a]);
    const double mid = 0.5 * (hi[a] + lo[a]);
    for (int q = 0; q < rule.n; ++q) pts[a][static_cast<std::size_t>(q)] = mid + half[a] * rule.x[static_cast<std::size_t>(q)];
  }
  const double half_e = 0.5 * e;
  double sum = 0.0;
  for (int k = 0; k < rule.n; ++k) {
    const double z = pts[2][static_cast<std::size_t>(k)];
    double sj = 0.0;
    for (int j = 0; j < rule.n; ++j) {
      const double y = pts[1][static_cast<std::size_t>(j)];
      double si = 0.0;
      for (int i = 0; i < rule.n; ++i) {
        const double x = pts[0][static_cast<std::size_t>(i)];
        si += rule.w[static_cast<std::size_t>(i)] * std::pow(x * x + y * y + z * z, half_e);
      }
      sj += rule.w[static_cast<std::size_t>(j)] * si;
    }
    sum += rule.w[static_cast<std::size_t>(k)] * sj;
  }
  return sum * half[0] * half[1] * half[2];
}

double box_diameter(const Point3& lo, const Point3& hi) {
  return std::hypot(hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]);
}

double box_origin_distance(const Point3& lo, const Point3& hi) {
  double sum = 0.0;
  for (std::size_t a = 0; a < 3; ++a) {
    const double c = std::clamp(0.0, lo[a], hi[a]);
    sum += c * c;
  }
  return std::sqrt(sum);
}

double integrate_box(const Point3& lo, const Point3& hi, double e, int depth, double& unresolved) {
  const double diam = box_diameter(lo, hi);
  if (diam == 0.0) return 0.0;
  const double dist = box_origin_distance(lo, hi);
  const bool split = dist < 2.0 * diam;
  if (split && depth >= kMaxBoxDepth) {
    if (dist == 0.0) {
      unresolved += centered_ball_integral(3, e, diam);
      return 0.0;
    }
    return gauss_box(lo, hi, e, kGauss6);
  }
  if (split) {
    // Split through the origin when it lies strictly inside, else at the midpoint.
    // A box with the origin at a vertex has a child that is the box scaled by 1/2,
    // so I = S / (1 - 2^{-(3+e)}) with S the sum over the other seven children.
    // Boxes away from the origin are only cut along their long axes, so thin
    // slabs next to the origin do not multiply into ever thinner children.
    double longest = 0.0;
    for (std::size_t a = 0; a < 3; ++a) longest = std::max(longest, hi[a] - lo[a]);
    std::array<std::array<double, 3>, 3> cuts{};
    std::array<int, 3> pieces{};
    for (std::size_t a = 0; a < 3; ++a) {
      const bool cut_axis = dist == 0.0 || hi[a] - lo[a] >= 0.5 * longest;
      const double cut = (lo[a] < 0.0 && hi[a] > 0.0) ? 0.0 : 0.5 * (lo[a] + hi[a]);
      cuts[a] = cut_axis ? std::array<double, 3>{lo[a], cut, hi[a]} : std::array<double, 3>{lo[a], hi[a], hi[a]};
      pieces[a] = cut_axis ? 2 : 1;
    }
    bool origin_vertex = dist == 0.0;
    std::array<int, 3> origin_child{};
    for (std::size_t a = 0; a < 3; ++a) {
      if (lo[a] == 0.0) {
        origin_child[a] = 0;
      } else if (hi[a] == 0.0) {
        origin_child[a] = 1;
      } else {
        origin_vertex = false;
      }
    }
    double sum = 0.0;
    for (int k = 0; k < pieces[2]; ++k) {
      for (int j = 0; j < pieces[1]; ++j) {
        for (int i = 0; i < pieces[0]; ++i) {
          if (origin_vertex && i == origin_child[0] && j == origin_child[1] && k == origin_child[2]) continue;
          const Point3 clo{cuts[0][static_cast<std::size_t>(i)], cuts[1][static_cast<std::size_t>(j)],
                           cuts[2][static_cast<std::size_t>(k)]};
          const Point3 chi{cuts[0][static_cast<std::size_t>(i) + 1], cuts[1][static_cast<std::size_t>(j) + 1],
                           cuts[2][static_cast<std::size_t>(k) + 1]};
          sum += integrate_box(clo, chi, e, depth + 1, unresolved);
        }
      }
    }
    return origin_vertex ? sum / (1.0 - std::exp2(-(3.0 + e))) : sum;
  }
  const double ratio = dist / diam;
  const GaussRule& rule = ratio < 4.0 ? kGauss6 : ratio < 8.0 ? kGauss4 : kGauss3;
  return gauss_box(lo, hi, e, rule);
}

double ramp_fraction(double signed_distance, double width) {
  return std::clamp(0.5 - signed_distance / width, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Radial discretization

class RadialDiscretization final : public Discretization {
 public:
  RadialDiscretization(const WeightParams& params, RadialGrid grid)
      : Discretization(params), grid_(std::move(grid)), sigma_(unit_sphere_area(params.N())) {
    const auto& r = grid_.nodes();
    const std::size_t n = r.size();
    dual_lo_.resize(n);
    dual_hi_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      dual_lo_[i] = i == 0 ? r[0] : 0.5 * (r[i - 1] + r[i]);
      dual_hi_[i] = i + 1 == n ? r[n - 1] : 0.5 * (r[i] + r[i + 1]);
    }
    const double w = params.N() - 1 + params.energy_exponent();
    conductance_.resize(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double h = r[i + 1] - r[i];
      conductance_[i] = sigma_ * power_integral(r[i], r[i + 1], w) / (h * h);
      if (!std::isfinite(conductance_[i]) || !(conductance_[i] > 0.0)) {
        throw Error(Errc::singular_cell, "radial conductance not finite");
      }
    }
  }

  GridKind kind() const noexcept override { return GridKind::radial; }
  std::size_t num_nodes() const noexcept override { return grid_.nodes().size(); }
  Point3 position(std::size_t i) const noexcept override { return {grid_.nodes()[i], 0.0, 0.0}; }
  double radius(std::size_t i) const noexcept override { return grid_.nodes()[i]; }
  bool on_boundary(std::size_t i) const noexcept override {
    return i + 1 == num_nodes() || (i == 0 && grid_.r_min() > 0.0);
  }
  double boundary_distance(std::size_t i) const noexcept override {
    const double r = grid_.nodes()[i];
    double d = grid_.r_max() - r;
    if (grid_.r_min() > 0.0) d = std::min(d, r - grid_.r_min());
    return d;
  }
  double cell_width() const noexcept override {
    double h = 0.0;
    const auto& r = grid_.nodes();
    for (std::size_t i = 0; i + 1 < r.size(); ++i) h = std::max(h, r[i + 1] - r[i]);
    return h;
  }
  double node_distance(std::size_t i, std::size_t j) const noexcept override {
    return std::abs(grid_.nodes()[i] - grid_.nodes()[j]);
  }

  void for_each_edge(const EdgeVisitor& visit) const override {
    for (std::size_t i = 0; i < conductance_.size(); ++i) visit(i, i + 1, conductance_[i]);
  }
  void for_each_neighbor(std::size_t i, const std::function<void(std::size_t)>& visit) const override {
    if (i > 0) visit(i - 1);
    if (i + 1 < num_nodes()) visit(i + 1);
  }

  bool ball_inside(const BallSpec& ball) const override {
    check_ball_dimension(ball);
    return ball.center_norm() == 0.0 && grid_.r_min() == 0.0 &&
           ball.radius <= grid_.r_max() * (1.0 + 1e-12);
  }

  void ball_node_masses(const BallSpec& ball, double e, const NodeVisitor& visit) const override {
    const double R = centered_radius(ball);
    const double w = params().N() - 1 + e;
    for (std::size_t i = 0; i < num_nodes(); ++i) {
      if (dual_lo_[i] >= R) break;
      visit(i, sigma_ * power_integral(dual_lo_[i], std::min(dual_hi_[i], R), w));
    }
  }

  void ball_edges(const BallSpec& ball, const EdgeVisitor& visit) const override {
    const double R = centered_radius(ball);
    const double w = params().N() - 1 + params().energy_exponent();
    const auto& r = grid_.nodes();
    for (std::size_t i = 0; i + 1 < r.size(); ++i) {
      if (r[i] >= R) break;
      if (r[i + 1] <= R) {
        visit(i, i + 1, conductance_[i]);
      } else {
        const double h = r[i + 1] - r[i];
        visit(i, i + 1, sigma_ * power_integral(r[i], R, w) / (h * h));
      }
    }
  }

  std::vector<std::size_t> nodes_in_ball(const BallSpec& ball) const override {
    const double R = centered_radius(ball);
    std::vector<std::size_t> out;
    const double limit = R * (1.0 + 1e-12);
    for (std::size_t i = 0; i < num_nodes() && grid_.nodes()[i] <= limit; ++i) out.push_back(i);
    return out;
  }

 protected:
  std::vector<double> compute_masses(double e) const override {
    const double w = params().N() - 1 + e;
    std::vector<double> m(num_nodes());
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = sigma_ * power_integral(dual_lo_[i], dual_hi_[i], w);
    return m;
  }

 private:
  double centered_radius(const BallSpec& ball) const {
    check_ball_dimension(ball);
    if (ball.center_norm() != 0.0) {
      throw Error(Errc::ball_outside_domain, "radial grids only carry balls centered at the origin");
    }
    if (!(ball.radius > 0.0)) throw Error(Errc::nonpositive_radius, "ball radius must be positive");
    return ball.radius;
  }

  RadialGrid grid_;
  double sigma_;
  std::vector<double> dual_lo_;
  std::vector<double> dual_hi_;
  std::vector<double> conductance_;
};

// ---------------------------------------------------------------------------
// Box discretization (N = 3)

class BoxDiscretization final : public Discretization {
 public:
  BoxDiscretization(const WeightParams& params, BoxGrid grid) : Discretization(params), grid_(std::move(grid)) {
    if (params.N() != 3) throw Error(Errc::invalid_grid, "box grids support N = 3 only");
    h_eff_ = std::cbrt(grid_.spacing(0) * grid_.spacing(1) * grid_.spacing(2));
  }

  GridKind kind() const noexcept override { return GridKind::box; }
  std::size_t num_nodes() const noexcept override { return grid_.num_nodes(); }
  Point3 position(std::size_t i) const noexcept override { return grid_.position(i); }
  double radius(std::size_t i) const noexcept override { return norm(grid_.position(i)); }
  bool on_boundary(std::size_t i) const noexcept override {
    const auto c = grid_.coords(i);
    for (int a = 0; a < 3; ++a) {
      if (c[static_cast<std::size_t>(a)] == 0 || c[static_cast<std::size_t>(a)] == grid_.cells()[static_cast<std::size_t>(a)]) return true;
    }
    return false;
  }
  double boundary_distance(std::size_t i) const noexcept override {
    const Point3 x = grid_.position(i);
    double d = kInfinity;
    for (std::size_t a = 0; a < 3; ++a) d = std::min({d, x[a] - grid_.lower()[a], grid_.upper()[a] - x[a]});
    return std::max(d, 0.0);
  }
  double cell_width() const noexcept override {
    return std::max({grid_.spacing(0), grid_.spacing(1), grid_.spacing(2)});
  }
  double node_distance(std::size_t i, std::size_t j) const noexcept override {
    return distance(grid_.position(i), grid_.position(j));
  }

  void for_each_edge(const EdgeVisitor& visit) const override {
    const auto& cond = conductances();
    const auto& n = grid_.cells();
    for (int axis = 0; axis < 3; ++axis) {
      const auto& c = cond[static_cast<std::size_t>(axis)];
      for (int k = 0; k <= n[2]; ++k) {
        for (int j = 0; j <= n[1]; ++j) {
          for (int i = 0; i <= n[0]; ++i) {
            std::array<int, 3> idx{i, j, k};
            if (idx[static_cast<std::size_t>(axis)] == n[static_cast<std::size_t>(axis)]) continue;
            const std::size_t from = grid_.index(i, j, k);
            ++idx[static_cast<std::size_t>(axis)];
            visit(from, grid_.index(idx[0], idx[1], idx[2]), c[from]);
          }
        }
      }
    }
  }

  void for_each_neighbor(std::size_t node, const std::function<void(std::size_t)>& visit) const override {
    const auto c = grid_.coords(node);
    const auto& n = grid_.cells();
    for (std::size_t a = 0; a < 3; ++a) {
      auto lo = c;
      auto hi = c;
      if (c[a] > 0) {
        --lo[a];
        visit(grid_.index(lo[0], lo[1], lo[2]));
      }
      if (c[a] < n[a]) {
        ++hi[a];
        visit(grid_.index(hi[0], hi[1], hi[2]));
      }
    }
  }

  bool ball_inside(const BallSpec& ball) const override {
    check_ball_dimension(ball);
    for (std::size_t a = 0; a < 3; ++a) {
      const double slack = 1e-12 * (grid_.upper()[a] - grid_.lower()[a]);
      if (ball.center[a] - ball.radius < grid_.lower()[a] - slack) return false;
      if (ball.center[a] + ball.radius > grid_.upper()[a] + slack) return false;
    }
    return true;
  }

  void ball_node_masses(const BallSpec& ball, double e, const NodeVisitor& visit) const override {
    const auto& m = masses(e);
    const Point3 c = center3(ball);
    const double pad = 0.5 * h_eff_;
    for_each_in_bbox(c, ball.radius + pad, [&](std::size_t idx) {
      const double frac = ramp_fraction(distance(grid_.position(idx), c) - ball.radius, h_eff_);
      if (frac > 0.0) visit(idx, frac * m[idx]);
    });
  }

  void ball_edges(const BallSpec& ball, const EdgeVisitor& visit) const override {
    const auto& cond = conductances();
    const Point3 c = center3(ball);
    const auto& n = grid_.cells();
    const double reach = ball.radius + cell_width();
    for_each_in_bbox(c, reach, [&](std::size_t from) {
      const auto ijk = grid_.coords(from);
      for (std::size_t a = 0; a < 3; ++a) {
        if (ijk[a] == n[a]) continue;
        auto next = ijk;
        ++next[a];
        const std::size_t to = grid_.index(next[0], next[1], next[2]);
        Point3 mid = grid_.position(from);
        mid[a] += 0.5 * grid_.spacing(static_cast<int>(a));
        const double frac = ramp_fraction(distance(mid, c) - ball.radius, grid_.spacing(static_cast<int>(a)));
        if (frac > 0.0) visit(from, to, frac * cond[a][from]);
      }
    });
  }

  std::vector<std::size_t> nodes_in_ball(const BallSpec& ball) const override {
    const Point3 c = center3(ball);
    std::vector<std::size_t> out;
    const double limit = ball.radius * (1.0 + 1e-12);
    for_each_in_bbox(c, ball.radius, [&](std::size_t idx) {
      if (distance(grid_.position(idx), c) <= limit) out.push_back(idx);
    });
    return out;
  }

 protected:
  std::vector<double> compute_masses(double e) const override {
    std::vector<double> m(num_nodes());
    for (std::size_t idx = 0; idx < m.size(); ++idx) {
      const auto c = grid_.coords(idx);
      Point3 lo{};
      Point3 hi{};
      for (std::size_t a = 0; a < 3; ++a) dual_interval(static_cast<int>(a), c[a], lo[a], hi[a]);
      m[idx] = e == 0.0 ? (hi[0] - lo[0]) * (hi[1] - lo[1]) * (hi[2] - lo[2])
                        : box_weight_integral(lo, hi, e);
    }
    return m;
  }

 private:
  using ConductanceTable = std::array<std::vector<double>, 3>;

  void dual_interval(int axis, int i, double& lo, double& hi) const {
    const double x = grid_.coordinate(axis, i);
    const double half = 0.5 * grid_.spacing(axis);
    lo = i == 0 ? x : x - half;
    hi = i == grid_.cells()[static_cast<std::size_t>(axis)] ? x : x + half;
  }

  const ConductanceTable& conductances() const {
    std::call_once(cond_once_, [this] {
      const double e = params().energy_exponent();
      const auto& n = grid_.cells();
      for (std::size_t axis = 0; axis < 3; ++axis) {
        auto& c = cond_[axis];
        c.assign(num_nodes(), 0.0);
        const double h = grid_.spacing(static_cast<int>(axis));
        for (std::size_t idx = 0; idx < c.size(); ++idx) {
          const auto ijk = grid_.coords(idx);
          if (ijk[axis] == n[axis]) continue;
          Point3 lo{};
          Point3 hi{};
          for (std::size_t b = 0; b < 3; ++b) {
            if (b == axis) {
              lo[b] = grid_.coordinate(static_cast<int>(b), ijk[b]);
              hi[b] = lo[b] + h;
            } else {
              dual_interval(static_cast<int>(b), ijk[b], lo[b], hi[b]);
            }
          }
          const double integral =
              e == 0.0 ? (hi[0] - lo[0]) * (hi[1] - lo[1]) * (hi[2] - lo[2]) : box_weight_integral(lo, hi, e);
          c[idx] = integral / (h * h);
          if (!std::isfinite(c[idx])) throw Error(Errc::singular_cell, "box conductance not finite");
        }
      }
    });
    return cond_;
  }

  Point3 center3(const BallSpec& ball) const {
    check_ball_dimension(ball);
    if (!(ball.radius > 0.0)) throw Error(Errc::nonpositive_radius, "ball radius must be positive");
    return {ball.center[0], ball.center[1], ball.center[2]};
  }

  template <typename Fn>
  void for_each_in_bbox(const Point3& c, double reach, Fn&& fn) const {
    std::array<int, 3> lo{};
    std::array<int, 3> hi{};
    for (std::size_t a = 0; a < 3; ++a) {
      const double h = grid_.spacing(static_cast<int>(a));
      lo[a] = std::max(0, static_cast<int>(std::floor((c[a] - reach - grid_.lower()[a]) / h)));
      hi[a] = std::min(grid_.cells()[a], static_cast<int>(std::ceil((c[a] + reach - grid_.lower()[a]) / h)));
    }
    for (int k = lo[2]; k <= hi[2]; ++k)
      for (int j = lo[1]; j <= hi[1]; ++j)
        for (int i = lo[0]; i <= hi[0]; ++i) fn(grid_.index(i, j, k));
  }

  BoxGrid grid_;
  double h_eff_ = 0.0;
  mutable std::once_flag cond_once_;
  mutable ConductanceTable cond_;
};

}  // namespace

// ---------------------------------------------------------------------------
// RadialGrid / BoxGrid

RadialGrid RadialGrid::make(double r_min, double r_max, int n_cells, Spacing spacing) {
  if (!(r_min >= 0.0) || !(r_min < r_max) || !std::isfinite(r_max)) {
    throw Error(Errc::invalid_grid, "radial grid needs 0 <= r_min < r_max");
  }
  if (n_cells < 2) throw Error(Errc::invalid_grid, "radial grid needs at least 2 cells");
  std::vector<double> nodes(static_cast<std::size_t>(n_cells) + 1);
  if (spacing == Spacing::uniform) {
    const double h = (r_max - r_min) / n_cells;
    for (int i = 0; i <= n_cells; ++i) nodes[static_cast<std::size_t>(i)] = r_min + h * i;
  } else if (spacing == Spacing::geometric) {
    if (!(r_min > 0.0)) throw Error(Errc::invalid_grid, "geometric spacing needs r_min > 0");
    const double ratio = std::log(r_max / r_min) / n_cells;
    for (int i = 0; i <= n_cells; ++i) nodes[static_cast<std::size_t>(i)] = r_min * std::exp(ratio * i);
  } else {
    throw Error(Errc::invalid_grid, "use RadialGrid::from_nodes for custom spacing");
  }
  nodes.back() = r_max;
  return RadialGrid(std::move(nodes), spacing);
}

RadialGrid RadialGrid::from_nodes(std::vector<double> nodes) {
  if (nodes.size() < 3) throw Error(Errc::invalid_grid, "radial grid needs at least 2 cells");
  if (!(nodes.front() >= 0.0)) throw Error(Errc::invalid_grid, "radial nodes must be nonnegative");
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    if (!(nodes[i] < nodes[i + 1]) || !std::isfinite(nodes[i + 1])) {
      throw Error(Errc::invalid_grid, "radial nodes must be finite and strictly increasing");
    }
  }
  return RadialGrid(std::move(nodes), Spacing::custom);
}

RadialGrid RadialGrid::scaled(double factor) const {
  if (!(factor > 0.0)) throw Error(Errc::invalid_argument, "scale factor must be positive");
  std::vector<double> nodes = nodes_;
  for (double& r : nodes) r *= factor;
  return RadialGrid(std::move(nodes), spacing_);
}

BoxGrid::BoxGrid(Point3 lower, Point3 upper, std::array<int, 3> cells)
    : lower_(lower), upper_(upper), cells_(cells) {
  for (std::size_t a = 0; a < 3; ++a) {
    if (!(lower[a] < upper[a])) throw Error(Errc::invalid_grid, "box grid needs lower < upper");
    if (cells[a] < 2) throw Error(Errc::invalid_grid, "box grid needs at least 2 cells per axis");
    h_[a] = (upper[a] - lower[a]) / cells[a];
  }
  stride_[0] = 1;
  stride_[1] = static_cast<std::size_t>(cells[0] + 1);
  stride_[2] = stride_[1] * static_cast<std::size_t>(cells[1] + 1);
}

std::array<int, 3> BoxGrid::coords(std::size_t idx) const noexcept {
  const int k = static_cast<int>(idx / stride_[2]);
  const std::size_t rem = idx % stride_[2];
  const int j = static_cast<int>(rem / stride_[1]);
  const int i = static_cast<int>(rem % stride_[1]);
  return {i, j, k};
}

Point3 BoxGrid::position(std::size_t idx) const noexcept {
  const auto c = coords(idx);
  return {coordinate(0, c[0]), coordinate(1, c[1]), coordinate(2, c[2])};
}

double box_weight_integral(const Point3& lo, const Point3& hi, double e, double tol) {
  for (std::size_t a = 0; a < 3; ++a) {
    if (!(lo[a] <= hi[a])) throw Error(Errc::invalid_argument, "box needs lo <= hi");
  }
  if (e == 0.0) return (hi[0] - lo[0]) * (hi[1] - lo[1]) * (hi[2] - lo[2]);
  if (!(3.0 + e > 0.0)) throw Error(Errc::singular_cell, "|x|^e not integrable in R^3");
  double unresolved = 0.0;
  const double value = integrate_box(lo, hi, e, 0, unresolved);
  if (unresolved > tol * value) {
    throw Error(Errc::origin_cell_unresolved, "adaptive subdivision budget exhausted near the origin");
  }
  return value;
}

// ---------------------------------------------------------------------------
// Discretization

const std::vector<double>& Discretization::masses(double e) const {
  if (!(params_.N() + e > 0.0)) throw Error(Errc::singular_cell, "|x|^e not locally integrable");
  {
    std::lock_guard lock(cache_mutex_);
    auto it = mass_cache_.find(e);
    if (it != mass_cache_.end()) return *it->second;
  }
  auto computed = std::make_shared<const std::vector<double>>(compute_masses(e));
  std::lock_guard lock(cache_mutex_);
  auto [it, inserted] = mass_cache_.emplace(e, std::move(computed));
  return *it->second;
}

void Discretization::check_ball_dimension(const BallSpec& ball) const {
  if (static_cast<int>(ball.center.size()) != params_.N()) {
    throw Error(Errc::invalid_argument, "ball dimension differs from N");
  }
  for (std::size_t a = 3; a < ball.center.size(); ++a) {
    if (ball.center[a] != 0.0) throw Error(Errc::ball_outside_domain, "ball center off the grid's 3-space");
  }
}

std::string Discretization::csv_header() const {
  return std::string("# grid=") + (kind() == GridKind::radial ? "radial" : "box") +
         " N=" + std::to_string(params_.N()) + " a=" + format_double(params_.a()) +
         " b=" + format_double(params_.b());
}

std::shared_ptr<const Discretization> make_discretization(const WeightParams& params, const RadialGrid& grid) {
  return std::make_shared<RadialDiscretization>(params, grid);
}

std::shared_ptr<const Discretization> make_discretization(const WeightParams& params, const BoxGrid& grid) {
  return std::make_shared<BoxDiscretization>(params, grid);
}

// ---------------------------------------------------------------------------
// DiscreteField

DiscreteField::DiscreteField(std::shared_ptr<const Discretization> disc, std::vector<double> values,
                             std::string name)
    : disc_(std::move(disc)), values_(std::move(values)), name_(std::move(name)) {
  if (!disc_) throw Error(Errc::invalid_argument, "field needs a discretization");
  if (values_.size() != disc_->num_nodes()) {
    throw Error(Errc::field_mismatch, "value count differs from node count");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw Error(Errc::nonfinite_value, "field values must be finite");
  }
}

DiscreteField DiscreteField::sample(std::shared_ptr<const Discretization> disc,
                                    const std::function<double(const Point3&)>& fn, std::string name) {
  std::vector<double> v(disc->num_nodes());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(disc->position(i));
  return DiscreteField(std::move(disc), std::move(v), std::move(name));
}

DiscreteField DiscreteField::sample_radial(std::shared_ptr<const Discretization> disc,
                                           const std::function<double(double)>& fn, std::string name) {
  std::vector<double> v(disc->num_nodes());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(disc->radius(i));
  return DiscreteField(std::move(disc), std::move(v), std::move(name));
}

DiscreteField DiscreteField::constant(std::shared_ptr<const Discretization> disc, double value, std::string name) {
  std::vector<double> v(disc->num_nodes(), value);
  return DiscreteField(std::move(disc), std::move(v), std::move(name));
}

DiscreteField DiscreteField::scaled(double factor) const {
  std::vector<double> v = values_;
  for (double& x : v) x *= factor;
  return DiscreteField(disc_, std::move(v), name_);
}

DiscreteField DiscreteField::minus(const DiscreteField& other) const {
  require_same_grid(*this, other);
  std::vector<double> v = values_;
  for (std::size_t i = 0; i < v.size(); ++i) v[i] -= other.values_[i];
  return DiscreteField(disc_, std::move(v), name_);
}

void require_same_grid(const DiscreteField& x, const DiscreteField& y) {
  if (x.discretization_ptr() != y.discretization_ptr()) {
    throw Error(Errc::field_mismatch, "fields live on different discretizations");
  }
}

// ---------------------------------------------------------------------------
// CSV

void write_field_csv(std::ostream& out, const DiscreteField& field) {
  const Discretization& disc = field.discretization();
  out << disc.csv_header() << '\n';
  for (std::size_t i = 0; i < field.size(); ++i) {
    const Point3 x = disc.position(i);
    if (disc.kind() == GridKind::radial) {
      out << format_double(x[0]);
    } else {
      out << format_double(x[0]) << ',' << format_double(x[1]) << ',' << format_double(x[2]);
    }
    out << ',' << format_double(field[i]) << '\n';
  }
}

namespace {

double parse_double(const std::string& token) {
  const char* begin = token.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  while (end && (*end == ' ' || *end == '\r')) ++end;
  if (end == begin || (end && *end != '\0')) throw Error(Errc::parse_error, "bad number '" + token + "'");
  return v;
}

}  // namespace

FieldCsv read_field_csv(std::istream& in) {
  FieldCsv csv;
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::parse_error, "empty field CSV");
  {
    std::istringstream hs(line);
    std::string hash;
    hs >> hash;
    if (hash != "#") throw Error(Errc::parse_error, "missing '# grid=' header");
    std::string tok;
    bool have_grid = false;
    bool have_n = false;
    bool have_a = false;
    bool have_b = false;
    while (hs >> tok) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos) throw Error(Errc::parse_error, "bad header token '" + tok + "'");
      const std::string key = tok.substr(0, eq);
      const std::string val = tok.substr(eq + 1);
      if (key == "grid") {
        if (val == "radial") csv.kind = GridKind::radial;
        else if (val == "box") csv.kind = GridKind::box;
        else throw Error(Errc::parse_error, "unknown grid kind '" + val + "'");
        have_grid = true;
      } else if (key == "N") {
        csv.N = static_cast<int>(parse_double(val));
        have_n = true;
      } else if (key == "a") {
        csv.a = parse_double(val);
        have_a = true;
      } else if (key == "b") {
        csv.b = parse_double(val);
        have_b = true;
      } else {
        throw Error(Errc::parse_error, "unknown header key '" + key + "'");
      }
    }
    if (!(have_grid && have_n && have_a && have_b)) throw Error(Errc::parse_error, "incomplete header");
  }
  const std::size_t ncoord = csv.kind == GridKind::radial ? 1 : 3;
  csv.coords.assign(ncoord, {});
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(parse_double(cell));
    if (row.size() != ncoord + 1) throw Error(Errc::parse_error, "row has wrong column count");
    for (std::size_t c = 0; c < ncoord; ++c) csv.coords[c].push_back(row[c]);
    csv.values.push_back(row.back());
  }
  return csv;
}

DiscreteField field_from_csv(std::shared_ptr<const Discretization> disc, const FieldCsv& csv) {
  const auto& params = disc->params();
  const bool kind_ok = (csv.kind == disc->kind());
  if (!kind_ok || csv.N != params.N() || csv.a != params.a() || csv.b != params.b()) {
    throw Error(Errc::field_mismatch, "CSV header does not match discretization");
  }
  if (csv.values.size() != disc->num_nodes()) throw Error(Errc::field_mismatch, "CSV node count mismatch");
  for (std::size_t i = 0; i < csv.values.size(); ++i) {
    const Point3 x = disc->position(i);
    for (std::size_t c = 0; c < csv.coords.size(); ++c) {
      if (csv.coords[c][i] != x[c]) throw Error(Errc::field_mismatch, "CSV coordinates differ from grid");
    }
  }
  return DiscreteField(std::move(disc), csv.values);
}

std::shared_ptr<const Discretization> discretization_from_csv(const FieldCsv& csv, double s) {
  const WeightParams params = validate(csv.N, csv.a, csv.b, s);
  if (csv.kind == GridKind::radial) return make_discretization(params, RadialGrid::from_nodes(csv.coords[0]));
  Point3 lo{};
  Point3 hi{};
  std::array<int, 3> cells{};
  for (std::size_t a = 0; a < 3; ++a) {
    std::vector<double> v = csv.coords[a];
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    if (v.size() < 3) throw Error(Errc::parse_error, "box CSV needs >= 3 distinct coordinates per axis");
    lo[a] = v.front();
    hi[a] = v.back();
    cells[a] = static_cast<int>(v.size()) - 1;
  }
  return make_discretization(params, BoxGrid(lo, hi, cells));
}

}  // namespace ckn
