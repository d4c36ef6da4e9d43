#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "ckn/geometry.hpp"
#include "ckn/params.hpp"

namespace ckn {

enum class GridKind { radial, box };
enum class Spacing { uniform, geometric, custom };

/// Nodes r_0 < ... < r_n of a radial grid on [r_min, r_max].
class RadialGrid {
 public:
  static RadialGrid make(double r_min, double r_max, int n_cells, Spacing spacing = Spacing::uniform);
  static RadialGrid from_nodes(std::vector<double> nodes);

  const std::vector<double>& nodes() const noexcept { return nodes_; }
  double r_min() const noexcept { return nodes_.front(); }
  double r_max() const noexcept { return nodes_.back(); }
  int n_cells() const noexcept { return static_cast<int>(nodes_.size()) - 1; }
  Spacing spacing() const noexcept { return spacing_; }
  /// Grid with every node multiplied by factor > 0.
  RadialGrid scaled(double factor) const;

 private:
  RadialGrid(std::vector<double> nodes, Spacing spacing) : nodes_(std::move(nodes)), spacing_(spacing) {}
  std::vector<double> nodes_;
  Spacing spacing_;
};

/// Uniform tensor grid of (cells[0]+1)(cells[1]+1)(cells[2]+1) nodes in R^3.
class BoxGrid {
 public:
  BoxGrid(Point3 lower, Point3 upper, std::array<int, 3> cells);

  const Point3& lower() const noexcept { return lower_; }
  const Point3& upper() const noexcept { return upper_; }
  const std::array<int, 3>& cells() const noexcept { return cells_; }
  double spacing(int axis) const noexcept { return h_[static_cast<std::size_t>(axis)]; }
  std::size_t num_nodes() const noexcept { return stride_[2] * static_cast<std::size_t>(cells_[2] + 1); }
  std::size_t index(int i, int j, int k) const noexcept {
    return static_cast<std::size_t>(i) + stride_[1] * static_cast<std::size_t>(j) +
           stride_[2] * static_cast<std::size_t>(k);
  }
  std::array<int, 3> coords(std::size_t idx) const noexcept;
  double coordinate(int axis, int i) const noexcept {
    return lower_[static_cast<std::size_t>(axis)] + h_[static_cast<std::size_t>(axis)] * i;
  }
  Point3 position(std::size_t idx) const noexcept;

 private:
  Point3 lower_;
  Point3 upper_;
  std::array<int, 3> cells_;
  std::array<double, 3> h_{};
  std::array<std::size_t, 3> stride_{};
};

/// \int_{[lo,hi]} |x|^e dx over an axis-aligned box in R^3. Boxes touching the
/// origin are subdivided toward it; throws origin_cell_unresolved if the
/// unresolved remainder stays above tol relative to the total.
double box_weight_integral(const Point3& lo, const Point3& hi, double weight_exponent,
                           double tol = 1e-13);

using EdgeVisitor = std::function<void(std::size_t, std::size_t, double)>;
using NodeVisitor = std::function<void(std::size_t, double)>;

/// A grid bound to a parameter set: node masses \int_{dual cell} |x|^e,
/// edge conductances (the weighted stiffness of the vertex-centered finite
/// volume scheme) and ball restrictions of both.
///
/// Node i owns the dual cell around it; the edge (i, j) owns the region
/// between the two nodes, and its conductance is \int_{region} |x|^{-2a} / h^2.
/// All weight integrals are exact radial antiderivatives (radial grids) or
/// adaptive tensor Gauss rules (box grids); the weight is never evaluated at
/// the origin. Instances are immutable; cached tables are filled on first use.
class Discretization {
 public:
  explicit Discretization(const WeightParams& params) : params_(params) {}
  virtual ~Discretization() = default;
  Discretization(const Discretization&) = delete;
  Discretization& operator=(const Discretization&) = delete;

  const WeightParams& params() const noexcept { return params_; }

  virtual GridKind kind() const noexcept = 0;
  virtual std::size_t num_nodes() const noexcept = 0;
  virtual Point3 position(std::size_t i) const noexcept = 0;
  /// |x_i| in R^N.
  virtual double radius(std::size_t i) const noexcept = 0;
  virtual bool on_boundary(std::size_t i) const noexcept = 0;
  /// Distance from node i to the domain boundary (the symmetry point r = 0 of a
  /// radial grid is not boundary).
  virtual double boundary_distance(std::size_t i) const noexcept = 0;
  /// Largest cell width.
  virtual double cell_width() const noexcept = 0;
  /// Distance between two nodes.
  virtual double node_distance(std::size_t i, std::size_t j) const noexcept = 0;

  /// Node masses for exponent e (N + e > 0). Cached per exponent.
  const std::vector<double>& masses(double weight_exponent) const;
  const std::vector<double>& energy_masses() const { return masses(params_.energy_exponent()); }
  const std::vector<double>& source_masses() const { return masses(params_.source_exponent()); }

  /// Visits every edge (i, j, conductance) once, in a fixed order.
  virtual void for_each_edge(const EdgeVisitor& visit) const = 0;
  virtual void for_each_neighbor(std::size_t i, const std::function<void(std::size_t)>& visit) const = 0;

  /// True when the ball lies inside the closed domain.
  virtual bool ball_inside(const BallSpec& ball) const = 0;
  /// Visits (node, mass of the node's dual cell inside the ball).
  virtual void ball_node_masses(const BallSpec& ball, double weight_exponent,
                                const NodeVisitor& visit) const = 0;
  /// Visits (i, j, conductance of the edge region inside the ball).
  virtual void ball_edges(const BallSpec& ball, const EdgeVisitor& visit) const = 0;
  /// Nodes with |x_i - center| <= radius.
  virtual std::vector<std::size_t> nodes_in_ball(const BallSpec& ball) const = 0;

  /// "# grid=<radial|box> N=<n> a=<a> b=<b>"
  std::string csv_header() const;

 protected:
  virtual std::vector<double> compute_masses(double weight_exponent) const = 0;
  void check_ball_dimension(const BallSpec& ball) const;

 private:
  WeightParams params_;
  mutable std::mutex cache_mutex_;
  mutable std::map<double, std::shared_ptr<const std::vector<double>>> mass_cache_;
};

std::shared_ptr<const Discretization> make_discretization(const WeightParams& params, const RadialGrid& grid);
std::shared_ptr<const Discretization> make_discretization(const WeightParams& params, const BoxGrid& grid);

/// Nodal samples on a discretization. Values are finite and match the node count.
class DiscreteField {
 public:
  DiscreteField(std::shared_ptr<const Discretization> disc, std::vector<double> values,
                std::string name = {});

  static DiscreteField sample(std::shared_ptr<const Discretization> disc,
                              const std::function<double(const Point3&)>& fn, std::string name = {});
  /// Samples a function of |x|.
  static DiscreteField sample_radial(std::shared_ptr<const Discretization> disc,
                                     const std::function<double(double)>& fn, std::string name = {});
  static DiscreteField constant(std::shared_ptr<const Discretization> disc, double value,
                                std::string name = {});

  const Discretization& discretization() const noexcept { return *disc_; }
  const std::shared_ptr<const Discretization>& discretization_ptr() const noexcept { return disc_; }
  const WeightParams& params() const noexcept { return disc_->params(); }
  const std::vector<double>& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  const std::string& name() const noexcept { return name_; }

  DiscreteField scaled(double factor) const;
  DiscreteField minus(const DiscreteField& other) const;

 private:
  std::shared_ptr<const Discretization> disc_;
  std::vector<double> values_;
  std::string name_;
};

void require_same_grid(const DiscreteField& x, const DiscreteField& y);

/// Parsed field CSV: header parameters, coordinates per node, values.
struct FieldCsv {
  GridKind kind = GridKind::radial;
  int N = 3;
  double a = 0.0;
  double b = 0.0;
  std::vector<std::vector<double>> coords;
  std::vector<double> values;
};

/// Header row then `coords..., value` per node, 17 significant digits.
void write_field_csv(std::ostream& out, const DiscreteField& field);
FieldCsv read_field_csv(std::istream& in);
/// Rebuilds a field on `disc`; coordinates and header must match exactly.
DiscreteField field_from_csv(std::shared_ptr<const Discretization> disc, const FieldCsv& csv);
/// Rebuilds the grid from the coordinates in the CSV.
std::shared_ptr<const Discretization> discretization_from_csv(const FieldCsv& csv, double s = kInfinity);

}  // namespace ckn
