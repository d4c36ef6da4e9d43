#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "ckn/geometry.hpp"
#include "ckn/grid.hpp"

namespace ckn {

/// Compressed sparse rows, columns sorted within each row.
struct CsrMatrix {
  std::size_t n = 0;
  std::vector<std::size_t> row_ptr;
  std::vector<std::size_t> col;
  std::vector<double> val;

  void multiply(const std::vector<double>& x, std::vector<double>& y) const;
  double at(std::size_t i, std::size_t j) const;
  std::vector<double> diagonal() const;
};

/// Weighted stiffness with Dirichlet rows eliminated symmetrically: rows of
/// fixed nodes are identity rows and their values sit in the right-hand side.
struct LinearSystem {
  std::shared_ptr<const Discretization> disc;
  CsrMatrix matrix;
  std::vector<double> rhs;
  std::vector<char> fixed;
  std::vector<double> fixed_values;
};

/// Unconstrained stiffness A with (Au)_i = sum_j c_ij (u_i - u_j).
CsrMatrix stiffness_matrix(const Discretization& disc);

/// Load b_i = f_i \int_{cell i} |x|^{-bp}.
std::vector<double> load_vector(const DiscreteField& f);

/// -div(|x|^{-2a} grad u) = |x|^{-bp} f with u = dirichlet on the grid boundary.
LinearSystem assemble(const DiscreteField& f, const DiscreteField& dirichlet);

/// Same with an explicit set of fixed nodes taking their values from `dirichlet`.
LinearSystem assemble(const DiscreteField& f, const DiscreteField& dirichlet, const std::vector<char>& fixed);

struct SolveReport {
  int iterations = 0;
  /// Recursively updated CG residual ||r|| / ||b|| of the returned iterate.
  double relative_residual = 0.0;
  /// ||b - A x|| / ||b|| recomputed from x. On fine radial grids this sits at
  /// a rounding floor that can exceed tight tolerances.
  double true_relative_residual = 0.0;
  double energy = 0.0;
  bool converged = false;
};

struct Solution {
  DiscreteField u;
  SolveReport report;
};

inline constexpr double kDefaultSolverTol = 1e-10;
inline constexpr int kDefaultMaxIter = 100000;

/// Jacobi-preconditioned conjugate gradients from a zero start. On hitting
/// max_iter the best iterate so far is returned with converged = false.
Solution solve(const LinearSystem& system, double tol = kDefaultSolverTol, int max_iter = kDefaultMaxIter);

/// Raw CG on an SPD matrix; returns iterations and writes x.
SolveReport conjugate_gradient(const CsrMatrix& A, const std::vector<double>& b, std::vector<double>& x,
                               double tol, int max_iter);

/// Radial manufactured pair: f(r) = r^gamma and
/// u(r) = (R^beta - r^beta) / ((N - bp + gamma) beta), beta = 2 + 2a - bp + gamma,
/// solving -(r^{N-1-2a} u')' = r^{N-1-bp} f with u(R) = 0.
struct RadialMms {
  double gamma = 0.0;
  double beta = 0.0;
  double r_outer = 1.0;
  double denom = 1.0;
  double u(double r) const;
  double f(double r) const;
};

RadialMms exact_radial_mms(const WeightParams& params, double gamma, double r_outer);

/// Solution of the zero-source problem on the ball with u's trace on the
/// discrete ball boundary (inside nodes with a neighbour outside); w = u
/// elsewhere. Throws ball_too_small with fewer than 2 free nodes.
DiscreteField harmonic_replacement(const DiscreteField& u, const BallSpec& ball,
                                   double tol = kDefaultSolverTol, int max_iter = kDefaultMaxIter);

struct ResidualReport {
  DiscreteField r;        ///< (Au - b)_i at non-boundary nodes, 0 on the boundary.
  double dual_norm = 0.0; ///< sqrt(r^T A_0^{-1} r), A_0 the homogeneous Dirichlet stiffness.
  double l2_norm = 0.0;
};

ResidualReport residual(const DiscreteField& u, const DiscreteField& f);

/// Radial solution u(r) = (1 + r^k)^{-2/(p-2)} of
/// -div(|x|^{-2a} grad u) = K |x|^{-bp} |u|^{p-2} u with
/// k = (N-2-2a)(p-2)/2 and K = (N-2-2a)(N-bp). Needs p > 2.
struct ConstantKSolution {
  double k = 0.0;
  double K = 0.0;
  double exponent = 0.0;  ///< 2/(p-2)
  double u(double r) const;
};

ConstantKSolution constant_k_solution(const WeightParams& params);

/// u_lambda(r) = lambda^{(N-2-2a)/2} u(lambda r).
std::function<double(double)> dilate(const WeightParams& params, std::function<double(double)> u, double lambda);

}  // namespace ckn
