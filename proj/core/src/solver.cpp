#include "ckn/solver.hpp"

#include <algorithm>
#include <cmath>

#include "ckn/error.hpp"
#include "ckn/fields.hpp"

namespace ckn {
namespace {

double dot(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

struct Triplet {
  std::size_t col;
  double val;
};

// Rows of the unconstrained stiffness, built in two passes over the edges.
CsrMatrix build_matrix(const Discretization& disc, const std::vector<char>* fixed) {
  const std::size_t n = disc.num_nodes();
  std::vector<std::size_t> count(n, 1);
  disc.for_each_edge([&](std::size_t i, std::size_t j, double) {
    ++count[i];
    ++count[j];
  });
  CsrMatrix A;
  A.n = n;
  A.row_ptr.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) A.row_ptr[i + 1] = A.row_ptr[i] + count[i];
  A.col.assign(A.row_ptr[n], 0);
  A.val.assign(A.row_ptr[n], 0.0);
  std::vector<std::size_t> fill(n);
  for (std::size_t i = 0; i < n; ++i) {
    A.col[A.row_ptr[i]] = i;
    fill[i] = A.row_ptr[i] + 1;
  }
  disc.for_each_edge([&](std::size_t i, std::size_t j, double c) {
    A.val[A.row_ptr[i]] += c;
    A.val[A.row_ptr[j]] += c;
    A.col[fill[i]] = j;
    A.val[fill[i]++] = -c;
    A.col[fill[j]] = i;
    A.val[fill[j]++] = -c;
  });
  // Sort each row by column and drop eliminated couplings.
  CsrMatrix out;
  out.n = n;
  out.row_ptr.assign(n + 1, 0);
  std::vector<Triplet> row;
  for (std::size_t i = 0; i < n; ++i) {
    row.clear();
    for (std::size_t k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) {
      const bool eliminated = fixed && A.col[k] != i && ((*fixed)[i] || (*fixed)[A.col[k]]);
      if (eliminated) continue;
      const bool identity = fixed && (*fixed)[i];
      row.push_back({A.col[k], identity ? 1.0 : A.val[k]});
    }
    std::sort(row.begin(), row.end(), [](const Triplet& x, const Triplet& y) { return x.col < y.col; });
    for (const auto& t : row) {
      out.col.push_back(t.col);
      out.val.push_back(t.val);
    }
    out.row_ptr[i + 1] = out.col.size();
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double d = out.at(i, i);
    if (!(d > 0.0) || !std::isfinite(d)) throw Error(Errc::singular_cell, "nonpositive stiffness diagonal");
  }
  return out;
}

std::vector<char> boundary_mask(const Discretization& disc) {
  std::vector<char> mask(disc.num_nodes(), 0);
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = disc.on_boundary(i) ? 1 : 0;
  return mask;
}

}  // namespace

void CsrMatrix::multiply(const std::vector<double>& x, std::vector<double>& y) const {
  y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s += val[k] * x[col[k]];
    y[i] = s;
  }
}

double CsrMatrix::at(std::size_t i, std::size_t j) const {
  const auto first = col.begin() + static_cast<std::ptrdiff_t>(row_ptr[i]);
  const auto last = col.begin() + static_cast<std::ptrdiff_t>(row_ptr[i + 1]);
  const auto it = std::lower_bound(first, last, j);
  return (it != last && *it == j) ? val[static_cast<std::size_t>(it - col.begin())] : 0.0;
}

std::vector<double> CsrMatrix::diagonal() const {
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = at(i, i);
  return d;
}

CsrMatrix stiffness_matrix(const Discretization& disc) { return build_matrix(disc, nullptr); }

std::vector<double> load_vector(const DiscreteField& f) {
  const auto& m = f.discretization().source_masses();
  std::vector<double> b(f.size());
  for (std::size_t i = 0; i < b.size(); ++i) b[i] = f[i] * m[i];
  return b;
}

LinearSystem assemble(const DiscreteField& f, const DiscreteField& dirichlet) {
  return assemble(f, dirichlet, boundary_mask(f.discretization()));
}

LinearSystem assemble(const DiscreteField& f, const DiscreteField& dirichlet, const std::vector<char>& fixed) {
  require_same_grid(f, dirichlet);
  const Discretization& disc = f.discretization();
  if (fixed.size() != disc.num_nodes()) throw Error(Errc::field_mismatch, "fixed mask size mismatch");
  LinearSystem sys;
  sys.disc = f.discretization_ptr();
  sys.matrix = build_matrix(disc, &fixed);
  sys.fixed = fixed;
  sys.fixed_values.assign(disc.num_nodes(), 0.0);
  sys.rhs = load_vector(f);
  for (std::size_t i = 0; i < fixed.size(); ++i) {
    if (fixed[i]) {
      sys.fixed_values[i] = dirichlet[i];
      sys.rhs[i] = dirichlet[i];
    }
  }
  // Move couplings to fixed nodes into the right-hand side.
  disc.for_each_edge([&](std::size_t i, std::size_t j, double c) {
    if (!fixed[i] && fixed[j]) sys.rhs[i] += c * dirichlet[j];
    if (fixed[i] && !fixed[j]) sys.rhs[j] += c * dirichlet[i];
  });
  return sys;
}

SolveReport conjugate_gradient(const CsrMatrix& A, const std::vector<double>& b, std::vector<double>& x,
                               double tol, int max_iter) {
  if (!(tol > 0.0) || max_iter < 1) throw Error(Errc::invalid_argument, "need tol > 0 and max_iter >= 1");
  const std::size_t n = A.n;
  SolveReport rep;
  x.assign(n, 0.0);
  const double bnorm = std::sqrt(dot(b, b));
  if (bnorm == 0.0) {
    rep.converged = true;
    return rep;
  }
  const std::vector<double> diag = A.diagonal();
  std::vector<double> r = b;
  std::vector<double> z(n);
  std::vector<double> p(n);
  std::vector<double> Ap(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag[i];
  p = z;
  double rz = dot(r, z);
  std::vector<double> best = x;
  double best_rel = 1.0;
  for (int it = 1; it <= max_iter; ++it) {
    A.multiply(p, Ap);
    const double pAp = dot(p, Ap);
    if (!(pAp > 0.0)) break;
    const double alpha = rz / pAp;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * Ap[i];
    }
    const double rel = std::sqrt(dot(r, r)) / bnorm;
    rep.iterations = it;
    if (rel < best_rel) {
      best_rel = rel;
      best = x;
    }
    if (rel <= tol) break;
    for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag[i];
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  x = std::move(best);
  // Report the true residual of the returned iterate.
  A.multiply(x, Ap);
  double rr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = b[i] - Ap[i];
    rr += d * d;
  }
  rep.relative_residual = best_rel;
  rep.true_relative_residual = std::sqrt(rr) / bnorm;
  rep.converged = best_rel <= tol;
  return rep;
}

Solution solve(const LinearSystem& system, double tol, int max_iter) {
  std::vector<double> x;
  SolveReport rep = conjugate_gradient(system.matrix, system.rhs, x, tol, max_iter);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (system.fixed[i]) x[i] = system.fixed_values[i];
  }
  DiscreteField u(system.disc, std::move(x), "u");
  rep.energy = dirichlet_energy(u);
  return {std::move(u), rep};
}

double RadialMms::u(double r) const { return (std::pow(r_outer, beta) - std::pow(r, beta)) / (denom * beta); }

double RadialMms::f(double r) const { return gamma == 0.0 ? 1.0 : std::pow(r, gamma); }

RadialMms exact_radial_mms(const WeightParams& params, double gamma, double r_outer) {
  if (!(r_outer > 0.0)) throw Error(Errc::nonpositive_radius, "r_outer must be positive");
  RadialMms m;
  m.gamma = gamma;
  m.r_outer = r_outer;
  m.beta = 2.0 + 2.0 * params.a() - params.bp() + gamma;
  m.denom = params.N() - params.bp() + gamma;
  if (m.beta == 0.0 || m.denom == 0.0) throw Error(Errc::degenerate_exponent, "manufactured exponent vanishes");
  return m;
}

DiscreteField harmonic_replacement(const DiscreteField& u, const BallSpec& ball, double tol, int max_iter) {
  const Discretization& disc = u.discretization();
  if (!disc.ball_inside(ball)) throw Error(Errc::ball_outside_domain, "ball leaves the grid domain");
  const std::size_t n = disc.num_nodes();
  std::vector<char> inside(n, 0);
  for (std::size_t i : disc.nodes_in_ball(ball)) inside[i] = 1;
  std::vector<char> fixed(n, 1);
  std::size_t free_count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!inside[i] || disc.on_boundary(i)) continue;
    bool touches_outside = false;
    disc.for_each_neighbor(i, [&](std::size_t j) { touches_outside = touches_outside || !inside[j]; });
    if (!touches_outside) {
      fixed[i] = 0;
      ++free_count;
    }
  }
  if (free_count < 2) throw Error(Errc::ball_too_small, "fewer than 2 interior nodes in the ball");
  const DiscreteField zero = DiscreteField::constant(u.discretization_ptr(), 0.0);
  const LinearSystem sys = assemble(zero, u, fixed);
  Solution sol = solve(sys, tol, max_iter);
  if (!sol.report.converged) throw Error(Errc::no_convergence, "harmonic replacement solve did not converge");
  return DiscreteField(u.discretization_ptr(), sol.u.values(), u.name());
}

ResidualReport residual(const DiscreteField& u, const DiscreteField& f) {
  require_same_grid(u, f);
  const Discretization& disc = u.discretization();
  const std::size_t n = disc.num_nodes();
  std::vector<double> r(n, 0.0);
  disc.for_each_edge([&](std::size_t i, std::size_t j, double c) {
    const double flux = c * (u[i] - u[j]);
    r[i] += flux;
    r[j] -= flux;
  });
  const std::vector<double> b = load_vector(f);
  const std::vector<char> fixed = boundary_mask(disc);
  for (std::size_t i = 0; i < n; ++i) r[i] = fixed[i] ? 0.0 : r[i] - b[i];

  const CsrMatrix A0 = build_matrix(disc, &fixed);
  std::vector<double> z;
  conjugate_gradient(A0, r, z, 1e-13, kDefaultMaxIter);
  ResidualReport rep{DiscreteField(u.discretization_ptr(), r, "residual"), 0.0, 0.0};
  rep.dual_norm = std::sqrt(std::max(0.0, dot(r, z)));
  rep.l2_norm = std::sqrt(dot(r, r));
  return rep;
}

double ConstantKSolution::u(double r) const { return std::pow(1.0 + std::pow(r, k), -exponent); }

ConstantKSolution constant_k_solution(const WeightParams& params) {
  const double p = params.p();
  if (!(p > 2.0)) throw Error(Errc::degenerate_exponent, "constant-K solution needs p > 2");
  const double m = params.N() - 2.0 - 2.0 * params.a();
  ConstantKSolution s;
  s.k = m * (p - 2.0) / 2.0;
  s.K = m * (params.N() - params.bp());
  s.exponent = 2.0 / (p - 2.0);
  return s;
}

std::function<double(double)> dilate(const WeightParams& params, std::function<double(double)> u, double lambda) {
  if (!(lambda > 0.0)) throw Error(Errc::invalid_argument, "lambda must be positive");
  const double scale = std::pow(lambda, 0.5 * (params.N() - 2.0 - 2.0 * params.a()));
  return [u = std::move(u), scale, lambda](double r) { return scale * u(lambda * r); };
}

}  // namespace ckn
