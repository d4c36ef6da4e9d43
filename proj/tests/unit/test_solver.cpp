#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "ckn/error.hpp"
#include "ckn/fields.hpp"
#include "ckn/rng.hpp"
#include "ckn/solver.hpp"

using namespace ckn;
using std::numbers::pi;

namespace {

Eigen::MatrixXd dense(const CsrMatrix& A) {
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(A.n), static_cast<Eigen::Index>(A.n));
  for (std::size_t i = 0; i < A.n; ++i)
    for (std::size_t k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k)
      M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(A.col[k])) = A.val[k];
  return M;
}

std::shared_ptr<const Discretization> cube(const WeightParams& w, int cells) {
  return make_discretization(w, BoxGrid({-1, -1, -1}, {1, 1, 1}, {cells, cells, cells}));
}

// Second derivative free check of -(r^w u')' = g by central differences of the flux.
double flux_divergence(const std::function<double(double)>& u, double w, double r, double h) {
  const auto flux = [&](double x) { return std::pow(x, w) * (u(x + h) - u(x - h)) / (2.0 * h); };
  return -(flux(r + h) - flux(r - h)) / (2.0 * h);
}

}  // namespace

TEST_CASE("assembled systems: symmetry, positive diagonal, identity rows") {
  for (const auto& disc : {make_discretization(validate(3, 0.3, 0.4), RadialGrid::make(0.0, 1.0, 30)),
                           cube(validate(3, -0.5, -0.2), 6)}) {
    const auto f = DiscreteField::constant(disc, 1.0);
    const auto g = DiscreteField::sample(disc, [](const Point3& x) { return x[0] + 2.0; });
    const LinearSystem sys = assemble(f, g);
    const Eigen::MatrixXd M = dense(sys.matrix);
    CHECK((M - M.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * M.cwiseAbs().maxCoeff());
    for (std::size_t i = 0; i < sys.matrix.n; ++i) {
      CHECK(sys.matrix.at(i, i) > 0.0);
      if (sys.fixed[i]) {
        CHECK(sys.matrix.at(i, i) == 1.0);
        CHECK(sys.rhs[i] == g[i]);
        double off = 0.0;
        for (std::size_t k = sys.matrix.row_ptr[i]; k < sys.matrix.row_ptr[i + 1]; ++k)
          if (sys.matrix.col[k] != i) off += std::abs(sys.matrix.val[k]);
        CHECK(off == 0.0);
      }
    }
  }
}

TEST_CASE("unweighted box stiffness is the 7-point Laplacian times the cell volume") {
  const auto disc = cube(validate(3, 0, 0), 4);
  const CsrMatrix A = stiffness_matrix(*disc);
  const BoxGrid g({-1, -1, -1}, {1, 1, 1}, {4, 4, 4});
  const std::size_t c = g.index(2, 2, 2);
  const double h = 0.5;
  CHECK(A.at(c, c) == doctest::Approx(6.0 * h).epsilon(1e-14));
  CHECK(A.at(c, g.index(1, 2, 2)) == doctest::Approx(-h).epsilon(1e-14));
  CHECK(A.at(c, g.index(2, 2, 3)) == doctest::Approx(-h).epsilon(1e-14));
  CHECK(A.at(c, g.index(1, 1, 2)) == 0.0);
}

TEST_CASE("radial stiffness matches hand assembly on a 4-cell grid") {
  const WeightParams w = validate(3, 0.25, 0.25);
  const auto disc = make_discretization(w, RadialGrid::make(0.0, 1.0, 4));
  const CsrMatrix A = stiffness_matrix(*disc);
  const double h = 0.25;
  // c_{i,i+1} = 4 pi \int_{r_i}^{r_{i+1}} rho^{1.5} / h^2
  auto c = [&](int i) { return 4.0 * pi * (std::pow(h * (i + 1), 2.5) - std::pow(h * i, 2.5)) / 2.5 / (h * h); };
  for (int i = 0; i < 4; ++i) CHECK(A.at(i, i + 1) == doctest::Approx(-c(i)).epsilon(1e-14));
  CHECK(A.at(1, 1) == doctest::Approx(c(0) + c(1)).epsilon(1e-14));
  CHECK(A.at(0, 0) == doctest::Approx(c(0)).epsilon(1e-14));
}

TEST_CASE("assembled matrices are SPD (dense eigensolver oracle)") {
  for (double a : {-1.0, 0.0, 0.3, 0.45}) {
    const auto disc = make_discretization(validate(3, a, a), RadialGrid::make(0.0, 1.0, 9));
    const auto f = DiscreteField::constant(disc, 1.0);
    const LinearSystem sys = assemble(f, DiscreteField::constant(disc, 0.0));
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(dense(sys.matrix));
    CHECK(eig.eigenvalues().minCoeff() > 0.0);
  }
  const auto box = cube(validate(3, 0.3, 0.4), 4);
  const LinearSystem sys = assemble(DiscreteField::constant(box, 1.0), DiscreteField::constant(box, 0.0));
  const Eigen::LLT<Eigen::MatrixXd> llt(dense(sys.matrix));
  CHECK(llt.info() == Eigen::Success);
}

TEST_CASE("CG on the identity converges in one iteration") {
  CsrMatrix I;
  I.n = 5;
  for (std::size_t i = 0; i <= 5; ++i) I.row_ptr.push_back(i);
  for (std::size_t i = 0; i < 5; ++i) {
    I.col.push_back(i);
    I.val.push_back(1.0);
  }
  std::vector<double> x;
  const std::vector<double> b{1, -2, 3, 0.5, 7};
  const SolveReport rep = conjugate_gradient(I, b, x, 1e-12, 10);
  CHECK(rep.iterations == 1);
  CHECK(x == b);
  CHECK(rep.converged);
}

TEST_CASE("CG agrees with a dense solve and is deterministic") {
  const auto disc = cube(validate(3, 0.3, 0.4), 5);
  const auto f = DiscreteField::sample(disc, [](const Point3& x) { return 1.0 + x[0] * x[1]; });
  const auto g = DiscreteField::sample(disc, [](const Point3& x) { return x[2]; });
  const LinearSystem sys = assemble(f, g);
  const Solution s1 = solve(sys, 1e-12);
  const Solution s2 = solve(sys, 1e-12);
  CHECK(s1.u.values() == s2.u.values());
  CHECK(s1.report.converged);
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(sys.rhs.size()));
  for (std::size_t i = 0; i < sys.rhs.size(); ++i) rhs(static_cast<Eigen::Index>(i)) = sys.rhs[i];
  const Eigen::VectorXd x = dense(sys.matrix).ldlt().solve(rhs);
  double err = 0.0;
  for (std::size_t i = 0; i < sys.rhs.size(); ++i) err = std::max(err, std::abs(x(static_cast<Eigen::Index>(i)) - s1.u[i]));
  CHECK(err < 1e-9);
}

TEST_CASE("no convergence is reported with the best iterate") {
  const auto disc = cube(validate(3, 0, 0), 8);
  const LinearSystem sys = assemble(DiscreteField::constant(disc, 1.0), DiscreteField::constant(disc, 0.0));
  const Solution s = solve(sys, 1e-14, 2);
  CHECK_FALSE(s.report.converged);
  CHECK(s.report.iterations == 2);
}

TEST_CASE("manufactured radial solutions satisfy their equation") {
  struct Case {
    int N;
    double a, b, gamma;
  };
  for (const Case c : {Case{3, 0, 0, 0}, Case{3, 0.25, 0.25, 0}, Case{4, -0.3, 0.2, 0.7}, Case{5, 0.8, 1.1, -0.4}}) {
    const WeightParams w = validate(c.N, c.a, c.b);
    const RadialMms m = exact_radial_mms(w, c.gamma, 1.0);
    const double wexp = c.N - 1 - 2 * c.a;
    for (double r : {0.2, 0.5, 0.9}) {
      const double lhs = flux_divergence([&](double x) { return m.u(x); }, wexp, r, 1e-4);
      const double rhs = std::pow(r, c.N - 1 - w.bp()) * m.f(r);
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-6));
    }
    CHECK(m.u(1.0) == doctest::Approx(0.0));
  }
  const RadialMms classic = exact_radial_mms(validate(3, 0, 0), 0.0, 1.0);
  CHECK(classic.u(0.3) == doctest::Approx((1 - 0.09) / 6.0).epsilon(1e-15));
  const RadialMms weighted = exact_radial_mms(validate(3, 0.25, 0.25), 0.0, 1.0);
  CHECK(weighted.beta == doctest::Approx(1.0));
  CHECK(weighted.u(0.4) == doctest::Approx(0.6 / 1.5).epsilon(1e-14));
  // beta = 0 for gamma = -(2 + 2a - bp) = -2
  CHECK_THROWS_AS(exact_radial_mms(validate(3, 0, 0), -2.0, 1.0), Error);
}

TEST_CASE("MMS nodal error is second order on geometric grids") {
  for (double a : {0.0, 0.25}) {
    const WeightParams w = validate(3, a, a);
    const RadialMms m = exact_radial_mms(w, 0.0, 1.0);
    double prev = 0.0;
    for (int n : {64, 128, 256}) {
      const auto disc = make_discretization(w, RadialGrid::make(0.01, 1.0, n, Spacing::geometric));
      const auto exact = DiscreteField::sample_radial(disc, [&](double r) { return m.u(r); });
      const Solution s = solve(assemble(DiscreteField::constant(disc, 1.0), exact));
      double err = 0.0;
      for (std::size_t i = 0; i < exact.size(); ++i) err = std::max(err, std::abs(s.u[i] - exact[i]));
      if (prev > 0.0) CHECK(std::log2(prev / err) == doctest::Approx(2.0).epsilon(0.05));
      prev = err;
    }
  }
}

TEST_CASE("classical Poisson on the ball: error bounded by C h^2") {
  const WeightParams w = validate(3, 0, 0);
  for (int n : {100, 200, 400}) {
    const auto disc = make_discretization(w, RadialGrid::make(0.0, 1.0, n));
    const auto zero = DiscreteField::constant(disc, 0.0);
    const Solution s = solve(assemble(DiscreteField::constant(disc, 1.0), zero));
    double err = 0.0;
    for (std::size_t i = 0; i < s.u.size(); ++i) {
      const double r = disc->radius(i);
      err = std::max(err, std::abs(s.u[i] - (1 - r * r) / 6.0));
    }
    const double h = 1.0 / n;
    CHECK(err <= 0.1 * h * h * std::log(n));
  }
}

TEST_CASE("maximum principle for f = 0") {
  const auto disc = cube(validate(3, 0.3, 0.4), 8);
  Rng rng(3);
  std::vector<double> g(disc->num_nodes());
  for (double& v : g) v = rng.uniform(-1.0, 2.0);
  const DiscreteField data(disc, g);
  const Solution s = solve(assemble(DiscreteField::constant(disc, 0.0), data), 1e-12);
  double bmin = 1e300, bmax = -1e300;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (disc->on_boundary(i)) {
      bmin = std::min(bmin, g[i]);
      bmax = std::max(bmax, g[i]);
    }
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(s.u[i] >= bmin - 1e-9);
    CHECK(s.u[i] <= bmax + 1e-9);
  }
}

TEST_CASE("harmonic replacement properties") {
  const WeightParams w = validate(3, 0.3, 0.4);
  const auto disc = cube(w, 12);
  const BallSpec ball{{0.1, 0.0, -0.1}, 0.6};
  const auto u = DiscreteField::sample(disc, [](const Point3& x) { return std::sin(3 * x[0]) + x[1] * x[2] * 4.0; });
  const auto hw = harmonic_replacement(u, ball, 1e-12);
  const auto inside = disc->nodes_in_ball(ball);
  std::vector<char> in(disc->num_nodes(), 0);
  for (auto i : inside) in[i] = 1;
  for (std::size_t i = 0; i < u.size(); ++i)
    if (!in[i]) CHECK(hw[i] == u[i]);
  const double eu = dirichlet_energy(u);
  const double ew = dirichlet_energy(hw);
  CHECK(ew <= eu);
  CHECK(dirichlet_energy(u.minus(hw)) + ew <= eu * (1.0 + 1e-9));
  const auto again = harmonic_replacement(hw, ball, 1e-12);
  CHECK(std::abs(dirichlet_energy(again) - ew) <= 1e-9 * ew);
  CHECK_THROWS_AS(harmonic_replacement(u, BallSpec{{0, 0, 0}, 1.5}), Error);
  CHECK_THROWS_AS(harmonic_replacement(u, BallSpec{{0.05, 0.05, 0.05}, 0.1}), Error);
}

TEST_CASE("harmonic replacement of the fundamental solution off the origin") {
  // |x|^{2+2a-N} is mu_a-harmonic away from 0.
  double prev = 0.0;
  for (int cells : {8, 16, 32}) {
    const WeightParams w = validate(3, 0.2, 0.2);
    const auto disc = make_discretization(w, BoxGrid({0.5, -0.5, -0.5}, {1.5, 0.5, 0.5}, {cells, cells, cells}));
    const auto u = DiscreteField::sample(disc, [](const Point3& x) { return std::pow(norm(x), 2.0 + 0.4 - 3.0); });
    const auto hw = harmonic_replacement(u, BallSpec{{1.0, 0.0, 0.0}, 0.45}, 1e-13);
    double err = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) err = std::max(err, std::abs(hw[i] - u[i]));
    if (prev > 0.0) CHECK(prev / err > 3.0);
    prev = err;
  }
}

TEST_CASE("residual of the discrete solution and of the sampled MMS") {
  const WeightParams w = validate(3, 0.25, 0.25);
  const RadialMms m = exact_radial_mms(w, 0.5, 1.0);
  double prev = 0.0;
  for (int n : {64, 128, 256}) {
    const auto disc = make_discretization(w, RadialGrid::make(0.05, 1.0, n, Spacing::geometric));
    const auto f = DiscreteField::sample_radial(disc, [&](double r) { return m.f(r); });
    const auto exact = DiscreteField::sample_radial(disc, [&](double r) { return m.u(r); });
    const Solution s = solve(assemble(f, exact), 1e-13);
    CHECK(residual(s.u, f).dual_norm <= 1e-9 * std::sqrt(s.report.energy));
    const double d = residual(exact, f).dual_norm;
    if (prev > 0.0) CHECK(prev / d == doctest::Approx(4.0).epsilon(0.1));
    prev = d;
  }
}

TEST_CASE("constant-K solution and its dilations solve the radial equation") {
  for (auto [a, b] : {std::pair{0.0, 0.0}, std::pair{0.2, 0.3}, std::pair{-0.5, -0.2}}) {
    const WeightParams w = validate(3, a, b);
    const ConstantKSolution s = constant_k_solution(w);
    const double wexp = 2.0 - 2.0 * a;
    for (double lambda : {1.0, 2.0, 0.3}) {
      const auto ul = dilate(w, [s](double r) { return s.u(r); }, lambda);
      for (double r : {0.3, 0.7, 1.4}) {
        const double lhs = flux_divergence(ul, wexp, r, 1e-4);
        const double rhs = std::pow(r, 2.0 - w.bp()) * s.K * std::pow(ul(r), w.p() - 1.0);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-5));
      }
    }
  }
  CHECK(constant_k_solution(validate(3, 0, 0)).k == doctest::Approx(2.0));
  CHECK(constant_k_solution(validate(3, 0, 0)).K == doctest::Approx(3.0));
  CHECK_THROWS_AS(constant_k_solution(validate(3, 0, 1)), Error);
}
