#include <array>
#include <cmath>

#include "ckn/error.hpp"
#include "ckn/fields.hpp"
#include "ckn/format.hpp"
#include "ckn/inequality.hpp"
#include "ckn/rng.hpp"
#include "ckn/solver.hpp"
#include "experiments.hpp"

namespace lab {

using ckn::format_double;

namespace {

ckn::Spacing spacing_from(const Config& cfg) {
  const std::string s = cfg.get_string("grid.spacing", "uniform");
  if (s == "uniform") return ckn::Spacing::uniform;
  if (s == "geometric") return ckn::Spacing::geometric;
  throw ConfigError("key 'grid.spacing': expected uniform or geometric, got '" + s + "'");
}

double observed_order(double coarse, double fine) { return std::log2(coarse / fine); }

}  // namespace

Outcome run_mms_convergence(const Config& cfg, Reporter& rep, const RunOptions&) {
  const ckn::WeightParams params = params_from(cfg);
  const double gamma = cfg.get_double("mms.gamma", 0.0);
  const double r_outer = cfg.get_double("mms.r_outer", 1.0);
  const double r_min = cfg.get_double("grid.r_min", 0.0);
  const int n0 = cfg.get_int("grid.n0", 128);
  const int levels = cfg.get_int("grid.levels", 5);
  const ckn::Spacing spacing = spacing_from(cfg);
  const double tol = cfg.get_double("solver.tol", ckn::kDefaultSolverTol);
  const int max_iter = cfg.get_int("solver.max_iter", ckn::kDefaultMaxIter);
  const double order_min = cfg.get_double("check.order_min", 1.8);
  const double order_max = cfg.get_double("check.order_max", 2.5);
  const double max_error = cfg.get_double("check.max_error", 1e-5);
  cfg.check_unused();
  if (levels < 2) throw ConfigError("key 'grid.levels': need at least 2 levels");

  const ckn::RadialMms mms = ckn::exact_radial_mms(params, gamma, r_outer);
  auto out = rep.open("mms_convergence.csv");
  out << "level,h,max_error,observed_order\n";
  Outcome o;
  o.passed = true;
  double prev = 0.0;
  double last = 0.0;
  for (int level = 0; level < levels; ++level) {
    const int n = n0 << level;
    const auto disc = ckn::make_discretization(params, ckn::RadialGrid::make(r_min, r_outer, n, spacing));
    const auto f = ckn::DiscreteField::sample_radial(disc, [&](double r) { return mms.f(r); }, "f");
    const auto exact = ckn::DiscreteField::sample_radial(disc, [&](double r) { return mms.u(r); }, "u_exact");
    const ckn::Solution sol = ckn::solve(ckn::assemble(f, exact), tol, max_iter);
    if (!sol.report.converged) {
      o.passed = false;
      o.lines.push_back("level " + std::to_string(level) + ": solver did not converge");
    }
    double err = 0.0;
    for (std::size_t i = 0; i < exact.size(); ++i) err = std::max(err, std::abs(sol.u[i] - exact[i]));
    const double h = disc->cell_width();
    out << level << ',' << format_double(h) << ',' << format_double(err) << ',';
    if (level > 0) {
      const double order = observed_order(prev, err);
      out << format_double(order);
      if (!(order >= order_min && order <= order_max)) o.passed = false;
      o.lines.push_back("n=" + std::to_string(n) + " max_error=" + format_double(err) +
                        " order=" + format_double(order));
    } else {
      o.lines.push_back("n=" + std::to_string(n) + " max_error=" + format_double(err));
    }
    out << '\n';
    prev = err;
    last = err;
  }
  if (!(last <= max_error)) o.passed = false;
  return o;
}

Outcome run_harmonic_replacement(const Config& cfg, Reporter& rep, const RunOptions&) {
  const ckn::WeightParams params = params_from(cfg);
  const std::uint64_t seed = cfg.get_seed();
  const int cells = cfg.get_int("grid.cells", 16);
  const int cases = cfg.get_int("harmonic.cases", 50);
  const double tol = cfg.get_double("solver.tol", ckn::kDefaultSolverTol);
  const int max_iter = cfg.get_int("solver.max_iter", ckn::kDefaultMaxIter);
  cfg.check_unused();
  if (params.N() != 3) throw ConfigError("key 'params.N': harmonic_replacement runs on N = 3 box grids");

  const auto disc =
      ckn::make_discretization(params, ckn::BoxGrid({-1.0, -1.0, -1.0}, {1.0, 1.0, 1.0}, {cells, cells, cells}));
  ckn::Rng rng(seed);
  auto out = rep.open("harmonic_replacement.csv");
  out << "case,cx,cy,cz,radius,energy_u,energy_w,energy_u_minus_w,idempotence_gap,minimal,pythagoras\n";
  int minimal_failures = 0;
  int pyth_failures = 0;
  double worst_gap = 0.0;
  for (int c = 0; c < cases; ++c) {
    std::array<double, 3> k{};
    for (double& v : k) v = rng.uniform(-3.0, 3.0);
    const double phase = rng.uniform(0.0, 6.283185307179586);
    const double lin = rng.uniform(-1.0, 1.0);
    const double quad = rng.uniform(-1.0, 1.0);
    const auto u = ckn::DiscreteField::sample(disc, [&](const ckn::Point3& x) {
      return std::sin(k[0] * x[0] + k[1] * x[1] + k[2] * x[2] + phase) + lin * x[0] + quad * x[1] * x[2];
    });
    const double radius = rng.uniform(0.3, 0.55);
    std::vector<double> center(3);
    for (double& v : center) v = rng.uniform(-0.95 + radius, 0.95 - radius);
    const ckn::BallSpec ball{center, radius};
    const auto w = ckn::harmonic_replacement(u, ball, tol, max_iter);
    const auto w2 = ckn::harmonic_replacement(w, ball, tol, max_iter);
    const double eu = ckn::dirichlet_energy(u);
    const double ew = ckn::dirichlet_energy(w);
    const double ediff = ckn::dirichlet_energy(u.minus(w));
    const double gap = std::abs(ckn::dirichlet_energy(w2) - ew) / ew;
    const bool minimal = ew <= eu;
    const bool pyth = ediff + ew <= eu * (1.0 + 1e-9);
    minimal_failures += minimal ? 0 : 1;
    pyth_failures += pyth ? 0 : 1;
    worst_gap = std::max(worst_gap, gap);
    out << c << ',' << format_double(center[0]) << ',' << format_double(center[1]) << ','
        << format_double(center[2]) << ',' << format_double(radius) << ',' << format_double(eu) << ','
        << format_double(ew) << ',' << format_double(ediff) << ',' << format_double(gap) << ',' << (minimal ? 1 : 0)
        << ',' << (pyth ? 1 : 0) << '\n';
  }
  Outcome o;
  o.passed = minimal_failures == 0 && pyth_failures == 0 && worst_gap <= tol;
  o.lines.push_back("cases: " + std::to_string(cases) + ", minimality failures: " + std::to_string(minimal_failures) +
                    ", Pythagoras failures: " + std::to_string(pyth_failures) +
                    ", worst idempotence gap: " + format_double(worst_gap));
  return o;
}

Outcome run_fundamental_solution(const Config& cfg, Reporter& rep, const RunOptions&) {
  const int N = cfg.get_int("params.N", 3);
  const auto a_values = cfg.get_list("fundamental.a_values", {-0.5, 0.0, 0.4});
  const double r_min = cfg.get_double("grid.r_min", 0.5);
  const double r_max = cfg.get_double("grid.r_max", 1.0);
  const int n0 = cfg.get_int("grid.n0", 32);
  const int levels = cfg.get_int("grid.levels", 4);
  const double ratio_min = cfg.get_double("check.ratio_min", 3.3);
  cfg.check_unused();
  if (!(r_min > 0.0)) throw ConfigError("key 'grid.r_min': the annulus must avoid the origin");

  auto out = rep.open("fundamental_solution.csv");
  out << "a,level,n,h,dual_norm,ratio\n";
  Outcome o;
  o.passed = true;
  for (double a : a_values) {
    ckn::WeightParams params = [&] {
      try {
        return ckn::validate(N, a, a);
      } catch (const ckn::Error& e) {
        throw ConfigError(std::string("key 'fundamental.a_values': ") + e.what());
      }
    }();
    const double expo = 2.0 + 2.0 * a - N;
    double prev = 0.0;
    double worst = ckn::kInfinity;
    for (int level = 0; level < levels; ++level) {
      const int n = n0 << level;
      const auto disc = ckn::make_discretization(params, ckn::RadialGrid::make(r_min, r_max, n));
      const auto u = ckn::DiscreteField::sample_radial(disc, [&](double r) { return std::pow(r, expo); });
      const auto zero = ckn::DiscreteField::constant(disc, 0.0);
      const double dual = ckn::residual(u, zero).dual_norm;
      out << format_double(a) << ',' << level << ',' << n << ',' << format_double(disc->cell_width()) << ','
          << format_double(dual) << ',';
      if (level > 0) {
        const double ratio = prev / dual;
        worst = std::min(worst, ratio);
        out << format_double(ratio);
      }
      out << '\n';
      prev = dual;
    }
    if (!(worst >= ratio_min)) o.passed = false;
    o.lines.push_back("a=" + format_double(a) + " worst reduction per halving: " + format_double(worst));
  }
  return o;
}

Outcome run_dilation_symmetry(const Config& cfg, Reporter& rep, const RunOptions&) {
  const ckn::WeightParams params = params_from(cfg);
  const double lambda = cfg.get_double("dilation.lambda", 2.0);
  const double r_max = cfg.get_double("grid.r_max", 1.0);
  const int n0 = cfg.get_int("grid.n0", 64);
  const int levels = cfg.get_int("grid.levels", 5);
  const double order_min = cfg.get_double("check.order_min", 1.8);
  cfg.check_unused();

  const ckn::ConstantKSolution cw = ckn::constant_k_solution(params);
  const auto u_lambda = ckn::dilate(params, [cw](double r) { return cw.u(r); }, lambda);
  const double p = params.p();
  auto out = rep.open("dilation_symmetry.csv");
  out << "level,n,h,dual_norm,order\n";
  Outcome o;
  o.passed = true;
  o.lines.push_back("k=" + format_double(cw.k) + " K=" + format_double(cw.K) + " lambda=" + format_double(lambda));
  double prev = 0.0;
  double worst = ckn::kInfinity;
  for (int level = 0; level < levels; ++level) {
    const int n = n0 << level;
    const auto disc = ckn::make_discretization(params, ckn::RadialGrid::make(0.0, r_max, n));
    const auto u = ckn::DiscreteField::sample_radial(disc, u_lambda);
    const auto f = ckn::DiscreteField::sample_radial(disc, [&](double r) { return cw.K * std::pow(u_lambda(r), p - 1.0); });
    const double dual = ckn::residual(u, f).dual_norm;
    out << level << ',' << n << ',' << format_double(disc->cell_width()) << ',' << format_double(dual) << ',';
    if (level > 0) {
      const double order = std::log2(prev / dual);
      worst = std::min(worst, order);
      out << format_double(order);
    }
    out << '\n';
    prev = dual;
  }
  o.passed = worst >= order_min;
  o.lines.push_back("worst observed order: " + format_double(worst));
  return o;
}

}  // namespace lab
