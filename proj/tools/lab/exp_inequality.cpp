#include <cmath>

#include "ckn/error.hpp"
#include "ckn/fields.hpp"
#include "ckn/format.hpp"
#include "ckn/inequality.hpp"
#include "ckn/solver.hpp"
#include "experiments.hpp"

namespace lab {

using ckn::format_double;

namespace {

std::shared_ptr<const ckn::Discretization> cube(const ckn::WeightParams& params, int cells) {
  return ckn::make_discretization(params, ckn::BoxGrid({-1.0, -1.0, -1.0}, {1.0, 1.0, 1.0}, {cells, cells, cells}));
}

struct SuiteSettings {
  ckn::WeightParams params;
  std::uint64_t seed;
  int cells0;
  int levels;
  double frozen;
  double stability;
};

SuiteSettings suite_settings(const Config& cfg, const std::string& prefix) {
  SuiteSettings s{params_from(cfg), cfg.get_seed(), cfg.get_int("grid.cells", 32), cfg.get_int("grid.levels", 2),
                  cfg.get_double(prefix + ".frozen_constant", 0.0), cfg.get_double("check.stability", 0.02)};
  if (s.params.N() != 3) throw ConfigError("key 'params.N': the field suite runs on N = 3 box grids");
  if (s.levels < 1) throw ConfigError("key 'grid.levels': need at least one level");
  return s;
}

// Shared driver: runs `suite` on each refinement level and checks frozen-constant
// violations and refinement stability of the maximum.
template <typename SuiteFn>
Outcome run_suite(const SuiteSettings& s, Reporter& rep, const std::string& stem, SuiteFn&& suite) {
  auto summary = rep.open(stem + "_summary.csv");
  summary << "level,cells,samples,max_ratio,argmax,violations\n";
  Outcome o;
  o.passed = true;
  std::vector<double> maxima;
  for (int level = 0; level < s.levels; ++level) {
    const int cells = s.cells0 << level;
    const ckn::SuiteResult res = suite(cube(s.params, cells), s.seed);
    int violations = 0;
    if (s.frozen > 0.0) {
      for (const auto& smp : res.samples) violations += smp.ratio > s.frozen ? 1 : 0;
    }
    auto csv = rep.open(stem + "_ratios_L" + std::to_string(level) + ".csv");
    ckn::write_ratio_csv(csv, res.samples);
    summary << level << ',' << cells << ',' << res.samples.size() << ',' << format_double(res.max_ratio) << ",\""
            << res.argmax << "\"," << violations << '\n';
    o.lines.push_back("cells=" + std::to_string(cells) + " max ratio=" + format_double(res.max_ratio) + " (" +
                      res.argmax + "), violations=" + std::to_string(violations));
    if (violations > 0) o.passed = false;
    maxima.push_back(res.max_ratio);
  }
  for (std::size_t k = 1; k < maxima.size(); ++k) {
    const double drift = std::abs(maxima[k] / maxima[k - 1] - 1.0);
    o.lines.push_back("refinement drift of the maximum: " + format_double(drift));
    if (!(drift <= s.stability)) o.passed = false;
  }
  return o;
}

}  // namespace

Outcome run_ckn_suite(const Config& cfg, Reporter& rep, const RunOptions&) {
  const SuiteSettings s = suite_settings(cfg, "ckn");
  const int radial_cells = cfg.get_int("invariance.cells", 512);
  const double lambda = cfg.get_double("invariance.lambda", 2.0);
  const double inv_tol = cfg.get_double("check.invariance", 1e-6);
  cfg.check_unused();

  Outcome o = run_suite(s, rep, "ckn", [](const auto& disc, std::uint64_t seed) { return ckn::ckn_suite(disc, seed); });

  // Scale and dilation invariance on a radial grid: the dilated field on the
  // grid scaled by 1/lambda has the same nodal values up to the dilation factor.
  const auto grid = ckn::RadialGrid::make(0.0, 1.0, radial_cells);
  const auto disc = ckn::make_discretization(s.params, grid);
  const auto scaled_disc = ckn::make_discretization(s.params, grid.scaled(1.0 / lambda));
  auto bump = [](double r) { return r < 1.0 ? (1.0 - r * r) * (1.0 - r * r) : 0.0; };
  const auto u = ckn::DiscreteField::sample_radial(disc, bump);
  const auto ul = ckn::DiscreteField::sample_radial(
      scaled_disc, ckn::dilate(s.params, bump, lambda));
  const double base = ckn::ckn_ratio(u).ratio;
  const double scale_dev = std::abs(ckn::ckn_ratio(u.scaled(-3.7)).ratio / base - 1.0);
  const double dil_dev = std::abs(ckn::ckn_ratio(ul).ratio / base - 1.0);
  auto inv = rep.open("ckn_invariance.csv");
  inv << "check,ratio,reference,rel_deviation\n";
  inv << "scale," << format_double(ckn::ckn_ratio(u.scaled(-3.7)).ratio) << ',' << format_double(base) << ','
      << format_double(scale_dev) << '\n';
  inv << "dilation," << format_double(ckn::ckn_ratio(ul).ratio) << ',' << format_double(base) << ','
      << format_double(dil_dev) << '\n';
  o.lines.push_back("scale deviation " + format_double(scale_dev) + ", dilation deviation " + format_double(dil_dev));
  if (!(scale_dev <= inv_tol && dil_dev <= inv_tol)) o.passed = false;
  return o;
}

Outcome run_poincare_suite(const Config& cfg, Reporter& rep, const RunOptions&) {
  const SuiteSettings s = suite_settings(cfg, "poincare");
  cfg.check_unused();
  return run_suite(s, rep, "poincare",
                   [](const auto& disc, std::uint64_t seed) { return ckn::poincare_suite(disc, seed); });
}

Outcome run_alpha_h(const Config& cfg, Reporter& rep, const RunOptions&) {
  const int N = cfg.get_int("params.N", 3);
  const auto a_values = cfg.get_list("alpha_h.a_values", {0.0, -0.5, 0.4});
  const int cells = cfg.get_int("grid.cells", 64);
  const double ball_radius = cfg.get_double("alpha_h.ball_radius", 0.9);
  const int n_radii = cfg.get_int("alpha_h.radii", 4);
  const double tol = cfg.get_double("solver.tol", ckn::kDefaultSolverTol);
  const int max_iter = cfg.get_int("solver.max_iter", ckn::kDefaultMaxIter);
  const double classical_min = cfg.get_double("check.classical_min", 0.9);
  const double rms_max = cfg.get_double("check.rms_max", 0.05);
  cfg.check_unused();
  if (N != 3) throw ConfigError("key 'params.N': alpha_h runs on N = 3 box grids");

  auto out = rep.open("alpha_h.csv");
  out << "a,field,lambda,alpha_h,slope,fit_residual,n_samples,pass\n";
  Outcome o;
  o.passed = true;
  for (double a : a_values) {
    const ckn::WeightParams params = [&] {
      try {
        return ckn::validate(N, a, a);
      } catch (const ckn::Error& e) {
        throw ConfigError(std::string("key 'alpha_h.a_values': ") + e.what());
      }
    }();
    const auto disc = cube(params, cells);
    const double lambda = ckn::degree_one_exponent(params);
    struct Probe {
      std::string name;
      std::function<double(const ckn::Point3&)> g;
    };
    std::vector<Probe> probes = {
        {"x1|x|^(lambda-1)", [lambda](const ckn::Point3& x) {
           const double r = ckn::norm(x);
           return r > 0.0 ? x[0] * std::pow(r, lambda - 1.0) : 0.0;
         }}};
    if (a == 0.0) probes.push_back({"x1^2-x2^2", [](const ckn::Point3& x) { return x[0] * x[0] - x[1] * x[1]; }});
    const double h = disc->cell_width();
    std::vector<double> radii;
    for (int k = n_radii; k >= 1; --k) radii.push_back(h * std::ldexp(1.0, k));
    for (const auto& probe : probes) {
      const auto g = ckn::DiscreteField::sample(disc, probe.g);
      const auto w = ckn::harmonic_replacement(g, ckn::BallSpec{{0.0, 0.0, 0.0}, ball_radius}, tol, max_iter);
      const auto est = ckn::estimate_alpha_h(w, {0.0, 0.0, 0.0}, radii);
      const bool ok = a == 0.0 ? est.alpha_h >= classical_min
                               : (est.alpha_h > 0.0 && est.alpha_h <= 1.0 && est.fit_residual <= rms_max);
      o.passed = o.passed && ok;
      out << format_double(a) << ",\"" << probe.name << "\"," << format_double(lambda) << ','
          << format_double(est.alpha_h) << ',' << format_double(est.slope) << ',' << format_double(est.fit_residual)
          << ',' << est.n_samples << ',' << (ok ? 1 : 0) << '\n';
      o.lines.push_back("a=" + format_double(a) + " " + probe.name + ": alpha_h=" + format_double(est.alpha_h) +
                        " slope=" + format_double(est.slope) + " rms=" + format_double(est.fit_residual));
    }
  }
  return o;
}

}  // namespace lab
