#include "ckn/inequality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "ckn/error.hpp"
#include "ckn/fields.hpp"
#include "ckn/format.hpp"
#include "ckn/measure.hpp"
#include "ckn/rng.hpp"

namespace ckn {
namespace {

constexpr double kSupport = 0.85;

double safe_ratio(double lhs, double rhs) {
  if (rhs > 0.0) return lhs / rhs;
  return lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
}

BallSpec half_ball(const BallSpec& ball, double factor) { return BallSpec{ball.center, ball.radius * factor}; }

double norm2(const Point3& x) { return x[0] * x[0] + x[1] * x[1] + x[2] * x[2]; }

// C^1 cutoff (1 - |x|^2/R^2)_+^2.
double cutoff(const Point3& x) {
  const double t = 1.0 - norm2(x) / (kSupport * kSupport);
  return t > 0.0 ? t * t : 0.0;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

RatioSample ckn_ratio(const DiscreteField& u, std::string descriptor) {
  const bool zero = std::all_of(u.values().begin(), u.values().end(), [](double v) { return v == 0.0; });
  if (zero) throw Error(Errc::zero_field, "ckn_ratio of the zero field");
  RatioSample s;
  s.lhs = lq_norm(u, u.params().p());
  s.rhs_core = std::sqrt(dirichlet_energy(u));
  s.ratio = safe_ratio(s.lhs, s.rhs_core);
  s.descriptor = std::move(descriptor);
  return s;
}

RatioSample poincare_ratio(const DiscreteField& u, const BallSpec& ball, std::string descriptor) {
  if (u.discretization().nodes_in_ball(ball).empty()) throw Error(Errc::empty_ball, "no nodes in ball");
  RatioSample s;
  s.lhs = ball_variance(u, ball);
  s.rhs_core = ball.radius * ball.radius * dirichlet_energy(u, ball);
  s.ratio = safe_ratio(s.lhs, s.rhs_core);
  s.descriptor = std::move(descriptor);
  return s;
}

RatioSample sup_bound_ratio(const DiscreteField& u, const BallSpec& ball, std::string descriptor) {
  const auto inner = u.discretization().nodes_in_ball(half_ball(ball, 0.5));
  if (inner.empty()) throw Error(Errc::empty_ball, "no nodes in the half ball");
  RatioSample s;
  for (std::size_t i : inner) s.lhs = std::max(s.lhs, std::abs(u[i]));
  std::vector<double> v(u.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = u[i] * u[i];
  s.rhs_core = std::sqrt(weighted_mean(DiscreteField(u.discretization_ptr(), std::move(v)), ball));
  s.ratio = safe_ratio(s.lhs, s.rhs_core);
  s.descriptor = std::move(descriptor);
  return s;
}

RatioSample weak_harnack_check(const DiscreteField& u, const BallSpec& ball, double s_exp, double tol,
                               std::string descriptor) {
  if (!(s_exp > 0.0)) throw Error(Errc::invalid_argument, "s_exp must be positive");
  const Discretization& disc = u.discretization();
  const BallSpec outer = half_ball(ball, 2.0);
  if (!disc.ball_inside(outer)) throw Error(Errc::ball_outside_domain, "B_{2r} must lie inside the domain");
  const auto nodes = disc.nodes_in_ball(outer);
  for (std::size_t i : nodes) {
    if (u[i] < 0.0) throw Error(Errc::negative_field, "field is negative inside B_{2r}");
  }
  // Weak superharmonicity against nonnegative hats: (Au)_i >= 0 up to tol.
  std::vector<double> Au(u.size(), 0.0);
  std::vector<double> scale(u.size(), 0.0);
  disc.for_each_edge([&](std::size_t i, std::size_t j, double c) {
    const double flux = c * (u[i] - u[j]);
    Au[i] += flux;
    Au[j] -= flux;
    const double mag = c * (std::abs(u[i]) + std::abs(u[j]));
    scale[i] += mag;
    scale[j] += mag;
  });
  for (std::size_t i : nodes) {
    if (disc.on_boundary(i)) continue;
    if (Au[i] < -tol * scale[i]) throw Error(Errc::not_superharmonic, "weak residual negative at a node");
  }
  std::vector<double> pw(u.size());
  for (std::size_t i = 0; i < pw.size(); ++i) pw[i] = std::pow(std::max(u[i], 0.0), s_exp);
  RatioSample s;
  s.lhs = std::pow(weighted_mean(DiscreteField(u.discretization_ptr(), std::move(pw)), ball), 1.0 / s_exp);
  const auto inner = disc.nodes_in_ball(half_ball(ball, 0.5));
  if (inner.empty()) throw Error(Errc::empty_ball, "no nodes in B_{r/2}");
  s.rhs_core = std::numeric_limits<double>::infinity();
  for (std::size_t i : inner) s.rhs_core = std::min(s.rhs_core, u[i]);
  s.ratio = safe_ratio(s.lhs, s.rhs_core);
  s.descriptor = std::move(descriptor);
  return s;
}

AlphaHEstimate estimate_alpha_h(const DiscreteField& u, const std::vector<double>& center,
                                const std::vector<double>& radii) {
  if (radii.size() < 3) throw Error(Errc::insufficient_points, "alpha_h fit needs >= 3 radii");
  std::vector<double> x;
  std::vector<double> y;
  for (std::size_t k = 0; k < radii.size(); ++k) {
    if (k > 0 && !(radii[k] < radii[k - 1])) throw Error(Errc::invalid_argument, "radii must strictly decrease");
    const double osc = oscillation(u, BallSpec{center, radii[k]});
    if (osc < 1e-14) throw Error(Errc::degenerate_oscillation, "oscillation below 1e-14");
    x.push_back(std::log(radii[k]));
    y.push_back(std::log(osc));
  }
  const LineFit fit = fit_line(x, y);
  AlphaHEstimate est;
  est.slope = fit.slope;
  est.alpha_h = std::clamp(fit.slope, std::numeric_limits<double>::min(), 1.0);
  est.fit_residual = fit.rms;
  est.n_samples = static_cast<int>(radii.size());
  return est;
}

GrowthProfile energy_decay_profile(const DiscreteField& u, const std::vector<double>& center,
                                   const std::vector<double>& radii) {
  return gradient_profile(u, center, radii);
}

double degree_one_exponent(const WeightParams& params) {
  const double m = params.N() - 2.0 - 2.0 * params.a();
  return 0.5 * (-m + std::sqrt(m * m + 4.0 * (params.N() - 1.0)));
}

std::vector<SuiteField> test_field_suite(std::uint64_t seed) {
  std::vector<SuiteField> suite;
  for (int m = 1; m <= 3; ++m) {
    for (double rho : {0.4, 0.6, 0.8}) {
      suite.push_back({"bump m=" + std::to_string(m) + " rho=" + fmt(rho), [m, rho](const Point3& x) {
                         const double t = 1.0 - norm2(x) / (rho * rho);
                         return t > 0.0 ? std::pow(t, m) : 0.0;
                       }});
    }
  }
  const Point3 shifts[] = {{0.3, 0.0, 0.0}, {0.0, 0.4, 0.0}, {-0.2, 0.2, 0.1}, {0.1, -0.3, 0.3}};
  for (const Point3& c : shifts) {
    suite.push_back({"offset bump c=(" + fmt(c[0]) + " " + fmt(c[1]) + " " + fmt(c[2]) + ")",
                     [c](const Point3& x) {
                       const Point3 d{x[0] - c[0], x[1] - c[1], x[2] - c[2]};
                       const double t = 1.0 - norm2(d) / 0.16;
                       return t > 0.0 ? t * t : 0.0;
                     }});
  }
  using Poly = double (*)(const Point3&);
  const std::pair<const char*, Poly> polys[] = {
      {"1", [](const Point3&) { return 1.0; }},
      {"x1", [](const Point3& x) { return x[0]; }},
      {"x2", [](const Point3& x) { return x[1]; }},
      {"x3", [](const Point3& x) { return x[2]; }},
      {"x1x2", [](const Point3& x) { return x[0] * x[1]; }},
      {"x1^2-x2^2", [](const Point3& x) { return x[0] * x[0] - x[1] * x[1]; }},
      {"1+x1", [](const Point3& x) { return 1.0 + x[0]; }},
      {"x1x2x3", [](const Point3& x) { return x[0] * x[1] * x[2]; }},
      {"x1^2+x2^2", [](const Point3& x) { return x[0] * x[0] + x[1] * x[1]; }},
      {"1+x1+x2^2", [](const Point3& x) { return 1.0 + x[0] + x[1] * x[1]; }},
  };
  for (const auto& [name, poly] : polys) {
    suite.push_back({std::string("cutoff*") + name, [poly](const Point3& x) { return cutoff(x) * poly(x); }});
  }
  for (double beta : {0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0}) {
    suite.push_back({"cutoff*|x|^" + fmt(beta),
                     [beta](const Point3& x) { return cutoff(x) * std::pow(norm2(x), 0.5 * beta); }});
  }
  Rng rng(seed);
  for (int n = 0; n < 20; ++n) {
    struct Mode {
      Point3 k;
      double phase;
      double coef;
    };
    std::vector<Mode> modes(3);
    const double c0 = rng.uniform(-1.0, 1.0);
    for (auto& md : modes) {
      for (double& kc : md.k) kc = rng.uniform(-4.0, 4.0);
      md.phase = rng.uniform(0.0, 2.0 * 3.141592653589793);
      md.coef = rng.uniform(-1.0, 1.0);
    }
    suite.push_back({"fourier #" + std::to_string(n), [c0, modes](const Point3& x) {
                       double v = c0;
                       for (const auto& md : modes) {
                         v += md.coef * std::cos(md.k[0] * x[0] + md.k[1] * x[1] + md.k[2] * x[2] + md.phase);
                       }
                       return cutoff(x) * v;
                     }});
  }
  return suite;
}

std::vector<BallSpec> poincare_suite_balls() {
  return {BallSpec{{0.0, 0.0, 0.0}, 0.5}, BallSpec{{0.0, 0.0, 0.0}, 0.8}, BallSpec{{0.3, 0.2, 0.0}, 0.4},
          BallSpec{{-0.4, 0.0, 0.3}, 0.5}, BallSpec{{0.15, 0.0, 0.0}, 0.6}};
}

namespace {

void update_max(SuiteResult& res, const RatioSample& s) {
  if (std::isfinite(s.ratio) && s.ratio > res.max_ratio) {
    res.max_ratio = s.ratio;
    res.argmax = s.descriptor;
  }
}

}  // namespace

SuiteResult ckn_suite(const std::shared_ptr<const Discretization>& disc, std::uint64_t seed) {
  if (disc->kind() != GridKind::box) throw Error(Errc::invalid_grid, "the test-field suite needs a box grid");
  SuiteResult res;
  for (const auto& field : test_field_suite(seed)) {
    const DiscreteField u = DiscreteField::sample(disc, field.fn, field.descriptor);
    res.samples.push_back(ckn_ratio(u, field.descriptor));
    update_max(res, res.samples.back());
  }
  return res;
}

SuiteResult poincare_suite(const std::shared_ptr<const Discretization>& disc, std::uint64_t seed) {
  if (disc->kind() != GridKind::box) throw Error(Errc::invalid_grid, "the test-field suite needs a box grid");
  SuiteResult res;
  const auto balls = poincare_suite_balls();
  for (const auto& field : test_field_suite(seed)) {
    const DiscreteField u = DiscreteField::sample(disc, field.fn, field.descriptor);
    for (std::size_t b = 0; b < balls.size(); ++b) {
      res.samples.push_back(poincare_ratio(u, balls[b], field.descriptor + " ball#" + std::to_string(b)));
      update_max(res, res.samples.back());
    }
  }
  return res;
}

void write_ratio_csv(std::ostream& out, const std::vector<RatioSample>& samples) {
  out << "descriptor,lhs,rhs_core,ratio\n";
  for (const auto& s : samples) {
    out << '"' << s.descriptor << "\"," << format_double(s.lhs) << ',' << format_double(s.rhs_core) << ','
        << format_double(s.ratio) << '\n';
  }
}

}  // namespace ckn
