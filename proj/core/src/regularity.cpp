#include "ckn/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "ckn/error.hpp"
#include "ckn/fields.hpp"
#include "ckn/format.hpp"
#include "ckn/rng.hpp"
#include "ckn/solver.hpp"

namespace ckn {

FitResult fit_growth(const GrowthProfile& profile, Normalization normalization) {
  const std::size_t n = profile.radii.size();
  if (profile.values.size() != n) throw Error(Errc::invalid_argument, "profile values and radii differ in length");
  const bool normalized = normalization == Normalization::measure_normalized;
  if (normalized && profile.measures.size() != n) throw Error(Errc::invalid_argument, "profile lacks measures");
  FitResult fit;
  std::vector<double> x;
  std::vector<double> y;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = profile.values[i];
    if (!std::isfinite(v) || v < 0.0) throw Error(Errc::nonfinite_value, "profile values must be finite and >= 0");
    if (v == 0.0) {
      ++fit.dropped;
      continue;
    }
    x.push_back(std::log(profile.radii[i]));
    y.push_back(std::log(normalized ? v / profile.measures[i] : v));
  }
  if (fit.dropped > 0) fit.notes.push_back("dropped " + std::to_string(fit.dropped) + " zero values");
  if (x.size() < 3) throw Error(Errc::insufficient_points, "growth fit needs >= 3 positive values");
  const LineFit line = fit_line(x, y);
  fit.exponent = line.slope;
  fit.log_constant = line.intercept;
  fit.rms_residual = line.rms;
  if (normalized) {
    fit.has_alpha = true;
    fit.alpha = profile.kind == ProfileKind::campanato ? 0.5 * line.slope : 0.5 * (line.slope + 2.0);
    if (fit.alpha > 1.0) {
      fit.clamped = true;
      fit.notes.push_back("alpha > 1 (Lipschitz or better at this scale), used as 1");
    }
  }
  return fit;
}

double center_boundary_distance(const Discretization& disc, const std::vector<double>& center) {
  // Probe with a tiny ball: the discretization knows its own domain.
  double lo = 0.0;
  double hi = 0.0;
  for (std::size_t i = 0; i < disc.num_nodes(); ++i) hi = std::max(hi, disc.radius(i));
  hi = 4.0 * hi + 1.0;
  if (!disc.ball_inside(BallSpec{center, 1e-300})) return 0.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (disc.ball_inside(BallSpec{center, mid}) ? lo : hi) = mid;
  }
  return lo;
}

std::vector<double> default_radii(const Discretization& disc, const std::vector<double>& center) {
  const double d = center_boundary_distance(disc, center);
  const double floor = 8.0 * disc.cell_width();
  std::vector<double> radii;
  for (double r = 0.5 * d; r >= floor * (1.0 - 1e-12); r *= 0.5) radii.push_back(r);
  return radii;
}

HolderQuotient holder_quotient(const DiscreteField& u, double margin, double alpha, std::uint64_t seed) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw Error(Errc::invalid_argument, "alpha must lie in (0, 1]");
  if (!(margin > 0.0)) throw Error(Errc::invalid_argument, "margin must be positive");
  const Discretization& disc = u.discretization();
  std::vector<std::size_t> nodes;
  for (std::size_t i = 0; i < disc.num_nodes(); ++i) {
    if (disc.boundary_distance(i) >= margin) nodes.push_back(i);
  }
  if (nodes.empty()) throw Error(Errc::empty_subdomain, "no nodes at the requested margin");
  HolderQuotient hq;
  for (std::size_t i : nodes) hq.sup_norm = std::max(hq.sup_norm, std::abs(u[i]));
  auto consider = [&](std::size_t i, std::size_t j) {
    const double d = disc.node_distance(i, j);
    if (!(d > 0.0)) return;
    const double q = std::abs(u[i] - u[j]) / std::pow(d, alpha);
    ++hq.pairs;
    if (q > hq.seminorm) {
      hq.seminorm = q;
      hq.arg_i = i;
      hq.arg_j = j;
    }
  };
  if (nodes.size() <= kAllPairsLimit) {
    for (std::size_t a = 0; a < nodes.size(); ++a)
      for (std::size_t b = a + 1; b < nodes.size(); ++b) consider(nodes[a], nodes[b]);
  } else {
    Rng rng(seed);
    for (std::size_t k = 0; k < kSampledPairs; ++k) {
      const std::size_t a = nodes[rng.below(nodes.size())];
      const std::size_t b = nodes[rng.below(nodes.size())];
      consider(a, b);
    }
  }
  return hq;
}

RegularityReport regularity_report(const DiscreteField& u, const DiscreteField& f, double s_used,
                                   const std::vector<double>& center, const std::vector<double>& radii,
                                   double alpha_h_estimate, double holder_margin, std::uint64_t seed) {
  require_same_grid(u, f);
  const WeightParams params = u.params().with_s(s_used, Mode::holder);
  RegularityReport rep;
  rep.slack = kRegularitySlack;
  const ResidualReport res = residual(u, f);
  const double energy = std::sqrt(dirichlet_energy(u));
  rep.relative_residual = energy > 0.0 ? res.dual_norm / energy : res.dual_norm;
  rep.profile = gradient_profile(u, center, radii);
  rep.fit = fit_growth(rep.profile, Normalization::measure_normalized);
  rep.alpha_fit = rep.fit.alpha;
  rep.alpha_measured = rep.fit.alpha_used();
  const HolderBound hb = holder_bound(params, alpha_h_estimate);
  rep.alpha_predicted_sup = hb.alpha_sup;
  rep.limiting_branch = hb.limiting_branch;
  rep.pass = rep.alpha_measured >= rep.alpha_predicted_sup - rep.slack;
  rep.holder_alpha = 0.95 * std::min(std::max(rep.alpha_measured, 1e-6), rep.alpha_predicted_sup);
  const HolderQuotient hq = holder_quotient(u, holder_margin, rep.holder_alpha, seed);
  rep.holder_seminorm = hq.seminorm;
  rep.sup_norm = hq.sup_norm;
  return rep;
}

void write_profile_csv(std::ostream& out, const GrowthProfile& profile) {
  out << "radius,value,measure\n";
  for (std::size_t i = 0; i < profile.radii.size(); ++i) {
    out << format_double(profile.radii[i]) << ',' << format_double(profile.values[i]) << ','
        << format_double(i < profile.measures.size() ? profile.measures[i] : 0.0) << '\n';
  }
}

}  // namespace ckn
