#include "ckn/moser.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <ostream>

#include "ckn/error.hpp"
#include "ckn/fields.hpp"
#include "ckn/format.hpp"
#include "ckn/measure.hpp"
#include "ckn/radial_math.hpp"
#include "ckn/solver.hpp"

namespace ckn {
namespace {

constexpr int kSubsteps = 4;
constexpr int kMaxTauSteps = 8;
constexpr double kCheckTol = 1e-12;

double exponent_of(const WeightParams& params) {
  if (!(params.p() > 2.0)) throw Error(Errc::degenerate_exponent, "smallness condition needs p > 2");
  return params.p() / (params.p() - 2.0);
}

std::vector<char> margin_mask(const Discretization& disc, double margin) {
  std::vector<char> mask(disc.num_nodes(), 0);
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = disc.boundary_distance(i) >= margin ? 1 : 0;
  return mask;
}

}  // namespace

PotentialSplit smallness_check(const DiscreteField& V, double ell, double ckn_constant, double q) {
  if (!(ell > 0.0)) throw Error(Errc::nonpositive_ell, "ell must be positive");
  if (!(ckn_constant > 0.0)) throw Error(Errc::invalid_argument, "CKN constant must be positive");
  const WeightParams& params = V.params();
  const double e = exponent_of(params);
  PotentialSplit out;
  out.ell = ell;
  out.ckn_constant = ckn_constant;
  out.q = q > 0.0 ? q : params.p();
  const Discretization& disc = V.discretization();
  const auto& m = disc.source_masses();
  for (std::size_t i = 0; i < V.size(); ++i) {
    const double v = std::abs(V[i]);
    if (v == 0.0) continue;
    const double w = m[i] * std::pow(v, e);
    if (v >= ell) out.tail_mass += w;
    if (disc.radius(i) >= ell) out.tail_mass += w;
  }
  out.bound_required = std::pow(std::min(0.125, 2.0 / (out.q + 4.0)) / ckn_constant, e);
  out.satisfied = out.tail_mass <= out.bound_required;
  return out;
}

std::optional<double> find_ell(const DiscreteField& V, double ckn_constant, double q) {
  for (int k = 0; k < kEllSteps; ++k) {
    const double ell = std::ldexp(kEllStart, k);
    if (smallness_check(V, ell, ckn_constant, q).satisfied) return ell;
  }
  return std::nullopt;
}

LadderReport run_ladder(const DiscreteField& u, const DiscreteField& K, int k_stop, double margin0,
                        double residual_tol, double interpolation_tol) {
  require_same_grid(u, K);
  const WeightParams& params = u.params();
  const double p = params.p();
  if (!(p > 2.0)) throw Error(Errc::degenerate_exponent, "ladder needs p > 2");
  LadderReport rep;
  rep.k0 = k0_threshold(p);
  if (k_stop < rep.k0) throw Error(Errc::invalid_argument, "k_stop must be at least k0");
  if (!(margin0 > 0.0)) throw Error(Errc::invalid_argument, "margin0 must be positive");

  std::vector<double> fv(u.size());
  for (std::size_t i = 0; i < fv.size(); ++i) fv[i] = K[i] * std::pow(std::abs(u[i]), p - 2.0) * u[i];
  const ResidualReport res = residual(u, DiscreteField(u.discretization_ptr(), std::move(fv)));
  const double energy = std::sqrt(dirichlet_energy(u));
  rep.relative_residual = energy > 0.0 ? res.dual_norm / energy : res.dual_norm;
  if (!(rep.relative_residual <= residual_tol)) {
    throw Error(Errc::residual_too_large, "u does not solve the equation to the requested tolerance");
  }

  const auto qs = moser_ladder(p, k_stop);
  const double e = params.source_exponent();
  const Discretization& disc = u.discretization();
  rep.all_finite = true;
  for (int k = 0; k <= k_stop; ++k) {
    LadderState st;
    st.k = k;
    st.q = qs[static_cast<std::size_t>(k)];
    st.margin = margin0 * (1.0 + k) / (k_stop + 1.0);
    const auto mask = margin_mask(disc, st.margin);
    st.nodes = static_cast<std::size_t>(std::count(mask.begin(), mask.end(), 1));
    if (st.nodes == 0) throw Error(Errc::empty_subdomain, "ladder subdomain has no nodes");
    st.norm_q = lq_norm(u, st.q, e, mask);
    rep.all_finite = rep.all_finite && std::isfinite(st.norm_q);
    rep.states.push_back(st);
  }
  rep.interpolation_ok = true;
  for (int k = 1; k < k_stop; ++k) {
    const auto mask = margin_mask(disc, rep.states[static_cast<std::size_t>(k + 1)].margin);
    const double q0 = qs[static_cast<std::size_t>(k - 1)];
    const double q1 = qs[static_cast<std::size_t>(k)];
    const double q2 = qs[static_cast<std::size_t>(k + 1)];
    const double theta = (1.0 / q1 - 1.0 / q2) / (1.0 / q0 - 1.0 / q2);
    InterpolationCheck c;
    c.k = k;
    c.lhs = lq_norm(u, q1, e, mask);
    c.rhs = std::pow(lq_norm(u, q0, e, mask), theta) * std::pow(lq_norm(u, q2, e, mask), 1.0 - theta);
    c.ok = c.lhs <= c.rhs * (1.0 + interpolation_tol);
    rep.interpolation_ok = rep.interpolation_ok && c.ok;
    rep.checks.push_back(c);
  }
  return rep;
}

IterationEnvelope lemma_a2_constant(double A1, double A2, double alpha, double beta, double gamma,
                                    double doubling) {
  if (!(0.0 < alpha && alpha < gamma && gamma < beta)) {
    throw Error(Errc::exponent_order_violation, "need 0 < alpha < gamma < beta");
  }
  if (!(A1 > 0.0 && A2 > 0.0)) throw Error(Errc::invalid_argument, "A1 and A2 must be positive");
  if (!(doubling >= 1.0)) throw Error(Errc::invalid_argument, "doubling constant must be >= 1");
  IterationEnvelope env;
  env.A1 = A1;
  env.A2 = A2;
  env.alpha = alpha;
  env.beta = beta;
  env.gamma = gamma;
  env.tau = std::min(std::pow(A1, -1.0 / (gamma - alpha)), 0.5);
  env.doubling = doubling;
  const double D = doubling;
  env.constant = std::max(D, D * D * D / (env.tau * (1.0 - std::pow(env.tau, beta - gamma))));
  return env;
}

IterationEnvelope random_envelope(Rng& rng) {
  for (;;) {
    std::array<double, 3> e{rng.uniform(0.1, 4.0), rng.uniform(0.1, 4.0), rng.uniform(0.1, 4.0)};
    std::sort(e.begin(), e.end());
    const double A1 = rng.uniform(0.5, 8.0);
    const double A2 = rng.uniform(0.01, 10.0);
    if (!(e[0] < e[1] && e[1] < e[2])) continue;
    IterationEnvelope env = lemma_a2_constant(A1, A2, e[0], e[2], e[1]);
    if (env.tau >= 1e-4) return env;
  }
}

std::string_view to_string(PhiKind kind) noexcept {
  switch (kind) {
    case PhiKind::saturating: return "saturating";
    case PhiKind::random: return "random";
    case PhiKind::power_capped: return "power_capped";
    case PhiKind::step: return "step";
  }
  return "unknown";
}

LemmaA2Report lemma_a2_property_check(const IterationEnvelope& envelope, const MeasureFamily& family, double R,
                                      int n_trials, std::uint64_t seed) {
  if (!(R > 0.0)) throw Error(Errc::nonpositive_radius, "R must be positive");
  if (n_trials < 0) throw Error(Errc::invalid_argument, "n_trials must be >= 0");
  const double tau = envelope.tau;
  const int steps = std::clamp(static_cast<int>(std::floor(std::log(1e-12) / std::log(tau))), 2, kMaxTauSteps);
  const int n = steps * kSubsteps + 1;
  const double log_tau = std::log(tau);
  const int N = family.params.N();

  LemmaA2Report rep;
  rep.radii.resize(static_cast<std::size_t>(n));
  std::vector<double> mu(static_cast<std::size_t>(n));
  std::vector<double> center(static_cast<std::size_t>(N), 0.0);
  center[0] = family.center_offset;
  for (int i = 0; i < n; ++i) {
    const double rho = R * std::exp(log_tau * i / kSubsteps);
    rep.radii[static_cast<std::size_t>(i)] = rho;
    mu[static_cast<std::size_t>(i)] = family.center_offset == 0.0
                                          ? centered_ball_integral(N, family.params.energy_exponent(), rho)
                                          : ball_measure(family.params, BallSpec{center, rho}, 1e-12).value;
  }
  double D = 1.0;
  for (int i = 0; i + kSubsteps < n; ++i) {
    D = std::max(D, mu[static_cast<std::size_t>(i)] / mu[static_cast<std::size_t>(i + kSubsteps)]);
  }
  rep.envelope = lemma_a2_constant(envelope.A1, envelope.A2, envelope.alpha, envelope.beta, envelope.gamma, D);
  const IterationEnvelope& env = rep.envelope;
  const auto& rho = rep.radii;

  auto hypothesis_rhs = [&](const std::vector<double>& phi, int i, int j) {
    const auto si = static_cast<std::size_t>(i);
    const auto sj = static_cast<std::size_t>(j);
    return env.A1 * mu[si] / mu[sj] * std::pow(rho[si] / rho[sj], -env.alpha) * phi[sj] +
           env.A2 * mu[sj] * std::pow(rho[sj], -env.beta);
  };
  auto self_cap = [&](int i) {
    const auto si = static_cast<std::size_t>(i);
    return env.A1 < 1.0 ? env.A2 * mu[si] * std::pow(rho[si], -env.beta) / (1.0 - env.A1)
                        : std::numeric_limits<double>::infinity();
  };

  rep.trials = n_trials;
  for (int t = 0; t < n_trials; ++t) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
    TrialRecord rec;
    rec.trial = t;
    rec.kind = static_cast<PhiKind>(t % 4);
    const double scale = env.A2 * mu[0] * std::pow(R, -env.beta);
    const double power_c = scale * std::pow(R, -env.beta) * rng.uniform(0.1, 10.0);
    const int cut = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
    std::vector<double> phi(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
      double ub = i == 0 ? scale * rng.uniform(0.1, 10.0) : phi[static_cast<std::size_t>(i - 1)];
      for (int j = 0; j < i; ++j) ub = std::min(ub, hypothesis_rhs(phi, i, j));
      ub = std::min(ub, self_cap(i));
      double v = ub;
      switch (rec.kind) {
        case PhiKind::saturating: break;
        case PhiKind::random: v = ub * rng.uniform(0.5, 1.0); break;
        case PhiKind::power_capped: v = std::min(ub, power_c * std::pow(rho[static_cast<std::size_t>(i)], env.beta)); break;
        case PhiKind::step: v = i < cut ? ub : 0.0; break;
      }
      phi[static_cast<std::size_t>(i)] = v;
    }
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j <= i; ++j) {
        if (phi[static_cast<std::size_t>(i)] > hypothesis_rhs(phi, i, j) * (1.0 + kCheckTol)) ++rec.hypothesis_failures;
      }
    }
    for (int k = 0; k < kLemmaA2PairsPerTrial; ++k) {
      int i = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
      int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
      if (i < j) std::swap(i, j);
      const auto si = static_cast<std::size_t>(i);
      const auto sj = static_cast<std::size_t>(j);
      const double rhs = env.constant * (mu[si] / mu[sj] * std::pow(rho[si] / rho[sj], -env.gamma) * phi[sj] +
                                         env.A2 * mu[si] * std::pow(rho[si], -env.beta));
      const double ratio = phi[si] / rhs;
      ++rec.pairs;
      rec.max_ratio = std::max(rec.max_ratio, ratio);
      if (ratio > 1.0 + kCheckTol) ++rec.violations;
    }
    rep.violations += rec.violations;
    rep.hypothesis_failures += rec.hypothesis_failures;
    rep.max_ratio = std::max(rep.max_ratio, rec.max_ratio);
    rep.records.push_back(rec);
  }
  return rep;
}

void write_trials_csv(std::ostream& out, const std::vector<TrialRecord>& records) {
  out << "trial,kind,pairs,violations,hypothesis_failures,max_ratio\n";
  for (const auto& r : records) {
    out << r.trial << ',' << to_string(r.kind) << ',' << r.pairs << ',' << r.violations << ','
        << r.hypothesis_failures << ',' << format_double(r.max_ratio) << '\n';
  }
}

}  // namespace ckn
