#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ckn/grid.hpp"
#include "ckn/params.hpp"
#include "ckn/rng.hpp"

namespace ckn {

/// The smallness condition on a potential V at threshold ell:
///   \int_{|V|>=ell} |x|^{-bp}|V|^{p/(p-2)} + \int_{|x|>=ell} |x|^{-bp}|V|^{p/(p-2)}
///     <= (min(1/8, 2/(q+4)) / C)^{p/(p-2)}.
struct PotentialSplit {
  double ell = 0.0;
  double tail_mass = 0.0;
  double bound_required = 0.0;
  bool satisfied = false;
  double ckn_constant = 0.0;  ///< C, used for both constants of the condition
  double q = 0.0;
};

/// `ckn_constant` is the empirical constant of
/// (\int |w|^p |x|^{-bp})^{2/p} <= C \int |grad w|^2 |x|^{-2a}, i.e. the
/// square of the largest CKN ratio. q <= 0 selects q = p.
PotentialSplit smallness_check(const DiscreteField& V, double ell, double ckn_constant, double q = 0.0);

inline constexpr double kEllStart = 1e-3;
inline constexpr int kEllSteps = 40;

/// Smallest ell = 1e-3 * 2^k, k = 0..39, passing smallness_check.
std::optional<double> find_ell(const DiscreteField& V, double ckn_constant, double q = 0.0);

struct LadderState {
  int k = 0;
  double q = 0.0;
  double norm_q = 0.0;  ///< weighted L^q norm (weight |x|^{-bp}) over the subdomain
  double margin = 0.0;  ///< subdomain = nodes at distance >= margin from the boundary
  std::size_t nodes = 0;
};

/// Lyapunov interpolation ||u||_q <= ||u||_{q'}^theta ||u||_{q''}^{1-theta}
/// on one subdomain for consecutive ladder exponents q' < q < q''.
struct InterpolationCheck {
  int k = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  bool ok = false;
};

struct LadderReport {
  std::vector<LadderState> states;
  std::vector<InterpolationCheck> checks;
  double relative_residual = 0.0;
  int k0 = 0;
  bool all_finite = false;
  bool interpolation_ok = false;
};

inline constexpr double kLadderResidualTol = 1e-3;

/// Runs the integrability ladder q_{k+1} = p q_k / 2 for k = 0..k_stop on the
/// nested subdomains margin_k = margin0 (1 + k)/(k_stop + 1).
///
/// u must solve -div(|x|^{-2a} grad u) = K |x|^{-bp} |u|^{p-2} u discretely:
/// the energy-dual residual relative to the energy norm of u must stay below
/// residual_tol (residual_too_large). k_stop must be at least k0_threshold(p).
LadderReport run_ladder(const DiscreteField& u, const DiscreteField& K, int k_stop, double margin0,
                        double residual_tol = kLadderResidualTol, double interpolation_tol = 0.01);

struct IterationEnvelope {
  double A1 = 1.0;
  double A2 = 1.0;
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double tau = 0.5;
  double doubling = 1.0;  ///< C_d(tau) of the measure family in use
  double constant = 0.0;  ///< max(C_d, C_d^3 / (tau (1 - tau^{beta-gamma})))
};

/// tau = min(A1^{-1/(gamma-alpha)}, 1/2) and the iteration constant for the
/// given doubling constant. Throws exponent_order_violation unless
/// 0 < alpha < gamma < beta.
IterationEnvelope lemma_a2_constant(double A1, double A2, double alpha, double beta, double gamma,
                                    double doubling = 1.0);

/// Draws alpha < gamma < beta in (0.1, 4), A1 in [0.5, 8], A2 in [0.01, 10],
/// redrawing until tau >= 1e-4.
IterationEnvelope random_envelope(Rng& rng);

/// Balls B_rho(x) with |x| = center_offset (x on the first axis) under mu_a.
struct MeasureFamily {
  WeightParams params;
  double center_offset = 0.0;
};

enum class PhiKind { saturating, random, power_capped, step };

std::string_view to_string(PhiKind kind) noexcept;

struct TrialRecord {
  int trial = 0;
  PhiKind kind = PhiKind::saturating;
  int pairs = 0;
  int violations = 0;
  int hypothesis_failures = 0;
  double max_ratio = 0.0;  ///< max Phi(rho) / (right side of the conclusion)
};

struct LemmaA2Report {
  IterationEnvelope envelope;  ///< with the empirical doubling constant filled in
  std::vector<double> radii;
  int trials = 0;
  int violations = 0;
  int hypothesis_failures = 0;
  double max_ratio = 0.0;
  std::vector<TrialRecord> records;
  bool pass() const noexcept { return violations == 0 && hypothesis_failures == 0; }
};

inline constexpr int kLemmaA2PairsPerTrial = 64;

/// Builds n_trials nonincreasing-in-index Phi on the radii R tau^{i/4}
/// (i = 0..4K, K <= 8 tau-steps) that satisfy the hypothesis at every pair of
/// radii, then checks the conclusion at 64 random pairs with the proof
/// constant. The doubling constant is the largest mu(B_rho)/mu(B_{tau rho})
/// over the radii.
LemmaA2Report lemma_a2_property_check(const IterationEnvelope& envelope, const MeasureFamily& family,
                                      double R, int n_trials, std::uint64_t seed);

/// `trial,kind,pairs,violations,hypothesis_failures,max_ratio` rows.
void write_trials_csv(std::ostream& out, const std::vector<TrialRecord>& records);

}  // namespace ckn
