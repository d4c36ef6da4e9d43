#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ckn/grid.hpp"
#include "ckn/params.hpp"
#include "ckn/profile.hpp"

namespace ckn {

enum class Normalization { raw, measure_normalized };

struct FitResult {
  double exponent = 0.0;      ///< slope of log value (or log value/mu) against log r
  double log_constant = 0.0;  ///< fitted intercept
  double rms_residual = 0.0;
  /// Hoelder readout (measure_normalized only): slope/2 for campanato,
  /// (slope + 2)/2 for gradient energy.
  double alpha = 0.0;
  bool has_alpha = false;
  /// alpha > 1 is reported as is and used as 1 in comparisons.
  bool clamped = false;
  int dropped = 0;  ///< zero values removed before fitting
  std::vector<std::string> notes;

  double alpha_used() const noexcept { return clamped ? 1.0 : alpha; }
};

/// Least-squares power-law fit of a growth profile. Zero values are dropped
/// with a note; fewer than 3 remaining points throw insufficient_points.
FitResult fit_growth(const GrowthProfile& profile, Normalization normalization);

/// Distance from a point to the boundary of the grid's domain.
double center_boundary_distance(const Discretization& disc, const std::vector<double>& center);

/// Geometric ladder with ratio 1/2 from dist(center, boundary)/2 down to 8 cell widths.
std::vector<double> default_radii(const Discretization& disc, const std::vector<double>& center);

struct HolderQuotient {
  double seminorm = 0.0;
  double sup_norm = 0.0;
  std::size_t arg_i = 0;
  std::size_t arg_j = 0;
  std::size_t pairs = 0;
};

inline constexpr std::size_t kAllPairsLimit = 2000;
inline constexpr std::size_t kSampledPairs = 2000000;

/// max |u(x) - u(y)| / |x - y|^alpha over nodes at distance >= margin from the
/// boundary (all pairs up to 2000 nodes, else 2e6 seeded random pairs), and
/// sup |u| over the same nodes.
HolderQuotient holder_quotient(const DiscreteField& u, double margin, double alpha, std::uint64_t seed = 1);

struct RegularityReport {
  double alpha_measured = 0.0;  ///< clamped readout used in the comparison
  double alpha_fit = 0.0;       ///< unclamped readout
  double alpha_predicted_sup = 0.0;
  LimitingBranch limiting_branch = LimitingBranch::unit;
  double holder_alpha = 0.0;
  double holder_seminorm = 0.0;
  double sup_norm = 0.0;
  double relative_residual = 0.0;
  double slack = 0.1;
  bool pass = false;
  FitResult fit;
  GrowthProfile profile;
};

inline constexpr double kRegularitySlack = 0.1;

/// Gradient profile + measure-normalized fit, compared against holder_bound()
/// for the integrability exponent s_used. pass = alpha_measured >= sup - slack.
RegularityReport regularity_report(const DiscreteField& u, const DiscreteField& f, double s_used,
                                   const std::vector<double>& center, const std::vector<double>& radii,
                                   double alpha_h_estimate, double holder_margin, std::uint64_t seed = 1);

/// `radius,value,measure` rows.
void write_profile_csv(std::ostream& out, const GrowthProfile& profile);

}  // namespace ckn
