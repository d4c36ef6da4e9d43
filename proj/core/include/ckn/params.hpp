#pragma once

#include <limits>
#include <string_view>
#include <vector>

namespace ckn {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// How strictly validate() checks the parameter tuple.
///  - general: the admissible region a < (N-2)/2, a <= b <= a+1.
///  - holder: additionally b < a+1 and s > p/(p-2), as needed for the Hoelder bound.
enum class Mode { general, holder };

/// The tuple (N, a, b, s) together with the critical exponent p.
///
/// Only validate() constructs one, so every instance satisfies the admissible
/// region. s may be +infinity, in which case p/s is taken to be 0.
class WeightParams {
 public:
  int N() const noexcept { return n_; }
  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }
  double s() const noexcept { return s_; }
  double p() const noexcept { return p_; }
  Mode mode() const noexcept { return mode_; }

  /// b < a + 1, the condition under which p > 2.
  bool strict_b() const noexcept { return b_ < a_ + 1.0; }
  double bp() const noexcept { return b_ * p_; }
  /// Exponent of the energy weight, |x|^{-2a}.
  double energy_exponent() const noexcept { return -2.0 * a_; }
  /// Exponent of the source weight, |x|^{-bp}.
  double source_exponent() const noexcept { return -b_ * p_; }
  /// p/s with s = infinity mapped to 0.
  double p_over_s() const noexcept;
  /// p - 2 - p/s, the integrability margin entering the Hoelder bound.
  double integrability_margin() const noexcept { return p_ - 2.0 - p_over_s(); }
  /// Returns a copy with a different integrability exponent, re-validated in `mode`.
  WeightParams with_s(double s, Mode mode) const;

 private:
  friend WeightParams validate(int N, double a, double b, double s, Mode mode);
  WeightParams(int n, double a, double b, double s, double p, Mode mode)
      : n_(n), a_(a), b_(b), s_(s), p_(p), mode_(mode) {}

  int n_;
  double a_;
  double b_;
  double s_;
  double p_;
  Mode mode_;
};

/// p(a, b) = 2N / (N - 2(1 + a - b)), no validation.
double critical_exponent(int N, double a, double b) noexcept;

WeightParams validate(int N, double a, double b, double s = kInfinity, Mode mode = Mode::general);

/// eps = 2(p - 2 - p/s)/p. Throws s_too_small unless s > p/(p-2).
double epsilon_choice(const WeightParams& params);

enum class LimitingBranch { harmonic_exponent, unit, integrability_b_nonneg, integrability_b_neg };

std::string_view to_string(LimitingBranch branch) noexcept;

struct HolderBound {
  double alpha_sup;
  LimitingBranch limiting_branch;
};

/// Open upper bound on the admissible Hoelder exponent.
///
/// alpha_sup = min(alpha_h, 1, B) with B = ((N-2)/2 - a)(p - 2 - p/s) for b >= 0
/// and B = (N/p)(p - 2 - p/s) for b < 0. Ties resolve to the earliest
/// LimitingBranch enumerator; alpha_h == 1 imposes nothing beyond the unit cap
/// and is then reported as `unit`.
HolderBound holder_bound(const WeightParams& params, double alpha_h_estimate);

/// q_0 = p, q_{k+1} = p q_k / 2 for k = 0..k_max.
std::vector<double> moser_ladder(double p, int k_max);
std::vector<double> moser_ladder(const WeightParams& params, int k_max);

/// Smallest k >= 0 with (p/2)^k >= 2(p-1)/(p-2). Requires p > 2.
int k0_threshold(double p);
int k0_threshold(const WeightParams& params);

}  // namespace ckn
