#include "ckn/params.hpp"

#include <cmath>
#include <string>

#include "ckn/error.hpp"

namespace ckn {

double WeightParams::p_over_s() const noexcept { return std::isinf(s_) ? 0.0 : p_ / s_; }

WeightParams WeightParams::with_s(double s, Mode mode) const { return validate(n_, a_, b_, s, mode); }

double critical_exponent(int N, double a, double b) noexcept {
  return 2.0 * N / (N - 2.0 * (1.0 + a - b));
}

WeightParams validate(int N, double a, double b, double s, Mode mode) {
  if (N < 3) throw Error(Errc::dimension_too_small, "N = " + std::to_string(N) + " < 3");
  if (!std::isfinite(a) || !std::isfinite(b) || std::isnan(s)) {
    throw Error(Errc::invalid_argument, "a and b must be finite, s must not be NaN");
  }
  const double a_max = (N - 2) / 2.0;
  if (!(a < a_max)) {
    throw Error(Errc::a_out_of_range, "a = " + std::to_string(a) + " >= (N-2)/2");
  }
  if (b < a || b > a + 1.0) {
    throw Error(Errc::b_out_of_range, "b = " + std::to_string(b) + " outside [a, a+1]");
  }
  if (mode == Mode::holder && !(b < a + 1.0)) {
    throw Error(Errc::b_out_of_range, "Hoelder mode requires b < a+1");
  }
  if (!(s > 0.0)) throw Error(Errc::s_too_small, "s must be positive");

  const double p = critical_exponent(N, a, b);
  WeightParams params(N, a, b, s, p, mode);
  if (mode == Mode::holder) {
    // s > p/(p-2)  <=>  p - 2 - p/s > 0, compared without dividing by p - 2.
    if (!(params.integrability_margin() > 0.0)) {
      throw Error(Errc::s_too_small, "s = " + std::to_string(s) + " <= p/(p-2)");
    }
  }
  return params;
}

double epsilon_choice(const WeightParams& params) {
  const double margin = params.integrability_margin();
  if (!(margin > 0.0)) throw Error(Errc::s_too_small, "epsilon requires s > p/(p-2)");
  return 2.0 * margin / params.p();
}

std::string_view to_string(LimitingBranch branch) noexcept {
  switch (branch) {
    case LimitingBranch::harmonic_exponent: return "harmonic_exponent";
    case LimitingBranch::unit: return "unit";
    case LimitingBranch::integrability_b_nonneg: return "integrability_b_nonneg";
    case LimitingBranch::integrability_b_neg: return "integrability_b_neg";
  }
  return "unknown";
}

HolderBound holder_bound(const WeightParams& params, double alpha_h_estimate) {
  if (!(alpha_h_estimate > 0.0 && alpha_h_estimate <= 1.0)) {
    throw Error(Errc::invalid_alpha_h, "alpha_h must lie in (0, 1]");
  }
  if (!params.strict_b()) throw Error(Errc::b_out_of_range, "Hoelder bound requires b < a+1");
  const double margin = params.integrability_margin();
  if (!(margin > 0.0)) throw Error(Errc::s_too_small, "Hoelder bound requires s > p/(p-2)");

  const bool b_nonneg = params.b() >= 0.0;
  const double integrability = b_nonneg ? ((params.N() - 2) / 2.0 - params.a()) * margin
                                        : (params.N() / params.p()) * margin;
  const LimitingBranch int_branch =
      b_nonneg ? LimitingBranch::integrability_b_nonneg : LimitingBranch::integrability_b_neg;

  HolderBound best{1.0, LimitingBranch::unit};
  if (alpha_h_estimate < 1.0) best = {alpha_h_estimate, LimitingBranch::harmonic_exponent};
  if (integrability < best.alpha_sup) best = {integrability, int_branch};
  return best;
}

std::vector<double> moser_ladder(double p, int k_max) {
  if (k_max < 0) throw Error(Errc::invalid_argument, "k_max must be nonnegative");
  std::vector<double> q;
  q.reserve(static_cast<std::size_t>(k_max) + 1);
  q.push_back(p);
  for (int k = 0; k < k_max; ++k) q.push_back(p * q.back() / 2.0);
  return q;
}

std::vector<double> moser_ladder(const WeightParams& params, int k_max) {
  return moser_ladder(params.p(), k_max);
}

int k0_threshold(double p) {
  if (!(p > 2.0) || !std::isfinite(p)) throw Error(Errc::invalid_argument, "k0 requires finite p > 2");
  const double threshold = 2.0 * (p - 1.0) / (p - 2.0);
  const double ratio = p / 2.0;
  int k = 0;
  double power = 1.0;
  while (power < threshold) {
    power *= ratio;
    ++k;
  }
  return k;
}

int k0_threshold(const WeightParams& params) { return k0_threshold(params.p()); }

}  // namespace ckn
