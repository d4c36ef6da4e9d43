#include "ckn/error.hpp"

namespace ckn {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::dimension_too_small: return "dimension_too_small";
    case Errc::a_out_of_range: return "a_out_of_range";
    case Errc::b_out_of_range: return "b_out_of_range";
    case Errc::s_too_small: return "s_too_small";
    case Errc::invalid_alpha_h: return "invalid_alpha_h";
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::nonpositive_radius: return "nonpositive_radius";
    case Errc::quadrature_nonconvergence: return "quadrature_nonconvergence";
    case Errc::invalid_grid: return "invalid_grid";
    case Errc::field_mismatch: return "field_mismatch";
    case Errc::nonfinite_value: return "nonfinite_value";
    case Errc::ball_outside_domain: return "ball_outside_domain";
    case Errc::empty_ball: return "empty_ball";
    case Errc::origin_cell_unresolved: return "origin_cell_unresolved";
    case Errc::singular_cell: return "singular_cell";
    case Errc::no_convergence: return "no_convergence";
    case Errc::degenerate_exponent: return "degenerate_exponent";
    case Errc::ball_too_small: return "ball_too_small";
    case Errc::zero_field: return "zero_field";
    case Errc::degenerate_oscillation: return "degenerate_oscillation";
    case Errc::negative_field: return "negative_field";
    case Errc::not_superharmonic: return "not_superharmonic";
    case Errc::insufficient_points: return "insufficient_points";
    case Errc::empty_subdomain: return "empty_subdomain";
    case Errc::nonpositive_ell: return "nonpositive_ell";
    case Errc::residual_too_large: return "residual_too_large";
    case Errc::norm_overflow: return "norm_overflow";
    case Errc::exponent_order_violation: return "exponent_order_violation";
    case Errc::io_error: return "io_error";
    case Errc::parse_error: return "parse_error";
  }
  return "unknown";
}

}  // namespace ckn
