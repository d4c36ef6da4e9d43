#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ckn {

/// Error conditions raised by the library. Every thrown ckn::Error carries one.
enum class Errc {
  // parameter algebra
  dimension_too_small,
  a_out_of_range,
  b_out_of_range,
  s_too_small,
  invalid_alpha_h,
  invalid_argument,
  // measure and quadrature
  nonpositive_radius,
  quadrature_nonconvergence,
  // grids and fields
  invalid_grid,
  field_mismatch,
  nonfinite_value,
  ball_outside_domain,
  empty_ball,
  origin_cell_unresolved,
  // solver
  singular_cell,
  no_convergence,
  degenerate_exponent,
  ball_too_small,
  // inequality lab and regularity
  zero_field,
  degenerate_oscillation,
  negative_field,
  not_superharmonic,
  insufficient_points,
  empty_subdomain,
  // moser iteration
  nonpositive_ell,
  residual_too_large,
  norm_overflow,
  exponent_order_violation,
  // io
  io_error,
  parse_error,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace ckn
