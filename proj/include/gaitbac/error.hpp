#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gaitbac {

enum class Errc {
  malformed_row,
  malformed_filename,
  non_monotonic_time,
  empty_recording,
  bad_sample_rate,
  schema_violation,
  duplicate_hour_slot,
  invalid_gender_constant,
  non_finite_input,
  too_short,
  dimension_mismatch,
  singular_normal_equations,
  non_finite_loss,
  hessian_not_invertible,
  non_finite_hyperparameter,
  too_few_groups,
  singular_design,
  no_convergence,
  zero_variance_target,
  io_error,
  invalid_argument,
};

std::string_view to_string(Errc code);

// Every failure the library reports is an Error carrying one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace gaitbac
