#include "gaitbac/error.hpp"

namespace gaitbac {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::malformed_row: return "MalformedRow";
    case Errc::malformed_filename: return "MalformedFilename";
    case Errc::non_monotonic_time: return "NonMonotonicTime";
    case Errc::empty_recording: return "EmptyRecording";
    case Errc::bad_sample_rate: return "BadSampleRate";
    case Errc::schema_violation: return "SchemaViolation";
    case Errc::duplicate_hour_slot: return "DuplicateHourSlot";
    case Errc::invalid_gender_constant: return "InvalidGenderConstant";
    case Errc::non_finite_input: return "NonFiniteInput";
    case Errc::too_short: return "TooShort";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::singular_normal_equations: return "SingularNormalEquations";
    case Errc::non_finite_loss: return "NonFiniteLoss";
    case Errc::hessian_not_invertible: return "HessianNotInvertible";
    case Errc::non_finite_hyperparameter: return "NonFiniteHyperparameter";
    case Errc::too_few_groups: return "TooFewGroups";
    case Errc::singular_design: return "SingularDesign";
    case Errc::no_convergence: return "NoConvergence";
    case Errc::zero_variance_target: return "ZeroVarianceTarget";
    case Errc::io_error: return "IoError";
    case Errc::invalid_argument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace gaitbac
