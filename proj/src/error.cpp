#include "soliton_forge/error.hpp"

namespace soliton_forge {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::not_positive_definite: return "not-positive-definite";
    case ErrorCode::singular_determinant: return "singular-determinant";
    case ErrorCode::integration_diverged: return "integration-diverged";
    case ErrorCode::carleson_violated: return "carleson-violated";
    case ErrorCode::degenerate_discretization: return "degenerate-discretization";
    case ErrorCode::exponent_overflow: return "exponent-overflow";
    case ErrorCode::inconclusive_asymptotics: return "inconclusive-asymptotics";
    case ErrorCode::inconclusive_probe: return "inconclusive";
    case ErrorCode::data_positivity_violated: return "data-positivity-violated";
    case ErrorCode::seed_decay_insufficient: return "seed-decay-insufficient";
    case ErrorCode::bound_violated: return "bound-violated";
    case ErrorCode::measure_parse_error: return "measure-parse-error";
  }
  return "unknown";
}

bool is_input_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument:
    case ErrorCode::carleson_violated:
    case ErrorCode::degenerate_discretization:
    case ErrorCode::data_positivity_violated:
    case ErrorCode::measure_parse_error:
      return true;
    default:
      return false;
  }
}

}  // namespace soliton_forge
