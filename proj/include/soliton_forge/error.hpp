#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace soliton_forge {

enum class ErrorCode {
  invalid_argument,
  not_positive_definite,
  singular_determinant,
  integration_diverged,
  carleson_violated,
  degenerate_discretization,
  exponent_overflow,
  inconclusive_asymptotics,
  inconclusive_probe,
  data_positivity_violated,
  seed_decay_insufficient,
  bound_violated,
  measure_parse_error,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a machine-readable code next to the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// True for codes that describe bad user input rather than a numerical failure.
bool is_input_error(ErrorCode code);

}  // namespace soliton_forge
