#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rrc {

enum class ErrorCode {
  invalid_trajectory,
  unreachable,
  size_limit,
  dimension_mismatch,
  invalid_argument,
  empty_grid,
  divergence_undefined,
  construction,
  choice_not_in_channel,
  empty_grounding,
  immovable_start,
  degenerate_evidence,
  unsupported_channel,
  missing_channels,
  domain,
  indeterminate_beta,
  empty_query_list,
  config,
  not_found,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the library; `code()` distinguishes failure classes.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace rrc
