#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lego {

enum class Errc {
  invalid_configuration,
  invalid_merge,
  malformed_bundle,
  invalid_scan_input,
  scanner_unavailable,
  unsupported_operation,
  truncation_too_small,
  missing_estimate,
  io_error,
  invalid_utf8,
};

std::string_view to_string(Errc code) noexcept;

/// Single exception type for the library; `code()` tells callers which
/// contract was violated so the CLI can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  [[nodiscard]] Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace lego
