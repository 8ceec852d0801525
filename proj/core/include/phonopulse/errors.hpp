#pragma once

#include <stdexcept>
#include <string>

namespace phonopulse {

// Validation problems (bad parameters, violated preconditions) throw
// std::invalid_argument or std::domain_error. The types below cover the
// remaining failure classes that callers are expected to branch on.

/// Nonlinear fit failed to converge or produced a degenerate solution.
class FitError : public std::runtime_error {
 public:
  FitError(const std::string& what, double residual_rms)
      : std::runtime_error(what + " (residual rms " +
                           std::to_string(residual_rms) + ")"),
        residual_rms_(residual_rms) {}
  double residual_rms() const { return residual_rms_; }

 private:
  double residual_rms_ = 0.0;
};

/// Malformed file content; names the offending field.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, const std::string& field)
      : std::runtime_error(what + " [field: " + field + "]"), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Resource limit exceeded; reports how much would be needed.
class ResourceError : public std::runtime_error {
 public:
  ResourceError(const std::string& what, std::uint64_t required_bytes)
      : std::runtime_error(what + " (required bytes: " +
                           std::to_string(required_bytes) + ")"),
        required_bytes_(required_bytes) {}
  std::uint64_t required_bytes() const { return required_bytes_; }

 private:
  std::uint64_t required_bytes_ = 0;
};

}  // namespace phonopulse
