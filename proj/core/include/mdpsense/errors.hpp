#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace mdpsense {

/// Collected invariant violations; empty report <=> well-formed input.
struct ValidationReport {
  std::vector<std::string> issues;

  bool ok() const { return issues.empty(); }
  void add(std::string msg) { issues.push_back(std::move(msg)); }
  std::string to_string() const {
    std::string out;
    for (const auto& s : issues) {
      out += s;
      out += '\n';
    }
    return out;
  }
};

/// Thrown when an input fails validation (bad shape, bad probabilities,
/// inadmissible references). Carries the full report.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(ValidationReport rep)
      : std::runtime_error(rep.ok() ? "validation failed" : rep.issues.front()),
        report(std::move(rep)) {}
  explicit ValidationError(std::string msg) : std::runtime_error(msg) {
    report.add(std::move(msg));
  }

  ValidationReport report;
};

/// Thrown when an enumeration or oracle would exceed its configured cap.
class CapExceeded : public std::runtime_error {
 public:
  CapExceeded(std::string what, double required, double cap)
      : std::runtime_error(what + ": requires " + std::to_string(required) +
                           " > cap " + std::to_string(cap)) {}
};

}  // namespace mdpsense
