#pragma once

#include <stdexcept>
#include <string>

namespace rdt {

/// Invalid or inconsistent scenario configuration. Maps to exit code 65.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Design matrix is rank deficient; the fit cannot proceed.
class SingularDesignError : public std::runtime_error {
 public:
  explicit SingularDesignError(const std::string& what) : std::runtime_error(what) {}
};

/// Too few observations for the requested estimator.
class InsufficientDataError : public std::runtime_error {
 public:
  explicit InsufficientDataError(const std::string& what) : std::runtime_error(what) {}
};

/// The chosen design cannot run with the available patients.
class DesignInfeasibleError : public std::runtime_error {
 public:
  explicit DesignInfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

/// An exclusion rule was requested from a fit that did not converge cleanly.
class RuleUnavailableError : public std::runtime_error {
 public:
  explicit RuleUnavailableError(const std::string& what) : std::runtime_error(what) {}
};

/// Unreadable or unwritable path. Maps to exit code 2.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace rdt
