#pragma once

#include <stdexcept>
#include <string>

namespace coopjump {

// Invalid user-supplied value (negative rate, bad scheme/field combination, ...).
class ParameterError : public std::invalid_argument {
public:
  explicit ParameterError(const std::string& what) : std::invalid_argument(what) {}
};

// Parameters that are individually valid but describe an unphysical system
// (negative collective decay rate, broken scale separation below the hard floor).
class UnphysicalConfigError : public std::domain_error {
public:
  explicit UnphysicalConfigError(const std::string& what) : std::domain_error(what) {}
};

// Numerical failure inside a solver: unexpected null-space dimension,
// ill-conditioned bases, non-converging root brackets, residual blowups.
class NumericalError : public std::runtime_error {
public:
  enum class Kind { degeneracy, conditioning, solver, integrator };

  NumericalError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  Kind kind() const { return kind_; }

private:
  Kind kind_;
};

// Config-file or CLI-argument problems (unknown key, malformed value, bad grid).
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Segmentation called with parameters that cannot classify intensity levels.
class SegmentationError : public std::invalid_argument {
public:
  explicit SegmentationError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace coopjump
