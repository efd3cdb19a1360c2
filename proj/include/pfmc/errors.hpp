#pragma once

#include <stdexcept>
#include <string>

namespace pfmc {

/// Bad run configuration (unknown key, dimension mismatch, value out of range).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Requested filter variant is not supported by the model.
class UnsupportedVariant : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Every log weight is -inf; the particle swarm has fully degenerated.
class TotalWeightZero : public std::runtime_error {
 public:
  TotalWeightZero() : std::runtime_error("all weights are zero") {}
};

/// Parameter value on the boundary of the transform's domain.
class TransformError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file; carries the 1-based offending line.
class IngestError : public std::runtime_error {
 public:
  IngestError(const std::string& msg, long line)
      : std::runtime_error(msg + " (line " + std::to_string(line) + ")"), line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

/// Mixture fit could not proceed (too few rows).
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Marginal-likelihood estimator failed (underflow or excessive exclusions).
class EvidenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pfmc
