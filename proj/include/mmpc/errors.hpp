#pragma once

#include <stdexcept>
#include <string>

namespace mmpc {

/// Caller broke a shape or precondition contract (dimension mismatch, bad argument).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A point or perturbation left the chart where the local parametrization is valid.
class OutOfChartError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class TrackingLostError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InfeasibleReferenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateSampleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IllConditionedWeightsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mmpc
