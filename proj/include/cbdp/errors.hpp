#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cbdp {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid birth/death rates.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Argument outside the domain of an operation (index out of range, u outside
// [0,1], unsorted input, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Operation not defined for the rate regime of the parameters.
class RegimeError : public Error {
 public:
  using Error::Error;
};

// Adaptive quadrature did not reach the requested tolerance.
class QuadratureError : public Error {
 public:
  QuadratureError(const std::string& what, double best_estimate, double error_estimate)
      : Error(what), best_estimate_(best_estimate), error_estimate_(error_estimate) {}

  double best_estimate() const noexcept { return best_estimate_; }
  double error_estimate() const noexcept { return error_estimate_; }

 private:
  double best_estimate_;
  double error_estimate_;
};

// Forward simulation exceeded its event budget.
class CapacityError : public Error {
 public:
  using Error::Error;
};

// Rejection sampling gave up.
class SamplingError : public Error {
 public:
  SamplingError(const std::string& what, std::size_t attempts, std::size_t capacity_failures)
      : Error(what), attempts_(attempts), capacity_failures_(capacity_failures) {}

  std::size_t attempts() const noexcept { return attempts_; }
  std::size_t capacity_failures() const noexcept { return capacity_failures_; }

 private:
  std::size_t attempts_;
  std::size_t capacity_failures_;
};

// Malformed oriented tree.
class StructureError : public Error {
 public:
  using Error::Error;
};

// Tree shape unsuitable for an operation (e.g. not binary).
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Ranks cannot be derived (missing or tied ages).
class RankError : public Error {
 public:
  using Error::Error;
};

// Newick syntax error; offset is a 0-based byte position into the input.
class NewickError : public Error {
 public:
  NewickError(const std::string& message, std::size_t offset)
      : Error(message + " at offset " + std::to_string(offset)), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace cbdp
