#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace randtr {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operands of mismatched length.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A caller-supplied argument violates a documented precondition.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Library arithmetic produced NaN or Inf.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A user oracle returned a non-finite value or a vector of the wrong length.
class OracleFault : public Error {
 public:
  using Error::Error;
};

/// A guaranteed invariant failed at run time (e.g. negative predicted decrease).
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

/// A theory-bound formula needs a problem constant that is absent.
class MissingConstant : public Error {
 public:
  explicit MissingConstant(std::string field)
      : Error("missing problem constant: " + field), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Input is degenerate for the requested construction (repeated eigenvalues, full span, ...).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

/// File or stream failure in the harness.
class IoError : public Error {
 public:
  using Error::Error;
};

/// An oracle fault that surfaced during outer iteration `iteration` of a run.
class RunFault : public OracleFault {
 public:
  RunFault(std::size_t iteration, const std::string& what)
      : OracleFault("outer iteration " + std::to_string(iteration) + ": " + what),
        iteration_(iteration) {}
  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

}  // namespace randtr
