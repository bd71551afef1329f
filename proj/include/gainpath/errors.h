#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gainpath {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed network: dangling gain key, self-loop, missing gain, bad index.
/// Indices are stored 0-based; the message prints them 1-based.
class StructuralError : public Error {
 public:
  StructuralError(std::size_t i, std::size_t j, const std::string& what)
      : Error("structural error at (" + std::to_string(i + 1) + "," +
              std::to_string(j + 1) + "): " + what),
        i_(i),
        j_(j) {}

  std::size_t i() const { return i_; }
  std::size_t j() const { return j_; }

 private:
  std::size_t i_;
  std::size_t j_;
};

/// Vector length does not match the network size.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A scaling function is not admissible, e.g. omega >= id in pre-inverse mode.
class ScalingError : public Error {
 public:
  ScalingError(double witness_t, const std::string& what)
      : Error(what + " (witness t=" + std::to_string(witness_t) + ")"),
        witness_t_(witness_t) {}

  double witness_t() const { return witness_t_; }

 private:
  double witness_t_;
};

/// The operation requires a gain-operator class the network does not have.
class WrongClassError : public Error {
 public:
  using Error::Error;
};

/// Problem size exceeds what an exhaustive procedure supports.
class SizeError : public Error {
 public:
  using Error::Error;
};

/// Fixed-point iteration failed: overflow past the divergence guard or no
/// convergence within the iteration budget.
class ConvergenceError : public Error {
 public:
  enum class Reason { kOverflow, kUnboundedGrowth, kNotConverged };

  ConvergenceError(Reason reason, const std::string& what)
      : Error(what), reason_(reason) {}

  Reason reason() const { return reason_; }

 private:
  Reason reason_;
};

/// An internal monotonicity or ordering guarantee was observed to fail.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

/// A path table could not be built at grid point r.
class PathConstructionError : public Error {
 public:
  PathConstructionError(double r, const std::string& what)
      : Error("path construction failed at r=" + std::to_string(r) + ": " + what),
        r_(r) {}

  double r() const { return r_; }

 private:
  double r_;
};

/// Input file or configuration could not be parsed.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace gainpath
