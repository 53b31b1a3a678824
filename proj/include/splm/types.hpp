#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace splm {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Precondition or invariant failure on the caller's side (bad dimensions,
/// negative multipliers, invalid parameters).
class ContractViolation : public std::logic_error {
 public:
  explicit ContractViolation(const std::string& what) : std::logic_error(what) {}
};

/// A user oracle returned a non-finite value.
class OracleError : public std::runtime_error {
 public:
  explicit OracleError(const std::string& what) : std::runtime_error(what) {}
};

/// Operation requires structural data the problem does not carry.
class UnsupportedStructure : public std::runtime_error {
 public:
  explicit UnsupportedStructure(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed instance file; carries the 1-based line where parsing failed.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, long line)
      : std::runtime_error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

/// An iterative subsolve ran out of budget; carries the residual it reached.
class AccuracyNotReached : public std::runtime_error {
 public:
  AccuracyNotReached(const std::string& what, double achieved)
      : std::runtime_error(what + " (achieved residual " + std::to_string(achieved) + ")"),
        achieved_(achieved) {}
  double achieved() const { return achieved_; }

 private:
  double achieved_;
};

}  // namespace splm
