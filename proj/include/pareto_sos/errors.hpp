#pragma once

#include <stdexcept>
#include <string>

namespace psos {

/// Base of all library errors that map onto a process exit code.
class Error : public std::runtime_error {
 public:
  Error(const std::string& what, int exit_code) : std::runtime_error(what), exit_code_(exit_code) {}
  int exit_code() const { return exit_code_; }

 private:
  int exit_code_;
};

/// Malformed input file or invalid configuration.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error(what, 2) {}
};

/// Compactness / positivity assumptions failed on the problem data.
class AssumptionError : public Error {
 public:
  explicit AssumptionError(const std::string& what) : Error(what, 3) {}
};

class SolverError : public Error {
 public:
  explicit SolverError(const std::string& what) : Error(what, 4) {}
};

/// The relaxation order is too small for a certificate to exist.
class OrderTooLowError : public SolverError {
 public:
  OrderTooLowError(const std::string& what, int suggested_order)
      : SolverError(what + " (try order " + std::to_string(suggested_order) + ")"), suggested_order_(suggested_order) {}
  int suggested_order() const { return suggested_order_; }

 private:
  int suggested_order_;
};

class VerificationError : public Error {
 public:
  explicit VerificationError(const std::string& what) : Error(what, 5) {}
};

}  // namespace psos
