#ifndef HANKEL_ERROR_HPP
#define HANKEL_ERROR_HPP

#include <stdexcept>
#include <string>

namespace hankel {

enum class ErrorKind {
  domain,      // argument outside the admissible range
  model,       // model parameters inconsistent with the requested law
  length,      // slice / vector too short or dimension mismatch
  convergence, // iterative method did not reach the requested precision
  validation,  // configuration rejected before execution
  resolution,  // grid too coarse for the requested coefficients
  io,
  internal
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

/// Raised when an iterative evaluation stops short of its target; carries the
/// bound that was actually reached.
class ConvergenceError : public Error {
public:
  ConvergenceError(const std::string& what, double achieved)
      : Error(ErrorKind::convergence, what), achieved_(achieved) {}

  double achieved() const noexcept { return achieved_; }

private:
  double achieved_;
};

[[noreturn]] void raise(ErrorKind kind, const std::string& what);

} // namespace hankel

#endif
