#pragma once

#include <stdexcept>
#include <string>

namespace rpomdp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A caller broke a documented precondition (missing observation, bad index, ...).
class ContractViolation : public Error {
  public:
    using Error::Error;
};

/// A zero lower bound or zero policy entry would remove a transition.
class GraphPreservationError : public Error {
  public:
    using Error::Error;
};

/// Interval bounds admit no probability distribution.
class InfeasibleUncertaintyError : public Error {
  public:
    using Error::Error;
};

class InvalidInstantiationError : public Error {
  public:
    using Error::Error;
};

class ValidationError : public Error {
  public:
    using Error::Error;
};

/// Vertex enumeration exceeded the configured budget for one state-action pair.
class VertexBudgetError : public Error {
  public:
    using Error::Error;
};

class OracleTooLargeError : public Error {
  public:
    using Error::Error;
};

/// Value iteration hit its iteration cap.
class ConvergenceError : public Error {
  public:
    ConvergenceError(const std::string& what, double residual)
        : Error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

  private:
    double residual_;
};

/// The goal set is not reached almost surely from the initial state.
class InfiniteCostError : public Error {
  public:
    using Error::Error;
};

class ConvexityError : public Error {
  public:
    using Error::Error;
};

class SolverError : public Error {
  public:
    using Error::Error;
};

/// Syntax or semantic error in a model file; carries a 1-based position.
class ParseError : public Error {
  public:
    ParseError(const std::string& message, std::size_t line, std::size_t column)
        : Error("line " + std::to_string(line) + ", column " + std::to_string(column) +
                ": " + message),
          line_(line), column_(column) {}
    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

  private:
    std::size_t line_;
    std::size_t column_;
};

} // namespace rpomdp
