#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gew
{

/// Base class for every error raised by the library.
class Error : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of a function (negative time,
/// derivative requested on a support boundary, ...).
class DomainError : public Error
{
  public:
    using Error::Error;
};

class OverflowError : public Error
{
  public:
    OverflowError(const std::string& what, double exponent)
        : Error(what), exponent_(exponent)
    {
    }

    double exponent() const noexcept { return exponent_; }

  private:
    double exponent_;
};

enum class ValidationKind
{
    MissingColumn,
    Parse,
    NonPositiveTime,
    BadEvent,
    FailuresExceedItems,
    FailureAfterCensor,
    InconsistentCensoring,
    NoGroups,
    NoFailures,
    DuplicateStress,
    BadStress,
    Infeasible,
};

/// Dataset or configuration validation failure.  `row` is the 1-based line
/// number in the source file, or 0 when the error is not tied to a row.
class ValidationError : public Error
{
  public:
    ValidationError(ValidationKind kind, const std::string& what, std::size_t row = 0)
        : Error(row ? what + " (row " + std::to_string(row) + ")" : what), kind_(kind), row_(row)
    {
    }

    ValidationKind kind() const noexcept { return kind_; }
    std::size_t row() const noexcept { return row_; }

  private:
    ValidationKind kind_;
    std::size_t row_;
};

class IoError : public Error
{
  public:
    using Error::Error;
};

/// Raised by adaptive rejection sampling when the tangent slopes stop
/// decreasing or the hull falls below the target.
class ConcavityError : public Error
{
  public:
    ConcavityError(const std::string& parameter, const std::string& what)
        : Error("log-concavity violated for " + parameter + ": " + what), parameter_(parameter)
    {
    }

    const std::string& parameter() const noexcept { return parameter_; }

  private:
    std::string parameter_;
};

class BudgetError : public Error
{
  public:
    using Error::Error;
};

/// Sampler failure wrapped with the Gibbs iteration where it happened.
class SamplerError : public Error
{
  public:
    SamplerError(const std::string& what, long iteration)
        : Error("iteration " + std::to_string(iteration) + ": " + what), iteration_(iteration)
    {
    }

    long iteration() const noexcept { return iteration_; }

  private:
    long iteration_;
};

} // namespace gew
