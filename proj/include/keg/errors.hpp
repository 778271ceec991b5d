#pragma once

#include <stdexcept>
#include <string>

namespace keg {

//! Base of all library errors.
class Error : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

//! Invalid user input: parameter out of range, malformed spec, bad flag.
class ConfigError : public Error
{
  public:
    using Error::Error;
};

//! Numerical integration failed to reach the requested tolerance.
class QuadratureError : public Error
{
  public:
    QuadratureError(std::string const& what, double value, double error)
        : Error(what), value_(value), error_(error)
    {
    }
    double value() const noexcept { return value_; }
    double error_estimate() const noexcept { return error_; }

  private:
    double value_;
    double error_;
};

//! A requested expectation diverges for the given graphex.
class InfiniteExpectation : public Error
{
  public:
    using Error::Error;
};

//! Ratio with a vanishing denominator.
class DegenerateError : public Error
{
  public:
    using Error::Error;
};

//! A sampling run would exceed its configured size limits.
class CapacityError : public Error
{
  public:
    using Error::Error;
};

}  // namespace keg
