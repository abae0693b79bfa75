#pragma once

#include <stdexcept>
#include <string>

namespace toricost
{

/// Bad input: unknown names, malformed parameters, violated preconditions.
class ValidationError : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical procedure failed to produce a trustworthy result.
class NumericError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Point lies on the degenerate locus of its chart (e.g. a sphere pole).
class SingularPointError : public ValidationError
{
public:
    using ValidationError::ValidationError;
};

class NewtonDivergenceError : public NumericError
{
public:
    using NumericError::NumericError;
};

/// Measures for which no transport map can be enumerated.
class UnsupportedMeasureError : public ValidationError
{
public:
    using ValidationError::ValidationError;
};

class NonConvergenceError : public NumericError
{
public:
    NonConvergenceError(const std::string& what, double defect)
        : NumericError(what), defect_(defect)
    {
    }

    /// Largest marginal violation reached before giving up.
    double defect() const noexcept { return defect_; }

private:
    double defect_;
};

}  // namespace toricost
