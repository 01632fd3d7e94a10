#pragma once

#include <stdexcept>
#include <string>

namespace twave {

/// Root of the library's exception hierarchy.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Bad user input (out-of-range parameters, malformed config). CLI exit code 2.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Numerical breakdown. CLI exit code 3.
class NumericalError : public Error {
public:
    using Error::Error;
};

#define TWAVE_ERROR(name, base)                                   \
    class name : public base {                                     \
    public:                                                        \
        explicit name(const std::string& what)                     \
            : base(std::string(#name) + ": " + what) {}            \
    };

TWAVE_ERROR(RangeError, ValidationError)
TWAVE_ERROR(DomainError, ValidationError)
TWAVE_ERROR(DegreeMismatch, ValidationError)
TWAVE_ERROR(IndexViolation, ValidationError)
TWAVE_ERROR(ConvergenceWindow, NumericalError)
TWAVE_ERROR(ResonantDivisor, NumericalError)
TWAVE_ERROR(NoConvergence, NumericalError)
TWAVE_ERROR(StepFailure, NumericalError)
TWAVE_ERROR(SqrtDomain, NumericalError)
TWAVE_ERROR(PsiNonpositive, NumericalError)
TWAVE_ERROR(NoBracket, NumericalError)
TWAVE_ERROR(InsufficientDecay, NumericalError)
TWAVE_ERROR(InsufficientOverlap, NumericalError)
TWAVE_ERROR(WindowTooNoisy, NumericalError)
TWAVE_ERROR(ResidualBelowNoise, NumericalError)
TWAVE_ERROR(BracketViolation, NumericalError)
TWAVE_ERROR(QuadratureError, NumericalError)

#undef TWAVE_ERROR

}  // namespace twave
