#pragma once

#include <stdexcept>
#include <string>

namespace invdiff {

/// Base class for all domain errors thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A group transformation hit a vanishing denominator.
struct SingularTransform : Error {
    using Error::Error;
};

/// Transformed (or constructed) abscissas are not strictly increasing.
struct OrderViolation : Error {
    using Error::Error;
};

/// Transformed curve samples are not monotone in x, so no jet exists.
struct NotAGraph : Error {
    using Error::Error;
};

/// A stencil invariant is undefined (vanishing y-difference or spacing).
struct DegenerateStencil : Error {
    using Error::Error;
};

/// A continuous invariant is undefined at this jet (vanishing denominator).
struct DegenerateJet : Error {
    using Error::Error;
};

/// Input lies outside the operation's admissible domain.
struct DomainViolation : Error {
    using Error::Error;
};

/// Reference integration exceeded the overflow guard or the step underflowed.
struct BlowUp : Error {
    using Error::Error;
};

/// The Vandermonde system of an expansion fit is numerically singular.
struct IllConditionedFit : Error {
    using Error::Error;
};

/// A per-step nonlinear solve failed to reach its tolerance.
struct NewtonDiverged : Error {
    using Error::Error;
};

}  // namespace invdiff
