#pragma once

#include <stdexcept>
#include <string>

namespace clrt {

// Base class for every error raised by this library.  All failures are
// reported through exceptions so callers can distinguish "the math refused"
// from "the code is broken"; the latter is an assert, not a throw.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// --- interval / linalg -----------------------------------------------------

// Operand outside the mathematical domain (sqrt/log of a set crossing it).
class DomainError : public Error {
public:
    using Error::Error;
};

// Denominator interval contains zero.
class DivisionByZeroInterval : public Error {
public:
    using Error::Error;
};

// Vector/matrix shapes incompatible.
class DimensionMismatch : public Error {
public:
    using Error::Error;
};

// NaN (or an infinity where a finite value is required) entered a container.
class NonFiniteEntry : public Error {
public:
    using Error::Error;
};

// Symmetric factorization failed: the matrix is not certifiably positive
// definite.
class NotPositiveDefinite : public Error {
public:
    using Error::Error;
};

// Eigenbasis too ill-conditioned to be usable as a metric.
class NearDefective : public Error {
public:
    using Error::Error;
};

// Matrix numerically singular where an inverse is required.
class RankDeficient : public Error {
public:
    using Error::Error;
};

// --- systems ---------------------------------------------------------------

class UnknownSystem : public Error {
public:
    using Error::Error;
};

class BadParameter : public Error {
public:
    using Error::Error;
};

// --- integrator ------------------------------------------------------------

// Picard iteration failed to find a rough enclosure; the step is too large.
class NoAprioriEnclosure : public Error {
public:
    using Error::Error;
};

// Enclosure width exceeded the configured cap; continuing would be useless.
class IntervalBlowup : public Error {
public:
    using Error::Error;
};

// --- reachtube loop --------------------------------------------------------

// Step-size halving hit the configured floor without satisfying its test.
class StepUnderflow : public Error {
public:
    using Error::Error;
};

// Bloating loop exceeded its growth cap; the step expands too fast.
class BloatDiverged : public Error {
public:
    using Error::Error;
};

// --- cli -------------------------------------------------------------------

// Malformed run configuration; message names the offending field.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Plot projection asked for coordinate indices outside the system dimension.
class BadDimensionPair : public Error {
public:
    using Error::Error;
};

} // namespace clrt
