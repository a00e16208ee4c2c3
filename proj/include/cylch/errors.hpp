#pragma once

#include <stdexcept>
#include <string>

namespace cylch {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A value left the admissible interval of the active potential.
class DomainViolation : public Error {
public:
    explicit DomainViolation(const std::string& what) : Error(what) {}
};

/// Adaptive quadrature could not reach the requested tolerance.
class QuadratureFailure : public Error {
public:
    explicit QuadratureFailure(const std::string& what) : Error(what) {}
};

/// Two fields live on different grids.
class GridMismatch : public Error {
public:
    explicit GridMismatch(const std::string& what) : Error(what) {}
};

/// An iterative linear solve missed its residual bound.
class NoConvergence : public Error {
public:
    NoConvergence(const std::string& what, int iterations, double residual)
        : Error(what), iterations(iterations), residual(residual) {}
    int iterations;
    double residual;
};

/// Damped Newton failed to reduce the residual below tolerance.
class NewtonFailure : public Error {
public:
    explicit NewtonFailure(const std::string& what) : Error(what) {}
};

/// An explicit step produced non-finite values.
class Instability : public Error {
public:
    explicit Instability(const std::string& what) : Error(what) {}
};

/// Requested norm parameters are not supported together.
class UnsupportedCombination : public Error {
public:
    explicit UnsupportedCombination(const std::string& what) : Error(what) {}
};

/// A time-window quantity was requested with too few stored snapshots.
class InsufficientSnapshots : public Error {
public:
    explicit InsufficientSnapshots(const std::string& what) : Error(what) {}
};

/// The perturbation direction of a two-trajectory probe is numerically zero.
class DegenerateDirection : public Error {
public:
    explicit DegenerateDirection(const std::string& what) : Error(what) {}
};

/// A singular-potential-only diagnostic was invoked with a regular potential.
class NotSingular : public Error {
public:
    explicit NotSingular(const std::string& what) : Error(what) {}
};

/// Config text could not be parsed; carries the 1-based line number.
class ParseError : public Error {
public:
    ParseError(const std::string& what, int line)
        : Error("line " + std::to_string(line) + ": " + what), line(line) {}
    int line;
};

/// Parsed config violates a cross-field constraint.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(what) {}
};

/// Checkpoint checksum does not match its payload.
class ChecksumMismatch : public Error {
public:
    explicit ChecksumMismatch(const std::string& what) : Error(what) {}
};

/// Checkpoint grid dimensions do not match the target grid.
class DimsMismatch : public Error {
public:
    explicit DimsMismatch(const std::string& what) : Error(what) {}
};

/// Filesystem failure; message carries the path.
class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(what) {}
};

} // namespace cylch
