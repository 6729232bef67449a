#pragma once

#include <stdexcept>
#include <string>

namespace ofmf {

// Base of every error raised by the library. Callers that only want to
// report and exit can catch this one type.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid argument: non-positive penalty, mismatched dimensions, etc.
class ParameterError : public Error {
public:
    using Error::Error;
};

// Pivot fell below the floor during a symmetric positive-definite solve.
class SingularMatrixError : public Error {
public:
    using Error::Error;
};

// ||v||^2 is zero where a division by it is required.
class DegenerateLatentError : public Error {
public:
    using Error::Error;
};

// The fixed-tolerance latent subproblem has no feasible point.
class InfeasibleError : public Error {
public:
    using Error::Error;
};

// Slices delivered out of order or with gaps.
class SequencingError : public Error {
public:
    using Error::Error;
};

// Malformed input table. The message carries the 1-based row/column.
class IngestionError : public Error {
public:
    using Error::Error;
};

// Input that cannot be normalized (e.g. an all-zero matrix).
class DegenerateInputError : public Error {
public:
    using Error::Error;
};

// Synthetic trajectory diverged; the AR coefficients are not stationary.
class NonStationaryError : public Error {
public:
    using Error::Error;
};

// Metric requested over a stream with no observed entries.
class UndefinedMetricError : public Error {
public:
    using Error::Error;
};

// File system failure, message includes the path.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace ofmf
