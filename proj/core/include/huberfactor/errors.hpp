#pragma once

#include <stdexcept>
#include <string>

namespace huberfactor {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A tuning parameter is outside its admissible range (tau <= 0, alpha > 2, ...).
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Shapes disagree or a requested rank/window does not fit the data.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Input failed a structural check (non-finite values, asymmetry, non-orthonormality).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Rank-deficient or ill-conditioned design encountered during a solve.
class DegeneracyError : public Error {
public:
    using Error::Error;
};

/// A matrix that must be positive definite is not.
class DefinitenessError : public Error {
public:
    using Error::Error;
};

/// Malformed external data (CSV/JSON parse failures).
class DataError : public Error {
public:
    using Error::Error;
};

}  // namespace huberfactor
