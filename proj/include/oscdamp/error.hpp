#pragma once

#include <stdexcept>
#include <string>

namespace oscdamp {

// Base of everything the library throws on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad input: malformed documents, invalid networks, violated preconditions.
class DataError : public Error {
public:
    using Error::Error;
};

class ParseError : public DataError {
public:
    using DataError::DataError;
};

// Numerical failure: the input was acceptable but the computation was not.
class NumericalError : public Error {
public:
    using Error::Error;
};

class ConvergenceError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class ResonantModeError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class TrackingError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

} // namespace oscdamp
