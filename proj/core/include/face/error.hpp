#pragma once

#include <stdexcept>
#include <string>

namespace face {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or invalid input data (CSV rows, empty datasets, ...).
class DataError : public Error {
public:
    using Error::Error;
};

// Argument outside the domain an operation is defined on.
class DomainError : public Error {
public:
    using Error::Error;
};

// A factorization or solve failed even after regularization.
class NumericalError : public Error {
public:
    using Error::Error;
};

// The data cannot identify the covariance (e.g. every subject has one point).
class IdentifiabilityError : public Error {
public:
    using Error::Error;
};

}  // namespace face
