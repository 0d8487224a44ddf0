#pragma once

#include <stdexcept>
#include <string>

namespace depctl {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A distribution, copula or channel parameter is outside its domain.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// An argument lies outside the mathematical domain of an operation
/// (probability outside (0,1), divergent series, zero log spacings, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A precondition of an operation is violated by the caller.
class ContractError : public Error {
public:
    using Error::Error;
};

/// A configuration document does not match the schema. The message names
/// the offending field.
class SchemaError : public Error {
public:
    using Error::Error;
};

} // namespace depctl
