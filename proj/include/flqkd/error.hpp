#pragma once

#include <stdexcept>
#include <string>

namespace flqkd {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of the operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// A calibration or root solve has no solution for the requested target.
class NoSolutionError : public Error {
public:
    using Error::Error;
};

/// Alice's monitor shows no usable SPDC coincidence signal.
class DegenerateSignalError : public Error {
public:
    using Error::Error;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// The coincidence peak cannot be distinguished from the accidental floor.
class PeakNotFoundError : public Error {
public:
    using Error::Error;
};

class UnreachableTargetError : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    using Error::Error;
};

namespace detail {

template <typename E = DomainError>
inline void require(bool ok, const std::string& what) {
    if (!ok) throw E(what);
}

}  // namespace detail

}  // namespace flqkd
