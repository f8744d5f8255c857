#pragma once

#include <stdexcept>
#include <string>

namespace dimlab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (bad order, m >= n, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A hard size bound (cover size, order cap, depth cap) would be exceeded.
class ResourceError : public Error {
public:
    using Error::Error;
};

/// The requested operation has no closed form for this kind of input.
class UnsupportedSpec : public Error {
public:
    using Error::Error;
};

/// The exact sampler could not be used for the requested parameters.
class SamplingError : public Error {
public:
    using Error::Error;
};

/// Inconsistent numerical inputs (chain inequality broken, exact vs. estimate conflict).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Malformed configuration or serialized input.
class ParseError : public Error {
public:
    using Error::Error;
};

namespace detail {

template <class E>
inline void require(bool cond, const std::string& what)
{
    if (!cond) throw E(what);
}

} // namespace detail
} // namespace dimlab
