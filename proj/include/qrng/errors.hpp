#pragma once

#include <stdexcept>
#include <string>

namespace qrng {

/// Base of every error raised by the library. The CLI maps each subclass to
/// its own exit code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Out-of-range, non-finite or otherwise invalid parameter.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Input data without spread (constant channel, zero-variance series).
class DegenerateError : public ParameterError {
public:
    using ParameterError::ParameterError;
};

/// Bit sequence shorter than a statistical test's minimum.
class LengthError : public ParameterError {
public:
    using ParameterError::ParameterError;
};

/// Extractor input shorter than one block.
class InsufficientInputError : public ParameterError {
public:
    using ParameterError::ParameterError;
};

/// Malformed file contents (bad magic, truncation, unparsable field).
class FormatError : public Error {
public:
    using Error::Error;
};

/// A pipeline stage ran without the artifact it consumes.
class DependencyError : public Error {
public:
    using Error::Error;
};

/// Requested extraction leaves no output bits.
class InsufficientEntropyError : public Error {
public:
    using Error::Error;
};

namespace detail {

[[noreturn]] inline void fail(const std::string& what) { throw ParameterError(what); }

inline void require(bool ok, const std::string& what) {
    if (!ok) fail(what);
}

}  // namespace detail

}  // namespace qrng
