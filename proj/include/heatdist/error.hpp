#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace heatdist {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad argument or violated precondition (alpha <= 0, k out of range, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Vector or matrix dimensions do not agree.
class DimensionMismatch : public Error {
public:
    DimensionMismatch(const std::string& what, std::size_t expected, std::size_t got)
        : Error(what + ": expected dimension " + std::to_string(expected) + ", got " +
                std::to_string(got)),
          expected_(expected), got_(got) {}

    std::size_t expected() const noexcept { return expected_; }
    std::size_t got() const noexcept { return got_; }

private:
    std::size_t expected_;
    std::size_t got_;
};

/// A numerical kernel failed (no convergence, matrix not positive definite).
class NumericError : public Error {
public:
    using Error::Error;
};

/// Malformed text or binary input.
class ParseError : public Error {
public:
    using Error::Error;
};

}  // namespace heatdist
