#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace pdsde {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidDimension : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class IndexError : public Error {
public:
    using Error::Error;
};

// A precondition on a numeric parameter (step size, tolerance, scale...) was violated.
class InvalidParameter : public Error {
public:
    using Error::Error;
};

class SpectralFailure : public Error {
public:
    SpectralFailure(const std::string& what, std::uint64_t matrix_hash)
        : Error(what), matrix_hash_(matrix_hash) {}
    std::uint64_t matrix_hash() const noexcept { return matrix_hash_; }

private:
    std::uint64_t matrix_hash_;
};

class NotHyperbolic : public Error {
public:
    using Error::Error;
};

class DepthError : public Error {
public:
    using Error::Error;
};

class BlowupDetected : public Error {
public:
    BlowupDetected(const std::string& what, std::size_t step)
        : Error(what), step_(step) {}
    // Index of the first step that produced a non-finite state.
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

class SamplingError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    ConfigError(const std::string& field, const std::string& message)
        : Error(field.empty() ? message : field + ": " + message), field_(field) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

}  // namespace pdsde
