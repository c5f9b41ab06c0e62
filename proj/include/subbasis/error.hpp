// error.hpp
//
// Exception types shared by every module. Each error carries a short
// machine-readable code; the CLI maps the category to an exit status.

#pragma once

#include <stdexcept>
#include <string>

namespace subbasis {

class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

// A computation would exceed a memory or work budget, or asks for data
// beyond what a sieve covers.
class ResourceError : public Error {
public:
    using Error::Error;
};

// An argument is outside the supported size range of a brute-force routine.
class SizeError : public Error {
public:
    using Error::Error;
};

// Invalid parameters or configuration (violated preconditions).
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace subbasis
