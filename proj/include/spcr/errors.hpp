#pragma once

#include <stdexcept>
#include <string>

namespace spcr {

// Bad user-supplied data (CSV defects, unknown family, dimension mismatch).
struct InputError : std::runtime_error {
    explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

// The optimizer or a downstream computation produced a non-finite value.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace spcr
