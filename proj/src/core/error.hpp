#pragma once

#include <stdexcept>
#include <string>

namespace ov {

// Error classes kept distinguishable so the C boundary can map them to codes.
enum class Errc {
    invalid_argument,
    io,
    parse,
    empty_mesh,
    normalization,
    bad_magic,
    bad_version,
    truncated,
    reserved_bits,
    corrupt,
    invalid_grid,
    internal,
};

class Error : public std::runtime_error {
public:
    Error(Errc code, std::string message) : std::runtime_error(std::move(message)), code_(code) {}
    Errc code() const { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void raise(Errc code, std::string message) {
    throw Error(code, std::move(message));
}

}  // namespace ov
