#pragma once

#include <stdexcept>
#include <string>

namespace credo {

// All recoverable failures in the library surface as credo::Error with a
// distinct diagnostic message. Programming errors stay asserts.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace credo
