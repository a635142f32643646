#pragma once

#include <stdexcept>
#include <string>

namespace rattree {

// Exit-code mapping for the CLI lives in tools/; the library only throws.
struct parse_error : std::runtime_error {
    std::size_t position;
    parse_error(const std::string& msg, std::size_t pos)
        : std::runtime_error(msg), position(pos) {}
};

struct precision_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct classification_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct size_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace rattree
