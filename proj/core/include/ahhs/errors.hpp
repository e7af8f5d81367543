#pragma once

#include <stdexcept>
#include <string>

namespace ahhs {

// Invalid configuration, file format, or command usage. The CLI maps this
// to exit code 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Runtime I/O failure (unwritable destination, short read, ...). The CLI
// maps this to exit code 1.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace ahhs
