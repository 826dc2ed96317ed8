#pragma once

#include <stdexcept>
#include <string>

namespace deft {

// Malformed input files: bad column counts, unknown labels, broken offsets.
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Invalid configuration: out-of-range sizes, missing required options.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Well-formed inputs that do not fit together: length or shape mismatches,
// vocabulary/checkpoint disagreement, misaligned gold/pred files.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Unwritable or unreadable paths.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace deft
