#pragma once

#include <stdexcept>
#include <string>

namespace rprae {

// Base class for all library errors so callers can catch one type.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Tensor/op shape disagreements.
struct ShapeError : Error {
    explicit ShapeError(const std::string& msg) : Error(msg) {}
};

// NaN/Inf or other numeric-domain violations.
struct NumericError : Error {
    explicit NumericError(const std::string& msg) : Error(msg) {}
};

// Malformed input files (embedding files, datasets, checkpoints).
struct ParseError : Error {
    explicit ParseError(const std::string& msg) : Error(msg) {}
};

// Token not present in the embedding table.
struct VocabError : Error {
    explicit VocabError(const std::string& msg) : Error(msg) {}
};

// Checkpoint/config/dataset combinations that do not fit together.
struct CompatError : Error {
    explicit CompatError(const std::string& msg) : Error(msg) {}
};

// Bad user-facing arguments (CLI maps these to exit code 2).
struct UsageError : Error {
    explicit UsageError(const std::string& msg) : Error(msg) {}
};

}  // namespace rprae
