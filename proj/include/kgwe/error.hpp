#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kgwe {

// Base for runtime failures caused by input data or the environment.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A caller broke an operation's precondition (bad id, shape mismatch, ...).
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Malformed file content. Carries the 1-based line number of the offending line.
class FormatError : public Error {
public:
    FormatError(std::size_t line, const std::string& message)
        : Error("line " + std::to_string(line) + ": " + message), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace kgwe
