#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace htpv {

enum class ErrorKind {
    not_found,   // input file missing
    parse,       // malformed file content
    validation,  // data violates an invariant
    config,      // bad parameters or configuration
    range,       // requested frequency range is empty
    undefined,   // quantity undefined for the input (e.g. zero-variance correlation)
    io,          // read/write failure
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every library failure is reported as an htpv::Error carrying a kind, so
/// callers (the CLI in particular) can branch on the category.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace htpv
