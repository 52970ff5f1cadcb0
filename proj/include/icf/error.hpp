#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace icf {

/// Failure categories surfaced by the library. The CLI prints the category
/// name as the first token of its one-line error report.
enum class ErrorKind {
    io,
    malformed_input,
    validation,
    insufficient_length,
    insufficient_data,
    degenerate_filter,
    degenerate_data,
    undefined_correlation,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::io: return "io";
        case ErrorKind::malformed_input: return "malformed-input";
        case ErrorKind::validation: return "validation";
        case ErrorKind::insufficient_length: return "insufficient-length";
        case ErrorKind::insufficient_data: return "insufficient-data";
        case ErrorKind::degenerate_filter: return "degenerate-filter";
        case ErrorKind::degenerate_data: return "degenerate-data";
        case ErrorKind::undefined_correlation: return "undefined-correlation";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
    throw Error(kind, what);
}

}  // namespace icf
