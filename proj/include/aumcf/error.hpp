#pragma once

#include <stdexcept>
#include <string>

namespace aumcf {

/// Error families; each maps onto one CLI exit code.
enum class ErrorKind {
    Validation,  // malformed or unidentifiable input data (exit 2)
    Degenerate,  // numerical degeneracy such as a singular covariate matrix (exit 3)
    Config,      // invalid simulation configuration (exit 4)
};

/// Exception carrying a stable machine-readable code alongside the message.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string code, const std::string& message)
        : std::runtime_error(message), kind_(kind), code_(std::move(code)) {}

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& code() const noexcept { return code_; }

private:
    ErrorKind kind_;
    std::string code_;
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Validation: return "validation";
        case ErrorKind::Degenerate: return "degenerate";
        case ErrorKind::Config: return "config";
    }
    return "unknown";
}

inline int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Validation: return 2;
        case ErrorKind::Degenerate: return 3;
        case ErrorKind::Config: return 4;
    }
    return 1;
}

[[noreturn]] inline void fail_validation(std::string code, const std::string& message) {
    throw Error(ErrorKind::Validation, std::move(code), message);
}

}  // namespace aumcf
