#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace coems {

enum class ErrorKind {
    InvalidArgument,   // violated precondition or type invariant
    Domain,            // argument outside the mathematical domain
    NotConverged,
    DegenerateData,
    ToneNotFound,
    MissingRBW,
    NoSwitchOff,
    QuadratureNotConverged,
    Io,
    Usage,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline void require(bool condition, ErrorKind kind, const char* message) {
    if (!condition) throw Error(kind, message);
}

}  // namespace coems
