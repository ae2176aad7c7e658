#pragma once

#include <stdexcept>
#include <string>

namespace franson {

enum class ErrorCode {
    invalid_argument,
    regime_violation,
    io_error,
    internal,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void throw_invalid(const std::string& msg) {
    throw Error(ErrorCode::invalid_argument, msg);
}

[[noreturn]] inline void throw_regime(const std::string& msg) {
    throw Error(ErrorCode::regime_violation, msg);
}

[[noreturn]] inline void throw_io(const std::string& msg) {
    throw Error(ErrorCode::io_error, msg);
}

} // namespace franson
