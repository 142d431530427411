#pragma once

#include <stdexcept>
#include <string>

namespace atrp {

/// Error categories shared by the C++ core and the C API status codes.
enum class ErrorCode {
    InvalidArgument = 1,
    Domain,
    Parse,
    Io,
    Convergence,
    DegenerateWindow,
    Unsupported,
    Saturation,
    Divergence,
    UndefinedRatio,
    Internal,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool condition, ErrorCode code, const std::string& what) {
    if (!condition) fail(code, what);
}

// literal messages are only turned into strings on failure
inline void require(bool condition, ErrorCode code, const char* what) {
    if (!condition) [[unlikely]] fail(code, what);
}

}  // namespace atrp
