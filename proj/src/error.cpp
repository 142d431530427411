#include "atrp/error.hpp"

namespace atrp {

const char* error_code_name(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "invalid_argument";
        case ErrorCode::Domain: return "domain";
        case ErrorCode::Parse: return "parse";
        case ErrorCode::Io: return "io";
        case ErrorCode::Convergence: return "convergence";
        case ErrorCode::DegenerateWindow: return "degenerate_window";
        case ErrorCode::Unsupported: return "unsupported";
        case ErrorCode::Saturation: return "saturation";
        case ErrorCode::Divergence: return "divergence";
        case ErrorCode::UndefinedRatio: return "undefined_ratio";
        case ErrorCode::Internal: return "internal";
    }
    return "unknown";
}

}  // namespace atrp
