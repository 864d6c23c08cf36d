#include "lamination/errors.hpp"

#include <cstdio>

namespace lamination {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::Domain: return "DomainError";
        case ErrorCode::Quadrature: return "QuadratureError";
        case ErrorCode::Tolerance: return "ToleranceError";
        case ErrorCode::UndefinedCoupling: return "UndefinedCoupling";
        case ErrorCode::NoBracket: return "NoBracket";
        case ErrorCode::Pole: return "PoleError";
        case ErrorCode::Config: return "ConfigError";
        case ErrorCode::Unsupported: return "UnsupportedError";
        case ErrorCode::Precondition: return "PreconditionError";
    }
    return "Error";
}

std::string format_double(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

}  // namespace lamination
