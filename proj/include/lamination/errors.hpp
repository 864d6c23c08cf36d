#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lamination {

enum class ErrorCode {
    Domain,
    Quadrature,
    Tolerance,
    UndefinedCoupling,
    NoBracket,
    Pole,
    Config,
    Unsupported,
    Precondition,
};

std::string_view to_string(ErrorCode code) noexcept;

// Base for every error the library raises. `context` carries machine-readable
// key/value detail (offending depth, replica index, ...) for the CLI reports.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, std::map<std::string, std::string> context = {})
        : std::runtime_error(message), code_(code), context_(std::move(context)) {}

    ErrorCode code() const noexcept { return code_; }
    const std::map<std::string, std::string>& context() const noexcept { return context_; }
    std::map<std::string, std::string>& context() noexcept { return context_; }

private:
    ErrorCode code_;
    std::map<std::string, std::string> context_;
};

#define LAMINATION_DEFINE_ERROR(Name, Code)                                                         \
    class Name : public Error {                                                                     \
    public:                                                                                         \
        explicit Name(const std::string& message, std::map<std::string, std::string> context = {}) \
            : Error(ErrorCode::Code, message, std::move(context)) {}                                \
    };

LAMINATION_DEFINE_ERROR(DomainError, Domain)
LAMINATION_DEFINE_ERROR(QuadratureError, Quadrature)
LAMINATION_DEFINE_ERROR(ToleranceError, Tolerance)
LAMINATION_DEFINE_ERROR(UndefinedCoupling, UndefinedCoupling)
LAMINATION_DEFINE_ERROR(NoBracket, NoBracket)
LAMINATION_DEFINE_ERROR(PoleError, Pole)
LAMINATION_DEFINE_ERROR(ConfigError, Config)
LAMINATION_DEFINE_ERROR(UnsupportedError, Unsupported)
LAMINATION_DEFINE_ERROR(PreconditionError, Precondition)

#undef LAMINATION_DEFINE_ERROR

std::string format_double(double value);

}  // namespace lamination
