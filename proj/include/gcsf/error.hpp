#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gcsf {

enum class ErrorKind {
    InvalidArgument,
    ClosureViolation,
    NotConvex,
    NonPositiveCurvature,
    ClosureDrift,
    ResolutionLoss,
    GaugeDrift,
    PoorFit,
    DivergentIntegral,
    NonPositive,
    ConfigError,
    SchemaError,
};

constexpr std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::ClosureViolation: return "ClosureViolation";
        case ErrorKind::NotConvex: return "NotConvex";
        case ErrorKind::NonPositiveCurvature: return "NonPositiveCurvature";
        case ErrorKind::ClosureDrift: return "ClosureDrift";
        case ErrorKind::ResolutionLoss: return "ResolutionLoss";
        case ErrorKind::GaugeDrift: return "GaugeDrift";
        case ErrorKind::PoorFit: return "PoorFit";
        case ErrorKind::DivergentIntegral: return "DivergentIntegral";
        case ErrorKind::NonPositive: return "NonPositive";
        case ErrorKind::ConfigError: return "ConfigError";
        case ErrorKind::SchemaError: return "SchemaError";
    }
    return "Unknown";
}

/// Every failure raised by the library carries a machine-readable kind; the
/// CLI serializes `name()` into summary.json on numerical aborts.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }
    std::string_view name() const noexcept { return to_string(kind_); }

private:
    ErrorKind kind_;
};

}  // namespace gcsf
