#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

namespace kylehft {

enum class ErrorKind {
    InvalidParameter,
    DegenerateDenominator,
    NegativeRadicand,
    NoRoot,
    OnlySOCViolating,
    BracketFailure,
    PredicateMonotoneViolation,
    BoundaryNotBracketed,
    NoConvergence,
    PDViolation,
    NotBestResponse,
};

inline std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::InvalidParameter: return "InvalidParameter";
    case ErrorKind::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorKind::NegativeRadicand: return "NegativeRadicand";
    case ErrorKind::NoRoot: return "NoRoot";
    case ErrorKind::OnlySOCViolating: return "OnlySOCViolating";
    case ErrorKind::BracketFailure: return "BracketFailure";
    case ErrorKind::PredicateMonotoneViolation: return "PredicateMonotoneViolation";
    case ErrorKind::BoundaryNotBracketed: return "BoundaryNotBracketed";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::PDViolation: return "PDViolation";
    case ErrorKind::NotBestResponse: return "NotBestResponse";
    }
    return "Unknown";
}

/// Every failure raised by the library carries a machine-readable kind so
/// callers (the CLI in particular) can map it onto exit codes.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

namespace detail {

inline constexpr double kTinyDenominator = 1e-300;

inline double checked_div(double num, double den, const char* what) {
    if (!(std::abs(den) >= kTinyDenominator)) {
        throw Error(ErrorKind::DegenerateDenominator, what);
    }
    return num / den;
}

} // namespace detail
} // namespace kylehft
