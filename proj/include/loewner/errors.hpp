#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace loewner {

enum class ErrorKind {
    NonHermitian,
    ShapeMismatch,
    NotCommuting,
    DiagonalizationFailed,
    NotGeneric,
    InconsistentDirection,
    DomainViolation,
    DimensionMismatch,
    DegenerateNodes,
    NotSkewSymmetric,
    PoleHit,
    SingularResolvent,
    SingularLiftedResolvent,
    NotUnitary,
    TauTooCloseToSpectrum,
    RealityViolation,
    DegenerateBox,
    RetryExhausted,
    InvalidArgument,
    SchemaError,
};

inline std::string_view to_string(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::NonHermitian: return "NonHermitian";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::NotCommuting: return "NotCommuting";
    case ErrorKind::DiagonalizationFailed: return "DiagonalizationFailed";
    case ErrorKind::NotGeneric: return "NotGeneric";
    case ErrorKind::InconsistentDirection: return "InconsistentDirection";
    case ErrorKind::DomainViolation: return "DomainViolation";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::DegenerateNodes: return "DegenerateNodes";
    case ErrorKind::NotSkewSymmetric: return "NotSkewSymmetric";
    case ErrorKind::PoleHit: return "PoleHit";
    case ErrorKind::SingularResolvent: return "SingularResolvent";
    case ErrorKind::SingularLiftedResolvent: return "SingularLiftedResolvent";
    case ErrorKind::NotUnitary: return "NotUnitary";
    case ErrorKind::TauTooCloseToSpectrum: return "TauTooCloseToSpectrum";
    case ErrorKind::RealityViolation: return "RealityViolation";
    case ErrorKind::DegenerateBox: return "DegenerateBox";
    case ErrorKind::RetryExhausted: return "RetryExhausted";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::SchemaError: return "SchemaError";
    }
    return "Unknown";
}

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind)
    {
    }

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

} // namespace loewner
