#pragma once

#include <stdexcept>
#include <string>

namespace modelspace {

enum class ErrorCode {
    InvalidArgument,
    PointOutsideDomain,
    EvaluationAtEssentialSingularity,
    NotSelfMap,
    CompositionTooDeep,
    ZeroNotInterior,
    NotTangent,
    NotContained,
    TruncationBudgetExceeded,
    RootNearBoundary,
    NoConvergence,
    TargetEqualsPhiOfZero,
    HypothesisViolated,
    GridTooCoarse,
    BoundaryValueUnavailable,
    DensityPole,
    NonConvergent,
    InvalidConfig,
};

inline const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::PointOutsideDomain: return "PointOutsideDomain";
        case ErrorCode::EvaluationAtEssentialSingularity: return "EvaluationAtEssentialSingularity";
        case ErrorCode::NotSelfMap: return "NotSelfMap";
        case ErrorCode::CompositionTooDeep: return "CompositionTooDeep";
        case ErrorCode::ZeroNotInterior: return "ZeroNotInterior";
        case ErrorCode::NotTangent: return "NotTangent";
        case ErrorCode::NotContained: return "NotContained";
        case ErrorCode::TruncationBudgetExceeded: return "TruncationBudgetExceeded";
        case ErrorCode::RootNearBoundary: return "RootNearBoundary";
        case ErrorCode::NoConvergence: return "NoConvergence";
        case ErrorCode::TargetEqualsPhiOfZero: return "TargetEqualsPhiOfZero";
        case ErrorCode::HypothesisViolated: return "HypothesisViolated";
        case ErrorCode::GridTooCoarse: return "GridTooCoarse";
        case ErrorCode::BoundaryValueUnavailable: return "BoundaryValueUnavailable";
        case ErrorCode::DensityPole: return "DensityPole";
        case ErrorCode::NonConvergent: return "NonConvergent";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI exit-code mapping) can branch without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace modelspace
