#include "radflow/error.hpp"

namespace radflow {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidProfile: return "InvalidProfile";
        case ErrorCode::NonPositiveProfile: return "NonPositiveProfile";
        case ErrorCode::DomainExceeded: return "DomainExceeded";
        case ErrorCode::VolumeExceedsManifold: return "VolumeExceedsManifold";
        case ErrorCode::CompactProfile: return "CompactProfile";
        case ErrorCode::UnsupportedTail: return "UnsupportedTail";
        case ErrorCode::GridMismatch: return "GridMismatch";
        case ErrorCode::ZeroEnergy: return "ZeroEnergy";
        case ErrorCode::ShootingBracketFailed: return "ShootingBracketFailed";
        case ErrorCode::NonConvergence: return "NonConvergence";
        case ErrorCode::PreconditionOrderFails: return "PreconditionOrderFails";
        case ErrorCode::NotApplicable: return "NotApplicable";
        case ErrorCode::StepRejected: return "StepRejected";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::EvalDomainError: return "EvalDomainError";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::ExperimentInconsistent: return "ExperimentInconsistent";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

namespace {
std::string describe(std::size_t offset, const std::vector<std::string>& expected,
                     const std::string& detail) {
    std::string msg = detail + " at offset " + std::to_string(offset);
    if (!expected.empty()) {
        msg += " (expected one of:";
        for (const auto& e : expected) msg += " " + e;
        msg += ")";
    }
    return msg;
}
}  // namespace

ParseError::ParseError(std::size_t offset, std::vector<std::string> expected,
                       const std::string& detail)
    : Error(ErrorCode::ParseError, describe(offset, expected, detail)),
      offset_(offset),
      expected_(std::move(expected)) {}

}  // namespace radflow
