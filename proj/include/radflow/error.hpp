#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace radflow {

enum class ErrorCode {
    InvalidProfile,
    NonPositiveProfile,
    DomainExceeded,
    VolumeExceedsManifold,
    CompactProfile,
    UnsupportedTail,
    GridMismatch,
    ZeroEnergy,
    ShootingBracketFailed,
    NonConvergence,
    PreconditionOrderFails,
    NotApplicable,
    StepRejected,
    ParseError,
    EvalDomainError,
    ConfigError,
    IoError,
    ExperimentInconsistent,
    InvalidArgument,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Raised by the expression parser; carries the byte offset where parsing
/// stopped and the set of tokens that would have been accepted there.
class ParseError : public Error {
public:
    ParseError(std::size_t offset, std::vector<std::string> expected, const std::string& detail);

    [[nodiscard]] std::size_t offset() const noexcept { return offset_; }
    [[nodiscard]] const std::vector<std::string>& expected() const noexcept { return expected_; }

private:
    std::size_t offset_;
    std::vector<std::string> expected_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace radflow
