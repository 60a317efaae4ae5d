#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace affinekit {

enum class ErrorCode {
    SingularInput,
    NegativeOrientation,
    DegenerateSpectrum,
    DegenerateMetric,
    MissingParams,
    NonDifferentiable,
    IterationDiverged,
    StateInvalid,
    InvalidInertia,
    ConvergenceFailure,
    DomainOverflow,
    ParseError,
    ValidationError,
    InvalidArgument,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace affinekit
