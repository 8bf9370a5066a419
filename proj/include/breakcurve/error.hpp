#pragma once

#include <stdexcept>
#include <string>

namespace breakcurve {

/// Failure categories. The numeric values double as CLI exit codes.
enum class ErrorCode : int {
    invalid_input = 2,
    objective_undefined = 3,
    model_mismatch = 4,
    degenerate_design = 5,
    extrapolation = 6,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

[[noreturn]] inline void invalid(const std::string& what) { throw Error(ErrorCode::invalid_input, what); }

}  // namespace breakcurve
