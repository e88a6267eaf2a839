#pragma once

#include <stdexcept>
#include <string>

namespace conjlab {

enum class ErrorCode {
    invalid_argument = 1,
    unknown_entry,
    param_constraint,
    integrator_failure,
    truncation,
    non_contraction,
    divergence,
    missing_derivative,
    singular_matrix,
    config,
    iteration_limit,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string msg)
        : std::runtime_error(std::move(msg)), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) {
    throw Error(code, msg);
}

} // namespace conjlab
