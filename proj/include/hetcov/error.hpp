#pragma once

#include <stdexcept>
#include <string>

namespace hetcov {

enum class ErrorCode {
    invalid_input,
    degenerate_configuration,
    no_shared_edge,
    outside_environment,
    constraint_violation,
    excluded_robot,
    scenario,
    numerical_failure,
};

inline const char* to_string(ErrorCode code)
{
    switch (code) {
        case ErrorCode::invalid_input: return "invalid input";
        case ErrorCode::degenerate_configuration: return "degenerate configuration";
        case ErrorCode::no_shared_edge: return "no shared edge";
        case ErrorCode::outside_environment: return "outside environment";
        case ErrorCode::constraint_violation: return "constraint violation";
        case ErrorCode::excluded_robot: return "excluded robot";
        case ErrorCode::scenario: return "scenario error";
        case ErrorCode::numerical_failure: return "numerical failure";
    }
    return "unknown error";
}

class Error : public std::runtime_error
{
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
    {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace hetcov
