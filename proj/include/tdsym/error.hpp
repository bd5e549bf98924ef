#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tdsym {

enum class ErrorCode {
    shape_error,
    rhs_evaluation_failure,
    state_escape,
    integration_divergence,
    input_delay_misaligned,
    driver_derivative_unstable,
    no_decay_rate,
    basis_error,
    lookup_error,
    bound_violation,
    metric_error,
    insufficient_contraction,
    infeasible,
    stale_artifact,
    parse_error,
    io_error,
};

// Stable kebab-case name used in reports and CLI diagnostics.
std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), m_code(code), m_detail(what) {}

    ErrorCode code() const noexcept { return m_code; }
    /// Message without the code prefix.
    const std::string& detail() const noexcept { return m_detail; }

private:
    ErrorCode m_code;
    std::string m_detail;
};

}  // namespace tdsym
