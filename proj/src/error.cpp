#include "tdsym/error.hpp"

namespace tdsym {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::shape_error: return "shape-error";
    case ErrorCode::rhs_evaluation_failure: return "rhs-evaluation-failure";
    case ErrorCode::state_escape: return "state-escape";
    case ErrorCode::integration_divergence: return "integration-divergence";
    case ErrorCode::input_delay_misaligned: return "input-delay-misaligned";
    case ErrorCode::driver_derivative_unstable: return "driver-derivative-unstable";
    case ErrorCode::no_decay_rate: return "no-decay-rate";
    case ErrorCode::basis_error: return "basis-error";
    case ErrorCode::lookup_error: return "lookup-error";
    case ErrorCode::bound_violation: return "bound-violation";
    case ErrorCode::metric_error: return "metric-error";
    case ErrorCode::insufficient_contraction: return "insufficient-contraction";
    case ErrorCode::infeasible: return "infeasible";
    case ErrorCode::stale_artifact: return "stale-artifact";
    case ErrorCode::parse_error: return "parse-error";
    case ErrorCode::io_error: return "io-error";
    }
    return "unknown";
}

}  // namespace tdsym
