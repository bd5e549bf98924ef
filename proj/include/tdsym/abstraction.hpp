#pragma once

#include <cstddef>
#include <string>

#include "json.hpp"

#include "tdsym/delay_system.hpp"
#include "tdsym/parameters.hpp"
#include "tdsym/quantization.hpp"
#include "tdsym/transition_system.hpp"

namespace tdsym {

struct BuildReport {
    std::size_t states = 0;
    std::size_t transitions = 0;
    std::size_t labels = 0;
    std::size_t iterations = 0;
    double lambda_x = 0.0;       // Lambda(N, theta, M)
    double max_residual = 0.0;   // max |x_tau(q, l) - p| over all transitions
    double declared_M = 0.0;
    double observed_M = 0.0;     // max second difference of x_tau along the build
    std::size_t clamped_nodes = 0;
    BigCount state_count_bound = 0;
    double wall_seconds = 0.0;   // not serialized, so reports stay reproducible

    nlohmann::json to_json() const;
};

struct BuildOptions {
    std::size_t threads = 1;
};

struct BuildResult {
    TransitionSystem system;
    BuildReport report;
};

/// |[X]_{2 theta}|^(N + 2)
BigCount state_count_bound(const Box& state_box, std::size_t interior_nodes, double theta);

/// Breadth-first fixed point from psi(xi0): every frontier state is
/// simulated for tau under every input label, the end state quantized and
/// added, until a round yields no new state. `xi0` must be sampled on the
/// build grid (params.samples() points).
BuildResult build_abstraction(const TimeDelaySystem& sys, const AbstractionParams& params, const StateFunction& xi0,
                              const BuildOptions& options = {});

}  // namespace tdsym
