#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"

#include "tdsym/bisimulation.hpp"
#include "tdsym/certificates.hpp"
#include "tdsym/delay_system.hpp"
#include "tdsym/parameters.hpp"

namespace tdsym {

struct ProbeSettings {
    std::uint64_t seed = 0;
    std::size_t count = 200;
    std::size_t horizon_steps = 10;
    bool kink = true;
    std::size_t estimate_samples = 200;  // points for the kappa and B_J spot estimates
};

/// A parsed pipeline configuration (schema in docs/config.md).
struct PipelineConfig {
    nlohmann::json source;  // the document after command-line overrides
    std::shared_ptr<const TimeDelaySystem> system;
    InitialCondition initial;
    double B_X0 = 0.0;
    std::optional<double> B_J;
    std::optional<double> M;
    std::optional<DeltaIssCertificate> certificate;
    SolverOptions solver;
    double epsilon = 0.0;
    std::optional<AbstractionParams> explicit_params;  // bypasses the solver
    ProbeSettings probes;
    ValidationPlan validation;

    /// Hash of everything that determines the abstraction; probe and
    /// validation settings are excluded.
    std::string model_hash() const;
};

struct ConfigOverrides {
    std::optional<double> epsilon;
    std::optional<std::uint64_t> seed;  // replaces both probe and validation seeds
};

nlohmann::json load_json(const std::string& path);
void apply_overrides(nlohmann::json& doc, const ConfigOverrides& o);
PipelineConfig parse_config(const nlohmann::json& doc);
PipelineConfig load_config(const std::string& path, const ConfigOverrides& o = {});

std::string fnv1a_hex(std::string_view bytes);

}  // namespace tdsym
