#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "tdsym/certificates.hpp"
#include "tdsym/delay_system.hpp"

namespace tdsym {

/// Sup-norm bounds entering the curvature bound M.
struct SystemBounds {
    double B_X = 0.0;
    double B_X0 = 0.0;
    double B_U = 0.0;
    double B_J = 0.0;
    double kappa = 0.0;
    double M = 0.0;
    bool M_declared = false;  // M supplied by the user rather than computed
};

/// (beta(B_X, 0) + gamma(B_U) + B_U) * kappa * B_J
double compute_M(const SystemBounds& bounds, const DeltaIssCertificate& cert);

/// Fills B_X, B_U and kappa from the system and M from compute_M unless
/// `declared_M` is given.
SystemBounds make_bounds(const TimeDelaySystem& sys, const DeltaIssCertificate& cert, double B_X0, double B_J,
                         std::optional<double> declared_M = std::nullopt);

struct AbstractionParams {
    double tau = 0.0;
    std::size_t interior_nodes = 0;
    double theta = 0.0;
    double lambda_u = 0.0;
    double epsilon = 0.0;
    double M = 0.0;
    std::size_t refinement = 10;  // samples per spline interval
    std::size_t substeps = 1;     // integration steps per sample

    std::size_t samples() const noexcept { return refinement * (interior_nodes + 1) + 1; }
    double grid_step(double delta) const noexcept {
        return delta / static_cast<double>(refinement * (interior_nodes + 1));
    }
    /// Lambda(N, theta, M) on [-delta, 0].
    double lambda_x(double delta) const;

    nlohmann::json to_json() const;
    friend bool operator==(const AbstractionParams&, const AbstractionParams&) = default;
};

/// Fractions of epsilon assigned to beta(eps, tau), gamma(lambda_u) and Lambda.
struct BudgetSplit {
    double beta = 0.5;
    double gamma = 0.25;
    double lambda = 0.25;
};

struct SolverOptions {
    BudgetSplit split;
    std::size_t refinement = 10;
    std::size_t substeps = 1;
    std::size_t max_tau_steps = 100000;  // search limit for tau, in grid steps
};

/// Smallest tau = m * grid_step with m >= min_steps and beta(epsilon, tau) <= target.
double choose_sampling_time(const KLFunction& beta, double epsilon, double target, double grid_step,
                            std::size_t min_steps, std::size_t max_steps);

/// N and theta from the Lambda share, then tau, then lambda_u; the result is
/// re-checked against beta(eps,tau) + gamma(lambda_u) + Lambda <= eps.
AbstractionParams solve_parameters(const TimeDelaySystem& sys, const SystemBounds& bounds,
                                   const DeltaIssCertificate& cert, double epsilon, const SolverOptions& options = {});

/// Initial history with a known bound on its second derivative over its
/// smooth pieces.
struct InitialCondition {
    std::function<Vector(double)> value;
    double curvature = 0.0;
    std::string description;

    StateFunction sample(double delta, std::size_t count, std::size_t dim) const;
};

struct CheckItem {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    std::string relation;   // "<=", "<" or ">"
    std::string status;     // "checked", "validated-not-proved" or "declared"
    std::string category;   // "assumption" or "feasibility"
    bool mandatory = false; // cannot be overridden
    bool passed = false;
};

/// Inequalities are compared with a relative slack of 1e-12 for "<=".
bool holds(double lhs, const std::string& relation, double rhs) noexcept;

struct Ledger {
    std::vector<CheckItem> items;

    void add(std::string name, double lhs, std::string relation, double rhs, std::string category,
             bool mandatory = false, std::string status = "checked");
    bool passed() const noexcept;
    bool passed(const std::string& category) const noexcept;
    bool mandatory_passed() const noexcept;
    /// Whether the failures can be overridden with --force.
    bool overridable() const noexcept { return mandatory_passed(); }
    std::vector<const CheckItem*> failures() const;

    nlohmann::json to_json() const;
    std::string to_text() const;
};

/// Spot estimates of the declared constants, from random points of X x X x U.
double estimate_BJ(const TimeDelaySystem& sys, std::size_t samples, std::uint64_t seed);
double estimate_lipschitz(const TimeDelaySystem& sys, std::size_t pairs, std::uint64_t seed);

struct AssumptionInputs {
    const FalsificationReport* delta_iss = nullptr;  // sampled incremental stability check, if run
    std::optional<double> BJ_estimate;
    std::optional<double> kappa_estimate;
};

/// The numeric assumptions and the precision inequalities for `params`.
Ledger check_assumptions(const TimeDelaySystem& sys, const SystemBounds& bounds, const DeltaIssCertificate& cert,
                         const InitialCondition& xi0, const AbstractionParams& params,
                         const AssumptionInputs& extra = {});

}  // namespace tdsym
