#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "tdsym/delay_system.hpp"

namespace tdsym {

/// Class-K function c * s^p.
class KFunction {
public:
    explicit KFunction(double c = 1.0, double p = 1.0);

    double operator()(double s) const noexcept;
    /// Largest s with (*this)(s) <= v, by bisection.
    double inverse(double v) const;

    double c() const noexcept { return m_c; }
    double p() const noexcept { return m_p; }

private:
    double m_c;
    double m_p;
};

/// Class-KL function C * s * exp(-sigma * t).
class KLFunction {
public:
    KLFunction(double gain, double rate);

    double operator()(double s, double t) const noexcept;

    double gain() const noexcept { return m_gain; }
    double rate() const noexcept { return m_rate; }

private:
    double m_gain;
    double m_rate;
};

struct DeltaIssCertificate {
    KLFunction beta;
    KFunction gamma;
};

/// The sigma in (0, a - b] with sigma = a - b * exp(sigma * delta).
double halanay_rate(double a, double b, double delta);

/// Certificate for a scalar system dx/dt = -a x(t) + b g(x(t - delta)) + c u
/// with |g(x) - g(y)| <= |x - y|: beta(s,t) = e^{sigma delta} s e^{-sigma t}
/// and gamma(s) = |c| s / (a - |b|). The e^{sigma delta} factor accounts for
/// the history window of the sup norm.
DeltaIssCertificate halanay_certificate(double a, double b, double input_gain, double delta);

struct Violation {
    std::size_t probe = 0;
    double time = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
    std::string condition;

    friend bool operator==(const Violation&, const Violation&) = default;
};

struct FalsificationReport {
    std::string check;
    std::size_t probes = 0;
    std::size_t evaluations = 0;
    double worst_margin = -1e300;  // max of lhs - rhs
    std::vector<Violation> violations;

    bool passed() const noexcept { return violations.empty(); }
    nlohmann::json to_json() const;

    friend bool operator==(const FalsificationReport&, const FalsificationReport&) = default;
};

/// Random probes for the sampled checks. Initial histories are constant or
/// piecewise linear with one kink, uniform over the state box; inputs are
/// drawn uniformly from `labels`.
struct ProbePlan {
    std::size_t count = 200;
    std::size_t horizon_steps = 10;   // horizon = horizon_steps * tau
    double tau = 0.0;
    std::size_t history_samples = 11; // samples per history segment
    std::size_t substeps = 1;
    std::uint64_t seed = 0;
    bool kink_probes = true;
    bool same_input = false;
    std::vector<Vector> labels;
    std::size_t threads = 1;
};

/// Worst violations of the incremental stability inequality for one pair of
/// runs, checked at every integration point up to steps * tau.
std::vector<Violation> delta_iss_violations(const TimeDelaySystem& sys, const DeltaIssCertificate& cert,
                                            const StateFunction& xi1, const StateFunction& xi2,
                                            const std::vector<Vector>& u1, const std::vector<Vector>& u2,
                                            double tau, std::size_t substeps, double* worst_margin = nullptr,
                                            std::size_t* evaluations = nullptr);

FalsificationReport check_delta_iss(const TimeDelaySystem& sys, const DeltaIssCertificate& cert,
                                    const ProbePlan& plan);

/// Liapunov-Krasovskii candidate with its comparison functions.
struct LKFunctional {
    std::function<double(const StateFunction&, const StateFunction&)> value;
    std::function<double(const StateFunction&)> gauge;  // M_a
    KFunction alpha1, alpha2, alpha3, rho;
    KFunction gauge_lower, gauge_upper;
};

/// V = |x1(0) - x2(0)|^2 with M_a the sup norm.
LKFunctional point_quadratic_lk(KFunction alpha3, KFunction rho);
/// V = |e(0)|^2 + mu * int_{-delta}^0 e^{rate s} |e(s)|^2 ds, e = x1 - x2,
/// with M_a = sqrt(|e(0)|^2 + int e^{rate s} |e(s)|^2 ds).
LKFunctional weighted_quadratic_lk(double mu, double rate, double delta, KFunction alpha3, KFunction rho);

struct DriverEstimate {
    double value = 0.0;
    double spread = 0.0;
    std::vector<double> ladder_values;
};

/// Finite-difference Driver derivative along the shift-and-extend
/// construction, one estimate per step of the decreasing theta ladder.
DriverEstimate driver_derivative(const LKFunctional& lk, const StateFunction& x1, const StateFunction& x2,
                                 std::span<const double> u1, std::span<const double> u2,
                                 const TimeDelaySystem& sys, std::span<const double> theta_ladder = {});

FalsificationReport check_lk_functional(const TimeDelaySystem& sys, const LKFunctional& lk, const ProbePlan& plan);

StateFunction subtract(const StateFunction& a, const StateFunction& b);

/// Draws the probe history used by the sampled checks.
StateFunction random_history(const Box& box, double delta, std::size_t samples, bool allow_kink,
                             std::mt19937_64& rng);

/// Independent generator for work item `index` of a seeded procedure.
std::mt19937_64 item_rng(std::uint64_t seed, std::uint64_t index);

}  // namespace tdsym
