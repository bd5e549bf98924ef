#include "tdsym/parameters.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tdsym/error.hpp"
#include "tdsym/quantization.hpp"
#include "tdsym/text.hpp"

namespace tdsym {

double compute_M(const SystemBounds& b, const DeltaIssCertificate& cert) {
    return (cert.beta(b.B_X, 0.0) + cert.gamma(b.B_U) + b.B_U) * b.kappa * b.B_J;
}

SystemBounds make_bounds(const TimeDelaySystem& sys, const DeltaIssCertificate& cert, double B_X0, double B_J,
                         std::optional<double> declared_M) {
    SystemBounds b;
    b.B_X = sys.state_box().norm_bound();
    b.B_X0 = B_X0;
    b.B_U = sys.input_box().norm_bound();
    b.B_J = B_J;
    b.kappa = sys.kappa();
    if (declared_M) {
        b.M = *declared_M;
        b.M_declared = true;
    } else {
        b.M = compute_M(b, cert);
    }
    for (double v : {b.B_X0, b.B_J, b.kappa, b.M})
        if (!(v > 0.0) || !std::isfinite(v)) throw Error(ErrorCode::shape_error, "bounds must be positive and finite");
    return b;
}

double AbstractionParams::lambda_x(double delta) const { return lambda_bound(interior_nodes, theta, M, delta); }

nlohmann::json AbstractionParams::to_json() const {
    return {{"tau", tau},           {"N", interior_nodes},  {"theta", theta},         {"lambda_u", lambda_u},
            {"epsilon", epsilon},   {"M", M},               {"refinement", refinement}, {"substeps", substeps}};
}

double choose_sampling_time(const KLFunction& beta, double epsilon, double target, double grid_step,
                            std::size_t min_steps, std::size_t max_steps) {
    // Start just below the closed-form crossing and walk up on the grid.
    std::size_t m = min_steps;
    const double crossing = std::log(beta(epsilon, 0.0) / target) / beta.rate();
    if (std::isfinite(crossing) && crossing > 0.0) {
        const double guess = std::floor(crossing / grid_step) - 2.0;
        if (guess > static_cast<double>(m)) m = static_cast<std::size_t>(std::min(guess, static_cast<double>(max_steps)));
    }
    for (; m <= max_steps; ++m) {
        const double tau = static_cast<double>(m) * grid_step;
        if (beta(epsilon, tau) <= target) return tau;
    }
    throw Error(ErrorCode::insufficient_contraction,
                "beta(eps, tau) stays above " + format_number(target) + " for tau up to " +
                    format_number(static_cast<double>(max_steps) * grid_step));
}

AbstractionParams solve_parameters(const TimeDelaySystem& sys, const SystemBounds& bounds,
                                   const DeltaIssCertificate& cert, double epsilon, const SolverOptions& options) {
    const BudgetSplit& s = options.split;
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw Error(ErrorCode::infeasible, "epsilon must be positive");
    if (!(s.beta > 0.0) || !(s.gamma > 0.0) || !(s.lambda > 0.0) || s.beta + s.gamma + s.lambda > 1.0 + 1e-12)
        throw Error(ErrorCode::infeasible, "budget fractions must be positive and sum to at most 1");
    if (options.refinement < 1 || options.substeps < 1)
        throw Error(ErrorCode::shape_error, "refinement and substeps must be at least 1");

    AbstractionParams p;
    p.epsilon = epsilon;
    p.M = bounds.M;
    p.refinement = options.refinement;
    p.substeps = options.substeps;
    const SplineResolution r = choose_resolution(s.lambda * epsilon, bounds.M, sys.delta());
    p.interior_nodes = r.interior_nodes;
    p.theta = r.theta;

    const double g = p.grid_step(sys.delta());
    const std::size_t min_steps = 2 * options.refinement * (p.interior_nodes + 1) + 1;
    p.tau = choose_sampling_time(cert.beta, epsilon, s.beta * epsilon, g, min_steps,
                                 std::max(options.max_tau_steps, min_steps));
    p.lambda_u = cert.gamma.inverse(s.gamma * epsilon);

    const double total = cert.beta(epsilon, p.tau) + cert.gamma(p.lambda_u) + p.lambda_x(sys.delta());
    if (!holds(total, "<=", epsilon) || !(cert.beta(epsilon, p.tau) < epsilon))
        throw Error(ErrorCode::infeasible, "parameters violate the precision inequality: " + format_number(total) +
                                               " > " + format_number(epsilon));
    return p;
}

StateFunction InitialCondition::sample(double delta, std::size_t count, std::size_t dim) const {
    return StateFunction::sample(delta, count, dim, value);
}

bool holds(double lhs, const std::string& relation, double rhs) noexcept {
    if (relation == "<=") return lhs <= rhs + 1e-12 * (1.0 + std::abs(rhs));
    if (relation == "<") return lhs < rhs;
    if (relation == ">") return lhs > rhs;
    return false;
}

void Ledger::add(std::string name, double lhs, std::string relation, double rhs, std::string category,
                 bool mandatory, std::string status) {
    CheckItem item{std::move(name), lhs, rhs, std::move(relation), std::move(status), std::move(category), mandatory,
                   false};
    item.passed = holds(item.lhs, item.relation, item.rhs);
    items.push_back(std::move(item));
}

bool Ledger::passed() const noexcept {
    return std::all_of(items.begin(), items.end(), [](const CheckItem& i) { return i.passed; });
}

bool Ledger::passed(const std::string& category) const noexcept {
    return std::all_of(items.begin(), items.end(),
                       [&](const CheckItem& i) { return i.passed || i.category != category; });
}

bool Ledger::mandatory_passed() const noexcept {
    return std::all_of(items.begin(), items.end(), [](const CheckItem& i) { return i.passed || !i.mandatory; });
}

std::vector<const CheckItem*> Ledger::failures() const {
    std::vector<const CheckItem*> out;
    for (const auto& i : items)
        if (!i.passed) out.push_back(&i);
    return out;
}

nlohmann::json Ledger::to_json() const {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& i : items) {
        j.push_back({{"name", i.name},
                     {"lhs", i.lhs},
                     {"relation", i.relation},
                     {"rhs", i.rhs},
                     {"status", i.status},
                     {"category", i.category},
                     {"mandatory", i.mandatory},
                     {"passed", i.passed}});
    }
    return j;
}

std::string Ledger::to_text() const {
    std::ostringstream out;
    for (const auto& i : items) {
        out << (i.passed ? "[pass] " : "[FAIL] ") << i.name << ": " << format_number(i.lhs) << ' ' << i.relation << ' '
            << format_number(i.rhs);
        if (i.status != "checked") out << " (" << i.status << ')';
        if (i.mandatory) out << " [mandatory]";
        out << '\n';
    }
    return out.str();
}

namespace {

struct RhsPoint {
    Vector now, delayed, u;
};

RhsPoint random_point(const TimeDelaySystem& sys, std::mt19937_64& rng) {
    auto draw = [&](const Box& box) {
        Vector v(box.dim());
        for (std::size_t i = 0; i < v.size(); ++i)
            v[i] = std::uniform_real_distribution<double>(box.lo()[i], box.hi()[i])(rng);
        return v;
    };
    RhsPoint p{draw(sys.state_box()), draw(sys.state_box()), draw(sys.input_box())};
    return p;
}

Vector eval_rhs(const TimeDelaySystem& sys, const RhsPoint& p) {
    Vector out(sys.state_dim());
    sys.rhs().eval(p.now, p.delayed, p.u, out);
    return out;
}

}  // namespace

double estimate_BJ(const TimeDelaySystem& sys, std::size_t samples, std::uint64_t seed) {
    const std::size_t n = sys.state_dim();
    double best = 0.0;
    for (std::size_t k = 0; k < samples; ++k) {
        auto rng = item_rng(seed, k);
        RhsPoint p = random_point(sys, rng);
        std::vector<double> row_sums(n, 0.0);
        for (Vector* arg : {&p.now, &p.delayed}) {
            for (std::size_t j = 0; j < n; ++j) {
                const double x = (*arg)[j];
                const double h = 1e-6 * std::max(1.0, std::abs(x));
                (*arg)[j] = x + h;
                const Vector fp = eval_rhs(sys, p);
                (*arg)[j] = x - h;
                const Vector fm = eval_rhs(sys, p);
                (*arg)[j] = x;
                for (std::size_t i = 0; i < n; ++i) row_sums[i] += std::abs(fp[i] - fm[i]) / (2.0 * h);
            }
        }
        best = std::max(best, *std::max_element(row_sums.begin(), row_sums.end()));
    }
    return best;
}

double estimate_lipschitz(const TimeDelaySystem& sys, std::size_t pairs, std::uint64_t seed) {
    double best = 0.0;
    for (std::size_t k = 0; k < pairs; ++k) {
        auto rng = item_rng(seed, k);
        const RhsPoint a = random_point(sys, rng);
        const RhsPoint b = random_point(sys, rng);
        const double dx = std::max(inf_distance(a.now, b.now), inf_distance(a.delayed, b.delayed));
        const double d = dx + inf_distance(a.u, b.u);
        if (d > 0.0) best = std::max(best, inf_distance(eval_rhs(sys, a), eval_rhs(sys, b)) / d);
    }
    return best;
}

Ledger check_assumptions(const TimeDelaySystem& sys, const SystemBounds& b, const DeltaIssCertificate& cert,
                         const InitialCondition& xi0, const AbstractionParams& p, const AssumptionInputs& extra) {
    Ledger ledger;
    const double delta = sys.delta();
    ledger.add("tau > 2*delta", p.tau, ">", 2.0 * delta, "assumption", true);

    const StateFunction x0 = xi0.sample(delta, p.samples(), sys.state_dim());
    double excess = 0.0;
    for (std::size_t j = 0; j < x0.count(); ++j) {
        const auto v = x0.at(j);
        for (std::size_t i = 0; i < v.size(); ++i)
            excess = std::max({excess, sys.state_box().lo()[i] - v[i], v[i] - sys.state_box().hi()[i]});
    }
    ledger.add("distance of xi0 outside X", excess, "<=", 0.0, "assumption");
    ledger.add("||xi0|| <= B_X0", x0.sup_norm(), "<=", b.B_X0, "assumption");
    ledger.add("||D^2 xi0|| < M", xi0.curvature, "<", b.M, "assumption");
    ledger.add("B_X0 <= B_X", b.B_X0, "<=", b.B_X, "assumption");
    const double gu = cert.gamma(b.B_U);
    ledger.add("beta(B_X0,0) + gamma(B_U) <= B_X", cert.beta(b.B_X0, 0.0) + gu, "<=", b.B_X, "assumption");
    ledger.add("beta(B_X0,tau) + gamma(B_U) <= B_X0", cert.beta(b.B_X0, p.tau) + gu, "<=", b.B_X0, "assumption");
    if (b.M_declared)
        ledger.add("(beta(B_X,0) + gamma(B_U) + B_U)*kappa*B_J <= M", compute_M(b, cert), "<=", b.M, "assumption");
    if (extra.delta_iss) {
        ledger.add("delta-ISS margin on sampled probes", extra.delta_iss->worst_margin, "<=", 0.0, "assumption", false,
                   "validated-not-proved");
        ledger.items.back().passed = extra.delta_iss->passed();
    }
    // Finite-difference estimates carry rounding error well above 1e-12.
    constexpr double estimate_tol = 1e-6;
    if (extra.kappa_estimate)
        ledger.add("Lipschitz estimate <= kappa (1e-6 rel.)", *extra.kappa_estimate, "<=", b.kappa * (1 + estimate_tol),
                   "assumption", false, "declared");
    if (extra.BJ_estimate)
        ledger.add("Frechet differential estimate <= B_J (1e-6 rel.)", *extra.BJ_estimate, "<=",
                   b.B_J * (1 + estimate_tol), "assumption", false, "declared");

    const double beta_eps = cert.beta(p.epsilon, p.tau);
    ledger.add("beta(eps,tau) < eps", beta_eps, "<", p.epsilon, "feasibility");
    ledger.add("beta(eps,tau) + gamma(lambda_u) + Lambda(N,theta,M) <= eps",
               beta_eps + cert.gamma(p.lambda_u) + p.lambda_x(delta), "<=", p.epsilon, "feasibility");
    ledger.add("input covering radius <= lambda_u", Lattice(sys.input_box(), 2.0 * p.lambda_u).covering_radius(), "<=",
               p.lambda_u, "feasibility");
    return ledger;
}

}  // namespace tdsym
