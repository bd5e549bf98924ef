#include "tdsym/abstraction.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <vector>

#include "tdsym/error.hpp"
#include "tdsym/parallel.hpp"
#include "tdsym/text.hpp"

namespace tdsym {

nlohmann::json BuildReport::to_json() const {
    return {{"states", states},
            {"transitions", transitions},
            {"labels", labels},
            {"iterations", iterations},
            {"lambda_x", lambda_x},
            {"max_residual", max_residual},
            {"declared_M", declared_M},
            {"observed_M", observed_M},
            {"reported_M", std::max(declared_M, observed_M)},
            {"clamped_nodes", clamped_nodes},
            {"state_count_bound", state_count_bound.str()}};
}

BigCount state_count_bound(const Box& state_box, std::size_t interior_nodes, double theta) {
    return boost::multiprecision::pow(Lattice(state_box, 2.0 * theta).size(),
                                      static_cast<unsigned>(interior_nodes + 2));
}

namespace {

struct Step {
    SymbolicState target;
    double residual = 0.0;
    double curvature = 0.0;
    std::size_t clamped = 0;
};

Step simulate(const TimeDelaySystem& sys, const SplineQuantizer& quantizer, const AbstractionParams& params,
              const StateFunction& start, std::span<const double> label) {
    const StepResult r = integrate_step(sys, start, label, params.tau, params.substeps);
    SplineQuantizer::Quantized q = quantizer.quantize(r.end);

    const DenseTrajectory& traj = r.trajectory;
    const std::size_t n = traj.dim;
    const std::size_t last = traj.points() - 1;
    const std::size_t lag = (start.count() - 1) * params.substeps;
    const std::size_t first = last - lag;
    const auto nodes = quantizer.node_values(q.state);
    Vector spline(n);
    Step s;
    s.clamped = q.clamped_nodes;
    for (std::size_t k = first; k <= last; ++k) {
        const double t = k == last ? 0.0 : -sys.delta() + static_cast<double>(k - first) * traj.step;
        quantizer.basis().combine(nodes, n, t, spline);
        s.residual = std::max(s.residual, inf_distance(traj.at(k), spline));
        if (k > first && k < last) {
            const auto a = traj.at(k - 1), b = traj.at(k), c = traj.at(k + 1);
            for (std::size_t i = 0; i < n; ++i)
                s.curvature = std::max(s.curvature, std::abs(a[i] - 2.0 * b[i] + c[i]) / (traj.step * traj.step));
        }
    }
    s.target = std::move(q.state);
    return s;
}

}  // namespace

BuildResult build_abstraction(const TimeDelaySystem& sys, const AbstractionParams& params, const StateFunction& xi0,
                              const BuildOptions& options) {
    const auto t0 = std::chrono::steady_clock::now();
    if (!(params.tau > 2.0 * sys.delta()))
        throw Error(ErrorCode::infeasible, "sampling time must exceed twice the delay");
    if (xi0.count() != params.samples())
        throw Error(ErrorCode::shape_error, "initial history is not sampled on the build grid");
    check_input_delay(sys, params.tau);
    steps_in(params.tau, params.grid_step(sys.delta()));

    const SplineQuantizer quantizer(sys.state_box(), sys.delta(), params.interior_nodes, params.theta);
    std::vector<Vector> labels = input_labels(sys.input_box(), params.lambda_u);
    if (labels.empty()) throw Error(ErrorCode::infeasible, "input lattice is empty");
    const double lambda = params.lambda_x(sys.delta());

    BuildResult out{TransitionSystem(quantizer.resolution(), labels), {}};
    TransitionSystem& ts = out.system;
    BuildReport& rep = out.report;
    rep.labels = labels.size();
    rep.lambda_x = lambda;
    rep.declared_M = params.M;
    rep.state_count_bound = state_count_bound(sys.state_box(), params.interior_nodes, params.theta);

    const SplineQuantizer::Quantized q0 = quantizer.quantize(xi0);
    rep.clamped_nodes += q0.clamped_nodes;
    ts.set_initial(ts.add_state(q0.state));

    std::vector<std::size_t> frontier{ts.initial()};
    const std::size_t per_interval = params.refinement;
    while (!frontier.empty()) {
        ++rep.iterations;
        std::sort(frontier.begin(), frontier.end(),
                  [&](std::size_t a, std::size_t b) { return ts.state(a) < ts.state(b); });
        const std::size_t nl = labels.size();
        std::vector<Step> steps(frontier.size() * nl);
        parallel_for(steps.size(), options.threads, [&](std::size_t item) {
            const SymbolicState& q = ts.state(frontier[item / nl]);
            const auto& label = labels[item % nl];
            try {
                steps[item] = simulate(sys, quantizer, params, quantizer.decode(q, per_interval), label);
            } catch (const Error& e) {
                throw Error(e.code(),
                            "from state " + canonical_id(q) + " under label " + format_vector(label) + ": " + e.detail());
            }
        });

        std::vector<std::size_t> next;
        for (std::size_t item = 0; item < steps.size(); ++item) {
            Step& s = steps[item];
            const std::size_t from = frontier[item / nl];
            if (!holds(s.residual, "<=", lambda)) {
                throw Error(ErrorCode::bound_violation,
                            "quantization residual " + format_number(s.residual) + " exceeds Lambda = " +
                                format_number(lambda) + " from state " + canonical_id(ts.state(from)) +
                                " under label " + format_vector(labels[item % nl]) + "; M is underestimated");
            }
            rep.max_residual = std::max(rep.max_residual, s.residual);
            rep.observed_M = std::max(rep.observed_M, s.curvature);
            rep.clamped_nodes += s.clamped;
            const std::size_t before = ts.state_count();
            const std::size_t to = ts.add_state(s.target);
            if (ts.state_count() > before) next.push_back(to);
            ts.add_transition(from, item % nl, to);
        }
        frontier = std::move(next);
    }

    ts.seal();
    rep.states = ts.state_count();
    rep.transitions = ts.transitions().size();
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

}  // namespace tdsym
