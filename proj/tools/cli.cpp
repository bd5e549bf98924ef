#include "cli.hpp"

#include <filesystem>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "tdsym/bisimulation.hpp"
#include "tdsym/error.hpp"
#include "tdsym/quantization.hpp"
#include "tdsym/text.hpp"
#include "tdsym/transition_system.hpp"

namespace tdsym::cli {

namespace {

int exit_code_for(const Error& e) {
    switch (e.code()) {
    case ErrorCode::infeasible:
    case ErrorCode::insufficient_contraction:
    case ErrorCode::no_decay_rate: return exit_infeasible;
    default: return exit_other;
    }
}

template <class F>
int guarded(std::ostream& err, F&& f) {
    try {
        return f();
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_other;
    }
}

std::string out_path(const Options& opt, const std::string& name) {
    if (opt.out.empty()) throw Error(ErrorCode::io_error, "--out is required");
    std::error_code ec;
    std::filesystem::create_directories(opt.out, ec);
    if (ec) throw Error(ErrorCode::io_error, opt.out + ": " + ec.message());
    return (std::filesystem::path(opt.out) / name).string();
}

void write_json(const std::string& path, const nlohmann::json& j) { write_file(path, j.dump(2) + "\n"); }

nlohmann::json bounds_json(const SystemBounds& b) {
    return {{"B_X", b.B_X}, {"B_X0", b.B_X0}, {"B_U", b.B_U}, {"B_J", b.B_J},
            {"kappa", b.kappa}, {"M", b.M}, {"M_declared", b.M_declared}};
}

void print_params(const Prepared& p, std::ostream& out) {
    const AbstractionParams& a = p.params;
    const double delta = p.system().delta();
    out << "tau        " << format_number(a.tau) << '\n'
        << "N          " << a.interior_nodes << '\n'
        << "theta      " << format_number(a.theta) << '\n'
        << "lambda_u   " << format_number(a.lambda_u) << '\n'
        << "lambda_x   " << format_number(a.lambda_x(delta)) << '\n'
        << "epsilon    " << format_number(a.epsilon) << '\n'
        << "M          " << format_number(a.M) << '\n'
        << "grid step  " << format_number(a.grid_step(delta)) << '\n'
        << "labels     " << input_labels(p.system().input_box(), a.lambda_u).size() << '\n';
    out << p.ledger.to_text();
}

std::map<std::string, std::string> model_metadata(const Prepared& p) {
    const AbstractionParams& a = p.params;
    return {{"config_hash", p.config.model_hash()},
            {"epsilon", format_number(a.epsilon)},
            {"tau", format_number(a.tau)},
            {"lambda_u", format_number(a.lambda_u)},
            {"M", format_number(a.M)},
            {"refinement", std::to_string(a.refinement)},
            {"substeps", std::to_string(a.substeps)},
            {"rhs", p.system().rhs().name()}};
}

}  // namespace

StateFunction Prepared::initial_history() const {
    return config.initial.sample(system().delta(), params.samples(), system().state_dim());
}

nlohmann::json Prepared::summary() const {
    nlohmann::json j;
    j["config_hash"] = config.model_hash();
    j["params"] = params.to_json();
    j["params"]["lambda_x"] = params.lambda_x(system().delta());
    j["bounds"] = bounds_json(bounds);
    j["ledger"] = ledger.to_json();
    if (delta_iss) j["delta_iss"] = delta_iss->to_json();
    return j;
}

Prepared prepare(const Options& opt, bool run_probes) {
    Prepared p{load_config(opt.config, {opt.epsilon, opt.seed}), {}, {}, {}, std::nullopt};
    const PipelineConfig& c = p.config;
    const TimeDelaySystem& sys = *c.system;
    const DeltaIssCertificate& cert = *c.certificate;

    AssumptionInputs extra;
    extra.kappa_estimate = estimate_lipschitz(sys, c.probes.estimate_samples, c.probes.seed);
    extra.BJ_estimate = estimate_BJ(sys, c.probes.estimate_samples, c.probes.seed);
    const double bj = c.B_J ? *c.B_J : *extra.BJ_estimate;
    if (!c.B_J) extra.BJ_estimate.reset();  // the estimate is the value in use
    p.bounds = make_bounds(sys, cert, c.B_X0, bj > 0.0 ? bj : 1e-300, c.M);

    if (c.explicit_params) {
        p.params = *c.explicit_params;
        p.params.M = p.bounds.M;
    } else {
        p.params = solve_parameters(sys, p.bounds, cert, c.epsilon, c.solver);
    }

    if (run_probes && p.params.tau > 2.0 * sys.delta()) {
        ProbePlan plan;
        plan.count = c.probes.count;
        plan.horizon_steps = c.probes.horizon_steps;
        plan.tau = p.params.tau;
        plan.history_samples = p.params.samples();
        plan.substeps = p.params.substeps;
        plan.seed = c.probes.seed;
        plan.kink_probes = c.probes.kink;
        plan.labels = input_labels(sys.input_box(), p.params.lambda_u);
        plan.threads = opt.threads;
        p.delta_iss = check_delta_iss(sys, cert, plan);
        extra.delta_iss = &*p.delta_iss;
    }
    p.ledger = check_assumptions(sys, p.bounds, cert, c.initial, p.params, extra);
    return p;
}

int ledger_exit_code(const Ledger& ledger, bool force) {
    if (!ledger.mandatory_passed()) return exit_assumption;
    if (force) return exit_ok;
    if (!ledger.passed("feasibility")) return exit_infeasible;
    if (!ledger.passed()) return exit_assumption;
    return exit_ok;
}

int cmd_params(const Options& opt, std::ostream& out, std::ostream& err) {
    return guarded(err, [&]() -> int {
        const Prepared p = prepare(opt, true);
        print_params(p, out);
        if (!opt.out.empty()) write_json(out_path(opt, "params.json"), p.summary());
        return ledger_exit_code(p.ledger, opt.force);
    });
}

int cmd_abstract(const Options& opt, std::ostream& out, std::ostream& err) {
    return guarded(err, [&]() -> int {
        const Prepared p = prepare(opt, true);
        print_params(p, out);
        if (const int code = ledger_exit_code(p.ledger, opt.force); code != exit_ok) {
            err << "refusing to build: ledger has failures (use --force to override non-mandatory checks)\n";
            return code;
        }
        BuildResult r = build_abstraction(p.system(), p.params, p.initial_history(), {opt.threads});
        r.system.metadata() = model_metadata(p);
        export_tsx(r.system, out_path(opt, "model.tsx"));
        export_dot(r.system, out_path(opt, "model.dot"));
        nlohmann::json report = p.summary();
        report["build"] = r.report.to_json();
        write_json(out_path(opt, "build_report.json"), report);
        out << "states     " << r.report.states << '\n'
            << "transitions " << r.report.transitions << '\n'
            << "iterations " << r.report.iterations << '\n'
            << "residual   " << format_number(r.report.max_residual) << " (Lambda " << format_number(r.report.lambda_x)
            << ")\n"
            << "bound |Q|  " << r.report.state_count_bound.str() << '\n'
            << "wall time  " << r.report.wall_seconds << " s\n";
        return exit_ok;
    });
}

int cmd_validate(const Options& opt, std::ostream& out, std::ostream& err) {
    return guarded(err, [&]() -> int {
        if (opt.model.empty()) throw Error(ErrorCode::io_error, "--model is required");
        const Prepared p = prepare(opt, false);
        const TransitionSystem model = import_tsx(opt.model);
        const auto it = model.metadata().find("config_hash");
        if (it == model.metadata().end() || it->second != p.config.model_hash())
            throw Error(ErrorCode::stale_artifact, opt.model + " was not built from this configuration");
        if (const int code = ledger_exit_code(p.ledger, opt.force); code != exit_ok) {
            out << p.ledger.to_text();
            err << "refusing to validate: ledger has failures (use --force to override non-mandatory checks)\n";
            return code;
        }
        ValidationPlan plan = p.config.validation;
        plan.threads = opt.threads;
        const ValidationReport rep =
            validate_against_continuous(p.system(), model, p.params, p.initial_history(), p.params.epsilon, plan);
        nlohmann::json j = rep.to_json();
        j["config_hash"] = p.config.model_hash();
        j["words"] = plan.words;
        j["length"] = plan.length;
        j["seed"] = plan.seed;
        if (!opt.out.empty()) write_json(out_path(opt, "validation_report.json"), j);
        out << "words      " << plan.words << " x " << plan.length << '\n'
            << "max gap    " << format_number(rep.max_gap) << " (epsilon " << format_number(rep.epsilon) << ")\n"
            << "violations " << rep.falsification.violations.size() << '\n';
        return rep.passed() ? exit_ok : exit_violation;
    });
}

int cmd_compare(const Options& opt, std::ostream& out, std::ostream& err) {
    return guarded(err, [&]() -> int {
        if (opt.model.empty() || opt.model_b.empty()) throw Error(ErrorCode::io_error, "two .tsx files are required");
        if (!opt.epsilon) throw Error(ErrorCode::parse_error, "--epsilon is required");
        const TransitionSystem a = import_tsx(opt.model);
        const TransitionSystem b = import_tsx(opt.model_b);
        const BisimulationResult r = check_bisimulation(a, b, *opt.epsilon);
        std::ostringstream text;
        if (r.related) write_relation(r, a, b, text);
        else write_counterexample(r, a, b, text);
        if (!opt.out.empty()) write_file(out_path(opt, r.related ? "relation.txt" : "counterexample.txt"), text.str());
        out << (r.related ? "related" : "not related") << " at epsilon " << format_number(*opt.epsilon) << " ("
            << r.relation.size() << " pairs, " << r.deletions << " deletions)\n";
        if (!r.related) out << text.str();
        return r.related ? exit_ok : exit_violation;
    });
}

int run(int argc, char** argv) {
    CLI::App app{"Symbolic models of time-delay systems"};
    app.require_subcommand(1);
    Options opt;
    std::uint64_t seed = 0;
    double epsilon = 0.0;

    auto common = [&](CLI::App* sub, bool config) {
        if (config) sub->add_option("--config", opt.config, "pipeline configuration (JSON)")->required();
        sub->add_option("--seed", seed, "seed for every sampled procedure");
        sub->add_option("--threads", opt.threads, "worker threads (0 = all cores)");
        sub->add_option("--epsilon", epsilon, "target precision");
        sub->add_flag("--force", opt.force, "proceed past non-mandatory check failures");
    };
    CLI::App* params = app.add_subcommand("params", "solve parameters and print the ledger");
    common(params, true);
    params->add_option("--out", opt.out, "directory for params.json");
    CLI::App* abstract = app.add_subcommand("abstract", "build the symbolic model");
    common(abstract, true);
    abstract->add_option("--out", opt.out, "output directory")->required();
    CLI::App* validate = app.add_subcommand("validate", "compare model runs with the continuous system");
    common(validate, true);
    validate->add_option("--model", opt.model, "model .tsx file")->required();
    validate->add_option("--out", opt.out, "directory for validation_report.json");
    CLI::App* compare = app.add_subcommand("compare", "check approximate bisimilarity of two models");
    common(compare, false);
    compare->add_option("first", opt.model, "first .tsx file")->required();
    compare->add_option("second", opt.model_b, "second .tsx file")->required();
    compare->add_option("--out", opt.out, "directory for relation.txt or counterexample.txt");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? exit_ok : exit_other;
    }
    for (CLI::App* sub : {params, abstract, validate, compare}) {
        if (sub->count("--seed") > 0) opt.seed = seed;
        if (sub->count("--epsilon") > 0) opt.epsilon = epsilon;
    }
    if (*params) return cmd_params(opt, std::cout, std::cerr);
    if (*abstract) return cmd_abstract(opt, std::cout, std::cerr);
    if (*validate) return cmd_validate(opt, std::cout, std::cerr);
    return cmd_compare(opt, std::cout, std::cerr);
}

}  // namespace tdsym::cli
