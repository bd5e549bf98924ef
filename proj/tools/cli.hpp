#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "tdsym/abstraction.hpp"
#include "tdsym/config.hpp"
#include "tdsym/parameters.hpp"

namespace tdsym::cli {

enum ExitCode : int {
    exit_ok = 0,
    exit_other = 1,
    exit_infeasible = 2,
    exit_assumption = 3,
    exit_violation = 4,
};

struct Options {
    std::string config;
    std::string out;
    std::string model;    // validate: the artifact; compare: first system
    std::string model_b;  // compare: second system
    std::optional<std::uint64_t> seed;
    std::optional<double> epsilon;
    std::size_t threads = 1;
    bool force = false;
};

/// A configuration resolved into concrete bounds, parameters and ledger.
struct Prepared {
    PipelineConfig config;
    SystemBounds bounds;
    AbstractionParams params;
    Ledger ledger;
    std::optional<FalsificationReport> delta_iss;

    const TimeDelaySystem& system() const { return *config.system; }
    StateFunction initial_history() const;
    nlohmann::json summary() const;
};

/// Loads the config, solves or takes the parameters and evaluates the
/// ledger; `run_probes` adds the sampled stability check.
Prepared prepare(const Options& opt, bool run_probes);

/// Exit code implied by the ledger: mandatory failures always stop, other
/// failures stop unless forced.
int ledger_exit_code(const Ledger& ledger, bool force);

int cmd_params(const Options& opt, std::ostream& out, std::ostream& err);
int cmd_abstract(const Options& opt, std::ostream& out, std::ostream& err);
int cmd_validate(const Options& opt, std::ostream& out, std::ostream& err);
int cmd_compare(const Options& opt, std::ostream& out, std::ostream& err);

/// Parses the command line and dispatches.
int run(int argc, char** argv);

}  // namespace tdsym::cli
