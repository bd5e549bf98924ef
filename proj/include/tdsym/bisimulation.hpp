#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "tdsym/certificates.hpp"
#include "tdsym/parameters.hpp"
#include "tdsym/transition_system.hpp"

namespace tdsym {

/// Why a pair left the candidate relation.
struct DeletionStep {
    std::size_t first = 0;   // state of T1
    std::size_t second = 0;  // state of T2
    std::string reason;      // "output-distance", "unmatched-first" or "unmatched-second"
    double distance = 0.0;   // output distance of the pair
    std::size_t label = 0;   // unmatched transition, for the unmatched reasons
    std::size_t target = 0;
};

struct BisimulationResult {
    bool related = false;
    double epsilon = 0.0;
    std::vector<std::pair<std::size_t, std::size_t>> relation;  // sorted
    std::vector<DeletionStep> counterexample;                   // from the initial pair
    std::size_t deletions = 0;
};

/// Greatest epsilon-approximate bisimulation between two finite systems.
/// Output distances are compared with a relative slack of 1e-12.
BisimulationResult check_bisimulation(const TransitionSystem& t1, const TransitionSystem& t2, double epsilon);

void write_relation(const BisimulationResult& r, const TransitionSystem& t1, const TransitionSystem& t2,
                    std::ostream& out);
void write_counterexample(const BisimulationResult& r, const TransitionSystem& t1, const TransitionSystem& t2,
                          std::ostream& out);

struct ValidationPlan {
    std::size_t words = 100;
    std::size_t length = 10;
    std::uint64_t seed = 0;
    std::size_t refine = 4;  // evaluation points per sample interval for the gap
    std::size_t threads = 1;
};

struct ValidationReport {
    FalsificationReport falsification;
    double max_gap = 0.0;
    double epsilon = 0.0;

    bool passed() const noexcept { return falsification.passed(); }
    nlohmann::json to_json() const;
};

/// Follows random label words in the continuous system from xi0 and in
/// `model` from its initial state, and checks the sup gap at every step.
ValidationReport validate_against_continuous(const TimeDelaySystem& sys, const TransitionSystem& model,
                                             const AbstractionParams& params, const StateFunction& xi0,
                                             double epsilon, const ValidationPlan& plan);

}  // namespace tdsym
