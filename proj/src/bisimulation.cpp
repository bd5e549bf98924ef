#include "tdsym/bisimulation.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <ostream>

#include "tdsym/error.hpp"
#include "tdsym/parallel.hpp"
#include "tdsym/text.hpp"

namespace tdsym {

namespace {

constexpr std::size_t none = std::numeric_limits<std::size_t>::max();

// Predecessor lists of a sealed system.
std::vector<std::vector<std::size_t>> predecessors(const TransitionSystem& t) {
    std::vector<std::vector<std::size_t>> pred(t.state_count());
    for (const auto& tr : t.transitions()) pred[tr.to].push_back(tr.from);
    for (auto& p : pred) p.erase(std::unique(p.begin(), p.end()), p.end());
    return pred;
}

}  // namespace

BisimulationResult check_bisimulation(const TransitionSystem& t1, const TransitionSystem& t2, double epsilon) {
    if (!t1.sealed() || !t2.sealed()) throw Error(ErrorCode::lookup_error, "transition systems must be sealed");
    const Resolution& r1 = t1.resolution();
    const Resolution& r2 = t2.resolution();
    if (r1.dim != r2.dim || r1.delta != r2.delta)
        throw Error(ErrorCode::metric_error, "outputs live in different function spaces");

    const std::size_t n1 = t1.state_count();
    const std::size_t n2 = t2.state_count();
    const double limit = epsilon + 1e-12 * (1.0 + std::abs(epsilon));
    std::vector<char> in(n1 * n2, 0);
    std::vector<double> dist(n1 * n2);
    std::vector<std::size_t> order(n1 * n2, none);  // deletion rank
    std::vector<DeletionStep> why(n1 * n2);
    auto at = [n2](std::size_t a, std::size_t b) { return a * n2 + b; };

    for (std::size_t a = 0; a < n1; ++a)
        for (std::size_t b = 0; b < n2; ++b) {
            const double d = output_distance(r1, t1.state(a), r2, t2.state(b));
            dist[at(a, b)] = d;
            if (d <= limit) in[at(a, b)] = 1;
            else why[at(a, b)] = {a, b, "output-distance", d, 0, 0};
        }

    // Transition of `from` in `x` is matched if some transition of `other`
    // ends in a pair still in the relation.
    auto unmatched = [&](std::size_t a, std::size_t b, bool first_side, DeletionStep& step) {
        const TransitionSystem& x = first_side ? t1 : t2;
        const TransitionSystem& y = first_side ? t2 : t1;
        const std::size_t from = first_side ? a : b;
        const std::size_t mate = first_side ? b : a;
        for (const auto& tx : x.outgoing(from)) {
            bool ok = false;
            for (const auto& ty : y.outgoing(mate)) {
                const std::size_t idx = first_side ? at(tx.to, ty.to) : at(ty.to, tx.to);
                if (in[idx]) {
                    ok = true;
                    break;
                }
            }
            if (!ok) {
                step = {a, b, first_side ? "unmatched-first" : "unmatched-second", dist[at(a, b)], tx.label, tx.to};
                return true;
            }
        }
        return false;
    };

    const auto pred1 = predecessors(t1);
    const auto pred2 = predecessors(t2);
    std::deque<std::size_t> work;
    std::vector<char> queued(n1 * n2, 0);
    for (std::size_t i = 0; i < n1 * n2; ++i)
        if (in[i]) {
            work.push_back(i);
            queued[i] = 1;
        }
    BisimulationResult res;
    res.epsilon = epsilon;
    while (!work.empty()) {
        const std::size_t idx = work.front();
        work.pop_front();
        queued[idx] = 0;
        if (!in[idx]) continue;
        const std::size_t a = idx / n2, b = idx % n2;
        DeletionStep step;
        if (!unmatched(a, b, true, step) && !unmatched(a, b, false, step)) continue;
        in[idx] = 0;
        why[idx] = step;
        order[idx] = res.deletions++;
        for (std::size_t pa : pred1[a])
            for (std::size_t pb : pred2[b]) {
                const std::size_t p = at(pa, pb);
                if (in[p] && !queued[p]) {
                    queued[p] = 1;
                    work.push_back(p);
                }
            }
    }

    for (std::size_t i = 0; i < n1 * n2; ++i)
        if (in[i]) res.relation.emplace_back(i / n2, i % n2);
    res.related = in[at(t1.initial(), t2.initial())] != 0;
    if (!res.related) {
        // Follow the unmatched transition to the successor pair that left
        // the relation first; output-distance pairs end the chain.
        std::size_t idx = at(t1.initial(), t2.initial());
        std::vector<char> seen(n1 * n2, 0);
        while (!seen[idx]) {
            seen[idx] = 1;
            const DeletionStep& s = why[idx];
            res.counterexample.push_back(s);
            if (s.reason == "output-distance") break;
            const bool first_side = s.reason == "unmatched-first";
            const TransitionSystem& y = first_side ? t2 : t1;
            const std::size_t mate = first_side ? s.second : s.first;
            std::size_t best = none;
            for (const auto& ty : y.outgoing(mate)) {
                const std::size_t cand = first_side ? at(s.target, ty.to) : at(ty.to, s.target);
                // Pairs never in the relation rank before every deletion.
                auto rank = [&](std::size_t c) { return order[c] == none ? 0 : order[c] + 1; };
                if (best == none || rank(cand) < rank(best) || (rank(cand) == rank(best) && cand < best)) best = cand;
            }
            if (best == none) break;  // the mate has no transitions at all
            idx = best;
        }
    }
    return res;
}

void write_relation(const BisimulationResult& r, const TransitionSystem& t1, const TransitionSystem& t2,
                    std::ostream& out) {
    out << "tdsym-relation 1\n";
    out << "epsilon " << format_number(r.epsilon) << '\n';
    out << "related " << (r.related ? "yes" : "no") << '\n';
    out << "pairs " << r.relation.size() << '\n';
    for (const auto& [a, b] : r.relation)
        out << "r " << canonical_id(t1.state(a)) << ' ' << canonical_id(t2.state(b)) << '\n';
    out << "end\n";
}

void write_counterexample(const BisimulationResult& r, const TransitionSystem& t1, const TransitionSystem& t2,
                          std::ostream& out) {
    out << "tdsym-counterexample 1\n";
    out << "epsilon " << format_number(r.epsilon) << '\n';
    out << "steps " << r.counterexample.size() << '\n';
    for (const auto& s : r.counterexample) {
        out << "c " << canonical_id(t1.state(s.first)) << ' ' << canonical_id(t2.state(s.second)) << ' ' << s.reason
            << " distance " << format_number(s.distance);
        if (s.reason != "output-distance") {
            const TransitionSystem& x = s.reason == "unmatched-first" ? t1 : t2;
            out << " label " << format_vector(x.labels()[s.label]) << " target " << canonical_id(x.state(s.target));
        }
        out << '\n';
    }
    out << "end\n";
}

nlohmann::json ValidationReport::to_json() const {
    nlohmann::json j = falsification.to_json();
    j["max_gap"] = max_gap;
    j["epsilon"] = epsilon;
    return j;
}

ValidationReport validate_against_continuous(const TimeDelaySystem& sys, const TransitionSystem& model,
                                             const AbstractionParams& params, const StateFunction& xi0,
                                             double epsilon, const ValidationPlan& plan) {
    if (!model.sealed()) throw Error(ErrorCode::lookup_error, "transition system must be sealed");
    if (model.label_count() == 0) throw Error(ErrorCode::lookup_error, "model has no labels");
    const Resolution& res = model.resolution();
    const SplineQuantizer quantizer(sys.state_box(), sys.delta(), res.interior_nodes, res.theta);
    if (!(quantizer.resolution() == res)) throw Error(ErrorCode::metric_error, "model does not match the system");

    struct Slot {
        double gap = 0.0;
        std::vector<Violation> violations;
        std::size_t evals = 0;
    };
    std::vector<Slot> slots(plan.words);
    parallel_for(plan.words, plan.threads, [&](std::size_t w) {
        auto rng = item_rng(plan.seed, w);
        Slot& slot = slots[w];
        StateFunction x = xi0;
        std::size_t q = model.initial();
        auto observe = [&](std::size_t k) {
            const double gap = quantizer.sup_gap(x, model.state(q), plan.refine);
            ++slot.evals;
            slot.gap = std::max(slot.gap, gap);
            if (gap > epsilon && slot.violations.empty())
                slot.violations.push_back({w, static_cast<double>(k) * params.tau, gap, epsilon, "matched-run-gap"});
        };
        observe(0);
        for (std::size_t k = 1; k <= plan.length; ++k) {
            const std::size_t l =
                std::uniform_int_distribution<std::size_t>(0, model.label_count() - 1)(rng);
            const auto next = model.successors(q, l);
            if (next.empty())
                throw Error(ErrorCode::lookup_error, "word " + std::to_string(w) + ": state " +
                                                         canonical_id(model.state(q)) + " has no successor");
            q = next.front();
            try {
                x = integrate_step(sys, x, model.labels()[l], params.tau, params.substeps).end;
            } catch (const Error& e) {
                throw Error(e.code(), "word " + std::to_string(w) + ", step " + std::to_string(k) + ": " + e.detail());
            }
            observe(k);
        }
    });

    ValidationReport rep;
    rep.epsilon = epsilon;
    rep.falsification.check = "matched-run-gap";
    rep.falsification.probes = plan.words;
    for (const auto& s : slots) {
        rep.max_gap = std::max(rep.max_gap, s.gap);
        rep.falsification.evaluations += s.evals;
        rep.falsification.violations.insert(rep.falsification.violations.end(), s.violations.begin(),
                                            s.violations.end());
    }
    rep.falsification.worst_margin = rep.max_gap - epsilon;
    return rep;
}

}  // namespace tdsym
