#pragma once

#include <compare>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "tdsym/quantization.hpp"

namespace tdsym {

struct Transition {
    std::size_t from = 0;
    std::size_t label = 0;
    std::size_t to = 0;

    friend bool operator==(const Transition&, const Transition&) = default;
    friend auto operator<=>(const Transition&, const Transition&) = default;
};

/// Finite metric transition system whose states are spline lattice states.
/// The output of a state is the spline it denotes, so the output map is the
/// decoder of `resolution()`.
///
/// States and labels are addressed by index. `seal()` orders states by index
/// vector and transitions lexicographically; exported files are written from
/// the sealed form.
class TransitionSystem {
public:
    TransitionSystem() = default;
    TransitionSystem(Resolution resolution, std::vector<Vector> labels);

    const Resolution& resolution() const noexcept { return m_res; }
    const std::vector<Vector>& labels() const noexcept { return m_labels; }
    const std::vector<SymbolicState>& states() const noexcept { return m_states; }
    const SymbolicState& state(std::size_t i) const;
    const std::vector<Transition>& transitions() const noexcept { return m_transitions; }
    std::size_t initial() const noexcept { return m_initial; }

    std::size_t state_count() const noexcept { return m_states.size(); }
    std::size_t label_count() const noexcept { return m_labels.size(); }

    /// Index of `s`, inserting it if new.
    std::size_t add_state(const SymbolicState& s);
    std::optional<std::size_t> find(const SymbolicState& s) const;
    void set_initial(std::size_t state);
    void add_transition(std::size_t from, std::size_t label, std::size_t to);

    /// Sorts states and transitions and removes duplicate transitions.
    void seal();
    bool sealed() const noexcept { return m_sealed; }

    /// Targets of (state, label); requires a sealed system.
    std::vector<std::size_t> successors(std::size_t state, std::size_t label) const;
    /// Transitions leaving `state`, as a contiguous range of transitions().
    std::span<const Transition> outgoing(std::size_t state) const;

    /// Node values of the output spline of a state.
    std::vector<double> output(std::size_t state) const;

    std::map<std::string, std::string>& metadata() noexcept { return m_meta; }
    const std::map<std::string, std::string>& metadata() const noexcept { return m_meta; }

    friend bool operator==(const TransitionSystem& a, const TransitionSystem& b);

private:
    void check_state(std::size_t i) const;

    Resolution m_res;
    std::vector<Vector> m_labels;
    std::vector<SymbolicState> m_states;
    std::unordered_map<SymbolicState, std::size_t, SymbolicStateHash> m_index;
    std::vector<Transition> m_transitions;
    std::vector<std::size_t> m_offsets;  // per-state ranges into m_transitions once sealed
    std::size_t m_initial = 0;
    bool m_has_initial = false;
    bool m_sealed = false;
    std::map<std::string, std::string> m_meta;
};

/// Line-oriented interchange format (see docs/tsx-format.md).
void write_tsx(const TransitionSystem& ts, std::ostream& out);
TransitionSystem read_tsx(std::istream& in);
void export_tsx(const TransitionSystem& ts, const std::string& path);
TransitionSystem import_tsx(const std::string& path);

void write_dot(const TransitionSystem& ts, std::ostream& out);
void export_dot(const TransitionSystem& ts, const std::string& path);

/// Writes `text` to `path`, surfacing I/O failures as io-error.
void write_file(const std::string& path, const std::string& text);
std::string read_file(const std::string& path);

}  // namespace tdsym
