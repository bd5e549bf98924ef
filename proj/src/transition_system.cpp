#include "tdsym/transition_system.hpp"

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include "tdsym/error.hpp"
#include "tdsym/text.hpp"

namespace tdsym {

TransitionSystem::TransitionSystem(Resolution resolution, std::vector<Vector> labels)
    : m_res(resolution), m_labels(std::move(labels)) {
    if (m_res.dim == 0 || !(m_res.delta > 0.0) || !(m_res.theta > 0.0))
        throw Error(ErrorCode::shape_error, "invalid resolution");
    for (const auto& l : m_labels)
        if (m_labels.front().size() != l.size()) throw Error(ErrorCode::shape_error, "labels differ in dimension");
}

void TransitionSystem::check_state(std::size_t i) const {
    if (i >= m_states.size())
        throw Error(ErrorCode::lookup_error, "unknown state index " + std::to_string(i));
}

const SymbolicState& TransitionSystem::state(std::size_t i) const {
    check_state(i);
    return m_states[i];
}

std::size_t TransitionSystem::add_state(const SymbolicState& s) {
    if (s.indices.size() != m_res.dim * m_res.nodes())
        throw Error(ErrorCode::basis_error, "state has " + std::to_string(s.indices.size()) + " indices, expected " +
                                                std::to_string(m_res.dim * m_res.nodes()));
    auto [it, inserted] = m_index.try_emplace(s, m_states.size());
    if (inserted) {
        m_states.push_back(s);
        m_sealed = false;
    }
    return it->second;
}

std::optional<std::size_t> TransitionSystem::find(const SymbolicState& s) const {
    auto it = m_index.find(s);
    if (it == m_index.end()) return std::nullopt;
    return it->second;
}

void TransitionSystem::set_initial(std::size_t state) {
    check_state(state);
    m_initial = state;
    m_has_initial = true;
}

void TransitionSystem::add_transition(std::size_t from, std::size_t label, std::size_t to) {
    check_state(from);
    check_state(to);
    if (label >= m_labels.size())
        throw Error(ErrorCode::lookup_error, "unknown label index " + std::to_string(label));
    m_transitions.push_back({from, label, to});
    m_sealed = false;
}

void TransitionSystem::seal() {
    if (!m_has_initial) throw Error(ErrorCode::lookup_error, "transition system has no initial state");
    std::vector<std::size_t> order(m_states.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return m_states[a] < m_states[b]; });
    std::vector<std::size_t> rank(m_states.size());
    std::vector<SymbolicState> sorted;
    sorted.reserve(m_states.size());
    for (std::size_t r = 0; r < order.size(); ++r) {
        rank[order[r]] = r;
        sorted.push_back(std::move(m_states[order[r]]));
    }
    m_states = std::move(sorted);
    m_index.clear();
    for (std::size_t i = 0; i < m_states.size(); ++i) m_index.emplace(m_states[i], i);
    for (auto& t : m_transitions) t = {rank[t.from], t.label, rank[t.to]};
    m_initial = rank[m_initial];
    std::sort(m_transitions.begin(), m_transitions.end());
    m_transitions.erase(std::unique(m_transitions.begin(), m_transitions.end()), m_transitions.end());
    m_offsets.assign(m_states.size() + 1, 0);
    for (const auto& t : m_transitions) ++m_offsets[t.from + 1];
    std::partial_sum(m_offsets.begin(), m_offsets.end(), m_offsets.begin());
    m_sealed = true;
}

std::span<const Transition> TransitionSystem::outgoing(std::size_t state) const {
    check_state(state);
    if (!m_sealed) throw Error(ErrorCode::lookup_error, "transition system is not sealed");
    return std::span<const Transition>(m_transitions).subspan(m_offsets[state], m_offsets[state + 1] - m_offsets[state]);
}

std::vector<std::size_t> TransitionSystem::successors(std::size_t state, std::size_t label) const {
    if (label >= m_labels.size())
        throw Error(ErrorCode::lookup_error, "unknown label index " + std::to_string(label));
    std::vector<std::size_t> out;
    for (const auto& t : outgoing(state))
        if (t.label == label) out.push_back(t.to);
    return out;
}

std::vector<double> TransitionSystem::output(std::size_t state) const {
    const SymbolicState& s = this->state(state);
    const std::size_t nodes = m_res.nodes();
    std::vector<double> v(nodes * m_res.dim);
    for (std::size_t axis = 0; axis < m_res.dim; ++axis)
        for (std::size_t i = 0; i < nodes; ++i)
            v[i * m_res.dim + axis] = static_cast<double>(s.indices[axis * nodes + i]) * m_res.spacing();
    return v;
}

bool operator==(const TransitionSystem& a, const TransitionSystem& b) {
    return a.m_res == b.m_res && a.m_labels == b.m_labels && a.m_states == b.m_states &&
           a.m_transitions == b.m_transitions && a.m_initial == b.m_initial && a.m_meta == b.m_meta;
}

void write_tsx(const TransitionSystem& ts, std::ostream& out) {
    if (!ts.sealed()) throw Error(ErrorCode::lookup_error, "transition system is not sealed");
    const Resolution& r = ts.resolution();
    out << "tdsym-tsx 1\n";
    for (const auto& [k, v] : ts.metadata()) {
        if (k.empty() || v.empty() || k.find_first_of(" \t\n") != std::string::npos || v.find('\n') != std::string::npos ||
            v.front() == ' ' || v.back() == ' ')
            throw Error(ErrorCode::shape_error, "metadata entry '" + k + "' cannot be written on one line");
        out << "meta " << k << ' ' << v << '\n';
    }
    out << "dim " << r.dim << '\n';
    out << "delta " << format_number(r.delta) << '\n';
    out << "nodes " << r.nodes() << '\n';
    out << "theta " << format_number(r.theta) << '\n';
    out << "labels " << ts.label_count() << '\n';
    for (std::size_t i = 0; i < ts.label_count(); ++i) out << "l " << i << ' ' << format_vector(ts.labels()[i]) << '\n';
    out << "states " << ts.state_count() << '\n';
    for (std::size_t i = 0; i < ts.state_count(); ++i) out << "s " << i << ' ' << canonical_id(ts.states()[i]) << '\n';
    out << "initial " << ts.initial() << '\n';
    out << "transitions " << ts.transitions().size() << '\n';
    for (const auto& t : ts.transitions()) out << "t " << t.from << ' ' << t.label << ' ' << t.to << '\n';
    out << "end\n";
}

namespace {

class LineReader {
public:
    explicit LineReader(std::istream& in) : m_in(in) {}

    std::vector<std::string_view> next() {
        while (std::getline(m_in, m_line)) {
            ++m_number;
            auto f = split_fields(m_line);
            if (!f.empty() && f[0][0] != '#') return f;
        }
        fail("unexpected end of file");
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw Error(ErrorCode::parse_error, "line " + std::to_string(m_number) + ": " + msg);
    }

    std::vector<std::string_view> expect(std::string_view key, std::size_t fields) {
        auto f = next();
        if (f[0] != key || f.size() != fields) fail("expected '" + std::string(key) + "' with " +
                                                     std::to_string(fields - 1) + " field(s)");
        return f;
    }

    std::size_t count(std::string_view s) const {
        try {
            const auto v = parse_integer(s);
            if (v < 0) fail("negative count");
            return static_cast<std::size_t>(v);
        } catch (const Error& e) {
            fail(e.detail());
        }
    }

    double number(std::string_view s) const {
        try {
            return parse_number(s);
        } catch (const Error& e) {
            fail(e.detail());
        }
    }

    const std::string& line() const noexcept { return m_line; }

private:
    std::istream& m_in;
    std::string m_line;
    std::size_t m_number = 0;
};

}  // namespace

TransitionSystem read_tsx(std::istream& in) {
    LineReader r(in);
    auto f = r.next();
    if (f.size() != 2 || f[0] != "tdsym-tsx") r.fail("missing 'tdsym-tsx' header");
    if (f[1] != "1") r.fail("unsupported version " + std::string(f[1]));

    std::map<std::string, std::string> meta;
    f = r.next();
    while (f[0] == "meta") {
        if (f.size() < 3) r.fail("meta needs a key and a value");
        const std::string& line = r.line();
        const auto value_pos = static_cast<std::size_t>(f[2].data() - line.data());
        std::string value = line.substr(value_pos);
        while (!value.empty() && (value.back() == ' ' || value.back() == '\r')) value.pop_back();
        meta[std::string(f[1])] = std::move(value);
        f = r.next();
    }
    if (f[0] != "dim" || f.size() != 2) r.fail("expected 'dim'");
    Resolution res;
    res.dim = r.count(f[1]);
    res.delta = r.number(r.expect("delta", 2)[1]);
    const std::size_t nodes = r.count(r.expect("nodes", 2)[1]);
    if (nodes < 2) r.fail("need at least 2 nodes");
    res.interior_nodes = nodes - 2;
    res.theta = r.number(r.expect("theta", 2)[1]);

    const std::size_t nl = r.count(r.expect("labels", 2)[1]);
    std::vector<Vector> labels;
    for (std::size_t i = 0; i < nl; ++i) {
        f = r.expect("l", 3);
        if (r.count(f[1]) != i) r.fail("labels out of order");
        try {
            labels.push_back(parse_vector(f[2]));
        } catch (const Error& e) {
            r.fail(e.detail());
        }
    }
    TransitionSystem ts(res, std::move(labels));
    const std::size_t ns = r.count(r.expect("states", 2)[1]);
    for (std::size_t i = 0; i < ns; ++i) {
        f = r.expect("s", 3);
        if (r.count(f[1]) != i) r.fail("states out of order");
        try {
            if (ts.add_state(parse_canonical_id(f[2])) != i) r.fail("duplicate state");
        } catch (const Error& e) {
            if (e.code() == ErrorCode::parse_error) throw;
            r.fail(e.detail());
        }
    }
    const std::size_t init = r.count(r.expect("initial", 2)[1]);
    if (init >= ns) r.fail("initial state out of range");
    ts.set_initial(init);
    const std::size_t nt = r.count(r.expect("transitions", 2)[1]);
    for (std::size_t i = 0; i < nt; ++i) {
        f = r.expect("t", 4);
        try {
            ts.add_transition(r.count(f[1]), r.count(f[2]), r.count(f[3]));
        } catch (const Error& e) {
            if (e.code() == ErrorCode::parse_error) throw;
            r.fail(e.detail());
        }
    }
    r.expect("end", 1);
    ts.metadata() = std::move(meta);
    ts.seal();
    if (ts.transitions().size() != nt) throw Error(ErrorCode::parse_error, "duplicate transitions");
    return ts;
}

void write_dot(const TransitionSystem& ts, std::ostream& out) {
    if (!ts.sealed()) throw Error(ErrorCode::lookup_error, "transition system is not sealed");
    out << "digraph tdsym {\n";
    for (std::size_t i = 0; i < ts.state_count(); ++i) {
        out << "  \"" << canonical_id(ts.states()[i]) << '"';
        if (i == ts.initial()) out << " [shape=doublecircle]";
        out << ";\n";
    }
    for (const auto& t : ts.transitions()) {
        out << "  \"" << canonical_id(ts.states()[t.from]) << "\" -> \"" << canonical_id(ts.states()[t.to])
            << "\" [label=\"" << format_vector(ts.labels()[t.label]) << "\"];\n";
    }
    out << "}\n";
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::io_error, path + ": " + std::strerror(errno));
    out << text;
    out.close();
    if (!out) throw Error(ErrorCode::io_error, path + ": write failed");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io_error, path + ": " + std::strerror(errno));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void export_tsx(const TransitionSystem& ts, const std::string& path) {
    std::ostringstream ss;
    write_tsx(ts, ss);
    write_file(path, ss.str());
}

TransitionSystem import_tsx(const std::string& path) {
    std::istringstream in(read_file(path));
    return read_tsx(in);
}

void export_dot(const TransitionSystem& ts, const std::string& path) {
    std::ostringstream ss;
    write_dot(ts, ss);
    write_file(path, ss.str());
}

}  // namespace tdsym
