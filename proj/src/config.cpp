#include "tdsym/config.hpp"

#include <cmath>
#include <initializer_list>

#include "tdsym/error.hpp"
#include "tdsym/transition_system.hpp"

namespace tdsym {

namespace {

using nlohmann::json;

// A JSON value together with its path, for diagnostics.
class Node {
public:
    Node(const json& j, std::string path) : m_j(j), m_path(std::move(path)) {}

    [[noreturn]] void fail(const std::string& msg) const {
        throw Error(ErrorCode::parse_error, (m_path.empty() ? std::string("config") : m_path) + ": " + msg);
    }

    const json& raw() const noexcept { return m_j; }
    const std::string& path() const noexcept { return m_path; }

    bool has(const char* key) const { return m_j.is_object() && m_j.contains(key); }

    Node operator[](const char* key) const {
        if (!m_j.is_object()) fail("expected an object");
        if (!m_j.contains(key)) Node(m_j, join(key)).fail("missing field");
        return Node(m_j.at(key), join(key));
    }

    Node operator[](std::size_t i) const { return Node(m_j.at(i), m_path + "[" + std::to_string(i) + "]"); }

    void allow(std::initializer_list<const char*> keys) const {
        if (!m_j.is_object()) fail("expected an object");
        for (const auto& [k, v] : m_j.items()) {
            bool known = false;
            for (const char* key : keys) known = known || k == key;
            if (!known) Node(v, join(k)).fail("unknown field");
        }
    }

    double number() const {
        if (!m_j.is_number()) fail("expected a number");
        const double v = m_j.get<double>();
        if (!std::isfinite(v)) fail("expected a finite number");
        return v;
    }
    double positive() const {
        const double v = number();
        if (!(v > 0.0)) fail("expected a positive number");
        return v;
    }
    std::uint64_t unsigned_int() const {
        if (!m_j.is_number_unsigned() && !(m_j.is_number_integer() && m_j.get<std::int64_t>() >= 0))
            fail("expected a nonnegative integer");
        return m_j.get<std::uint64_t>();
    }
    bool boolean() const {
        if (!m_j.is_boolean()) fail("expected true or false");
        return m_j.get<bool>();
    }
    std::string string() const {
        if (!m_j.is_string()) fail("expected a string");
        return m_j.get<std::string>();
    }
    std::size_t size() const {
        if (!m_j.is_array()) fail("expected an array");
        return m_j.size();
    }
    Vector vector() const {
        Vector v(size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = (*this)[i].number();
        return v;
    }
    /// Array of rows; a bare number stands for a 1 x 1 matrix.
    Matrix matrix() const {
        if (m_j.is_number()) return Matrix(1, 1, {number()});
        const std::size_t rows = size();
        if (rows == 0) fail("matrix has no rows");
        std::vector<double> data;
        std::size_t cols = 0;
        for (std::size_t i = 0; i < rows; ++i) {
            const Vector r = (*this)[i].vector();
            if (i == 0) cols = r.size();
            if (r.size() != cols || cols == 0) (*this)[i].fail("rows must have equal, nonzero length");
            data.insert(data.end(), r.begin(), r.end());
        }
        return Matrix(rows, cols, std::move(data));
    }

    template <class T>
    T optional(const char* key, T fallback, T (Node::*get)() const) const {
        return has(key) ? ((*this)[key].*get)() : fallback;
    }

private:
    std::string join(const std::string& key) const { return m_path.empty() ? key : m_path + "." + key; }

    const json& m_j;
    std::string m_path;
};

Box parse_box(const Node& n) {
    n.allow({"lo", "hi"});
    try {
        return Box(n["lo"].vector(), n["hi"].vector());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::parse_error) throw;
        n.fail(e.detail());
    }
}

std::vector<unsigned> powers(const Node& n, std::size_t expected) {
    if (!n.raw().is_array() || n.size() != expected)
        n.fail("expected " + std::to_string(expected) + " exponents");
    std::vector<unsigned> p;
    for (std::size_t i = 0; i < expected; ++i) p.push_back(static_cast<unsigned>(n[i].unsigned_int()));
    return p;
}

std::shared_ptr<const DelayRhs> parse_rhs(const Node& n) {
    const std::string type = n["type"].string();
    if (type == "linear-delay" || type == "tanh-delay") {
        n.allow({"type", "A", "Ad", "B"});
        Matrix a = n["A"].matrix(), ad = n["Ad"].matrix(), b = n["B"].matrix();
        try {
            if (type == "linear-delay") return std::make_shared<LinearDelayRhs>(a, ad, b);
            return std::make_shared<TanhDelayRhs>(a, ad, b);
        } catch (const Error& e) {
            n.fail(e.detail());
        }
    }
    if (type == "polynomial") {
        n.allow({"type", "state_dim", "input_dim", "components"});
        const std::size_t sd = n["state_dim"].unsigned_int();
        const std::size_t id = n["input_dim"].unsigned_int();
        const Node comps = n["components"];
        if (comps.size() != sd) comps.fail("expected one term list per state component");
        std::vector<std::vector<PolynomialRhs::Term>> components(sd);
        for (std::size_t i = 0; i < sd; ++i) {
            const Node terms = comps[i];
            for (std::size_t k = 0; k < terms.size(); ++k) {
                const Node t = terms[k];
                t.allow({"c", "now", "delayed", "input"});
                components[i].push_back({t["c"].number(),
                                         t.has("now") ? powers(t["now"], sd) : std::vector<unsigned>(sd, 0),
                                         t.has("delayed") ? powers(t["delayed"], sd) : std::vector<unsigned>(sd, 0),
                                         t.has("input") ? powers(t["input"], id) : std::vector<unsigned>(id, 0)});
            }
        }
        try {
            return std::make_shared<PolynomialRhs>(sd, id, std::move(components));
        } catch (const Error& e) {
            n.fail(e.detail());
        }
    }
    n["type"].fail("unknown right-hand side '" + type + "'");
}

InitialCondition parse_initial(const Node& n, std::size_t dim, double delta) {
    const std::string type = n["type"].string();
    InitialCondition ic;
    ic.description = type;
    if (type == "constant") {
        n.allow({"type", "value"});
        const Vector v = n["value"].vector();
        if (v.size() != dim) n["value"].fail("expected " + std::to_string(dim) + " components");
        ic.value = [v](double) { return v; };
        ic.curvature = 0.0;
        return ic;
    }
    if (type == "polynomial") {
        // value_i(s) = sum_k c[i][k] s^k on [-delta, 0]
        n.allow({"type", "coefficients"});
        const Node c = n["coefficients"];
        if (c.size() != dim) c.fail("expected one coefficient list per component");
        std::vector<Vector> coef;
        double curvature = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            coef.push_back(c[i].vector());
            double bound = 0.0;  // sum_k k (k-1) |c_k| delta^(k-2) bounds |p''|
            for (std::size_t k = 2; k < coef.back().size(); ++k)
                bound += double(k) * double(k - 1) * std::abs(coef.back()[k]) * std::pow(delta, double(k - 2));
            curvature = std::max(curvature, bound);
        }
        ic.value = [coef](double s) {
            Vector v(coef.size(), 0.0);
            for (std::size_t i = 0; i < coef.size(); ++i)
                for (std::size_t k = coef[i].size(); k-- > 0;) v[i] = v[i] * s + coef[i][k];
            return v;
        };
        ic.curvature = curvature;
        return ic;
    }
    if (type == "piecewise-linear") {
        n.allow({"type", "times", "values"});
        const Vector times = n["times"].vector();
        const Node vals = n["values"];
        if (times.size() < 2 || vals.size() != times.size()) n.fail("need matching times and values, at least 2");
        if (std::abs(times.front() + delta) > 1e-12 * delta || times.back() != 0.0)
            n["times"].fail("times must run from -delta to 0");
        std::vector<Vector> v;
        for (std::size_t k = 0; k < times.size(); ++k) {
            if (k > 0 && !(times[k] > times[k - 1])) n["times"].fail("times must increase");
            v.push_back(vals[k].vector());
            if (v.back().size() != dim) vals[k].fail("expected " + std::to_string(dim) + " components");
        }
        ic.value = [times, v](double s) {
            std::size_t k = 0;
            while (k + 2 < times.size() && s > times[k + 1]) ++k;
            const double w = std::clamp((s - times[k]) / (times[k + 1] - times[k]), 0.0, 1.0);
            Vector out(v[k].size());
            for (std::size_t i = 0; i < out.size(); ++i) out[i] = v[k][i] + w * (v[k + 1][i] - v[k][i]);
            return out;
        };
        ic.curvature = 0.0;  // zero on every linear piece
        return ic;
    }
    n["type"].fail("unknown initial condition '" + type + "'");
}

DeltaIssCertificate parse_certificate(const Node& n, double delta) {
    const std::string type = n["type"].string();
    try {
        if (type == "halanay") {
            n.allow({"type", "a", "b", "input_gain"});
            return halanay_certificate(n["a"].number(), n["b"].number(), n["input_gain"].number(), delta);
        }
        if (type == "explicit") {
            n.allow({"type", "beta", "gamma"});
            const Node b = n["beta"], g = n["gamma"];
            b.allow({"C", "sigma"});
            g.allow({"c", "p"});
            return DeltaIssCertificate{KLFunction(b["C"].number(), b["sigma"].number()),
                                       KFunction(g["c"].number(), g.optional("p", 1.0, &Node::number))};
        }
    } catch (const Error& e) {
        if (e.code() == ErrorCode::parse_error) throw;
        n.fail(e.detail());
    }
    n["type"].fail("unknown certificate '" + type + "'");
}

}  // namespace

std::string fnv1a_hex(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = digits[h & 0xf];
    return out;
}

std::string PipelineConfig::model_hash() const {
    json j = source;
    j.erase("probes");
    j.erase("validation");
    return fnv1a_hex(j.dump());
}

json load_json(const std::string& path) {
    const std::string text = read_file(path);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::parse_error, path + ": " + e.what());
    }
}

void apply_overrides(json& doc, const ConfigOverrides& o) {
    if (!doc.is_object()) return;
    if (o.epsilon) doc["epsilon"] = *o.epsilon;
    if (o.seed) {
        for (const char* section : {"probes", "validation"})
            if (doc.contains(section) && doc[section].is_object()) doc[section]["seed"] = *o.seed;
    }
}

PipelineConfig parse_config(const json& doc) {
    const Node root(doc, "");
    root.allow({"version", "system", "initial", "bounds", "certificate", "discretization", "budget", "epsilon",
                "abstraction", "probes", "validation", "comment"});
    if (root["version"].unsigned_int() != 1) root["version"].fail("unsupported version");

    PipelineConfig cfg;
    cfg.source = doc;

    const Node s = root["system"];
    s.allow({"delta", "input_delay", "rhs", "state_box", "input_box", "kappa", "embedding_inflation"});
    const double delta = s["delta"].positive();
    auto rhs = parse_rhs(s["rhs"]);
    try {
        cfg.system = std::make_shared<TimeDelaySystem>(
            delta, s.optional("input_delay", 0.0, &Node::number), rhs, parse_box(s["state_box"]),
            parse_box(s["input_box"]), s["kappa"].positive(), s.optional("embedding_inflation", 1.25, &Node::positive));
    } catch (const Error& e) {
        if (e.code() == ErrorCode::parse_error) throw;
        s.fail(e.detail());
    }
    const std::size_t n = cfg.system->state_dim();
    cfg.initial = parse_initial(root["initial"], n, delta);

    const Node b = root["bounds"];
    b.allow({"B_X0", "B_J", "M"});
    cfg.B_X0 = b["B_X0"].positive();
    if (b.has("B_J")) cfg.B_J = b["B_J"].positive();
    if (b.has("M")) cfg.M = b["M"].positive();
    if (!cfg.B_J && !cfg.M) b.fail("need B_J or M");

    cfg.certificate = parse_certificate(root["certificate"], delta);

    if (root.has("discretization")) {
        const Node d = root["discretization"];
        d.allow({"refinement", "substeps", "max_tau_steps"});
        cfg.solver.refinement = d.optional<std::uint64_t>("refinement", 10, &Node::unsigned_int);
        cfg.solver.substeps = d.optional<std::uint64_t>("substeps", 1, &Node::unsigned_int);
        cfg.solver.max_tau_steps = d.optional<std::uint64_t>("max_tau_steps", 100000, &Node::unsigned_int);
        if (cfg.solver.refinement < 1) d["refinement"].fail("must be at least 1");
        if (cfg.solver.substeps < 1) d["substeps"].fail("must be at least 1");
    }
    if (root.has("budget")) {
        const Node d = root["budget"];
        d.allow({"beta", "gamma", "lambda"});
        cfg.solver.split = {d["beta"].positive(), d["gamma"].positive(), d["lambda"].positive()};
    }
    cfg.epsilon = root["epsilon"].positive();

    if (root.has("abstraction")) {
        const Node a = root["abstraction"];
        a.allow({"tau", "N", "theta", "lambda_u"});
        AbstractionParams p;
        p.tau = a["tau"].positive();
        p.interior_nodes = a["N"].unsigned_int();
        p.theta = a["theta"].positive();
        p.lambda_u = a["lambda_u"].positive();
        p.epsilon = cfg.epsilon;
        p.refinement = cfg.solver.refinement;
        p.substeps = cfg.solver.substeps;
        cfg.explicit_params = p;
    }

    const Node pr = root["probes"];
    pr.allow({"seed", "count", "horizon_steps", "kink", "estimate_samples"});
    cfg.probes.seed = pr["seed"].unsigned_int();
    cfg.probes.count = pr.optional<std::uint64_t>("count", 200, &Node::unsigned_int);
    cfg.probes.horizon_steps = pr.optional<std::uint64_t>("horizon_steps", 10, &Node::unsigned_int);
    cfg.probes.kink = pr.optional("kink", true, &Node::boolean);
    cfg.probes.estimate_samples = pr.optional<std::uint64_t>("estimate_samples", 200, &Node::unsigned_int);

    const Node v = root["validation"];
    v.allow({"seed", "words", "length", "refine"});
    cfg.validation.seed = v["seed"].unsigned_int();
    cfg.validation.words = v.optional<std::uint64_t>("words", 100, &Node::unsigned_int);
    cfg.validation.length = v.optional<std::uint64_t>("length", 10, &Node::unsigned_int);
    cfg.validation.refine = v.optional<std::uint64_t>("refine", 4, &Node::unsigned_int);
    return cfg;
}

PipelineConfig load_config(const std::string& path, const ConfigOverrides& o) {
    json doc = load_json(path);
    apply_overrides(doc, o);
    try {
        return parse_config(doc);
    } catch (const Error& e) {
        throw Error(e.code(), path + ": " + e.detail());
    }
}

}  // namespace tdsym
