#include "tdsym/quantization.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include "tdsym/error.hpp"

namespace tdsym {

namespace {

constexpr double index_slack = 1e-9;

}  // namespace

Lattice::Lattice(Box box, double spacing) : m_box(std::move(box)), m_spacing(spacing) {
    if (!(spacing > 0.0) || !std::isfinite(spacing))
        throw Error(ErrorCode::shape_error, "lattice spacing must be positive and finite");
    for (std::size_t i = 0; i < m_box.dim(); ++i) {
        const double lo = m_box.lo()[i] / spacing;
        const double hi = m_box.hi()[i] / spacing;
        if (std::abs(lo) > 4e18 || std::abs(hi) > 4e18)
            throw Error(ErrorCode::shape_error, "lattice index range overflows");
        m_min.push_back(static_cast<std::int64_t>(std::ceil(lo - index_slack)));
        m_max.push_back(static_cast<std::int64_t>(std::floor(hi + index_slack)));
    }
}

std::uint64_t Lattice::axis_size(std::size_t axis) const noexcept {
    return m_max[axis] < m_min[axis] ? 0 : static_cast<std::uint64_t>(m_max[axis] - m_min[axis]) + 1;
}

bool Lattice::empty() const noexcept {
    for (std::size_t i = 0; i < dim(); ++i)
        if (axis_size(i) == 0) return true;
    return false;
}

BigCount Lattice::size() const {
    BigCount n = 1;
    for (std::size_t i = 0; i < dim(); ++i) n *= axis_size(i);
    return n;
}

std::vector<Vector> Lattice::points() const {
    std::vector<Vector> out;
    if (empty()) return out;
    std::vector<std::int64_t> k(m_min);
    while (true) {
        Vector p(dim());
        for (std::size_t i = 0; i < dim(); ++i) p[i] = coordinate(k[i]);
        out.push_back(std::move(p));
        std::size_t axis = dim();
        while (axis > 0) {
            --axis;
            if (k[axis] < m_max[axis]) {
                ++k[axis];
                break;
            }
            k[axis] = m_min[axis];
            if (axis == 0) return out;
        }
    }
}

std::int64_t Lattice::nearest_index(std::size_t axis, double value, bool& clamped) const noexcept {
    const auto k = static_cast<std::int64_t>(std::ceil(value / m_spacing - 0.5));
    clamped = false;
    if (k < m_min[axis]) {
        clamped = true;
        return m_min[axis];
    }
    if (k > m_max[axis]) {
        clamped = true;
        return m_max[axis];
    }
    return k;
}

double Lattice::covering_radius() const noexcept {
    if (empty()) return std::numeric_limits<double>::infinity();
    double r = 0.0;
    for (std::size_t i = 0; i < dim(); ++i) {
        const double first = coordinate(m_min[i]);
        const double last = coordinate(m_max[i]);
        r = std::max(r, std::max(0.0, first - m_box.lo()[i]));
        r = std::max(r, std::max(0.0, m_box.hi()[i] - last));
        if (m_max[i] > m_min[i]) r = std::max(r, 0.5 * m_spacing);
    }
    return r;
}

std::vector<Vector> lattice_points(const Box& box, double spacing) {
    return Lattice(box, spacing).points();
}

SplineBasis::SplineBasis(std::size_t interior_nodes, double a, double b)
    : m_n(interior_nodes), m_a(a), m_b(b), m_h((b - a) / static_cast<double>(interior_nodes + 1)) {
    if (!(b > a)) throw Error(ErrorCode::shape_error, "spline interval must have positive length");
}

double SplineBasis::node(std::size_t i) const noexcept {
    return i == m_n + 1 ? m_b : m_a + static_cast<double>(i) * m_h;
}

double SplineBasis::hat(std::size_t i, double t) const noexcept {
    if (t < m_a || t > m_b) return 0.0;
    // In units of h, snapped so that hat(i, node(j)) is exactly 0 or 1.
    double u = (t - m_a) / m_h;
    if (const double r = std::round(u); std::abs(u - r) < 1e-9) u = r;
    return std::max(0.0, 1.0 - std::abs(u - static_cast<double>(i)));
}

void SplineBasis::combine(std::span<const double> node_values, std::size_t dim, double t,
                          std::span<double> out) const {
    const double u = std::clamp((t - m_a) / m_h, 0.0, static_cast<double>(m_n + 1));
    auto i = static_cast<std::size_t>(std::floor(u));
    if (i > m_n) i = m_n;
    const double w = u - static_cast<double>(i);
    for (std::size_t k = 0; k < dim; ++k) {
        const double lo = node_values[i * dim + k];
        const double hi = node_values[(i + 1) * dim + k];
        out[k] = w == 0.0 ? lo : lo + w * (hi - lo);
    }
}

double lambda_bound(std::size_t interior_nodes, double theta, double curvature, double length) {
    const double h = length / static_cast<double>(interior_nodes + 1);
    return h * h * curvature / 8.0 + static_cast<double>(interior_nodes + 2) * theta;
}

SplineResolution choose_resolution(double lambda, double curvature, double length) {
    if (!(lambda > 0.0) || !(length > 0.0) || curvature < 0.0)
        throw Error(ErrorCode::infeasible, "spline budget, curvature and length must be positive");
    const double half = lambda / 2.0;
    auto fits = [&](std::size_t n) {
        const double h = length / static_cast<double>(n + 1);
        return h * h * curvature / 8.0 <= half;
    };
    std::size_t n = 0;
    if (curvature > 0.0) {
        const double guess = length / std::sqrt(8.0 * half / curvature) - 1.0;
        n = guess <= 0.0 ? 0 : static_cast<std::size_t>(std::ceil(guess));
        while (n > 0 && fits(n - 1)) --n;
        while (!fits(n)) ++n;
    }
    return SplineResolution{n, half / static_cast<double>(n + 2)};
}

std::size_t SymbolicStateHash::operator()(const SymbolicState& s) const noexcept {
    std::uint64_t h = 1469598103934665603ull;
    for (std::int64_t v : s.indices) {
        auto u = static_cast<std::uint64_t>(v);
        for (int b = 0; b < 8; ++b) {
            h ^= (u >> (8 * b)) & 0xffu;
            h *= 1099511628211ull;
        }
    }
    return static_cast<std::size_t>(h);
}

std::string canonical_id(const SymbolicState& s) {
    std::string out;
    char buf[24];
    for (std::size_t i = 0; i < s.indices.size(); ++i) {
        if (i) out.push_back(',');
        auto [p, ec] = std::to_chars(buf, buf + sizeof buf, s.indices[i]);
        out.append(buf, p);
    }
    return out;
}

SymbolicState parse_canonical_id(std::string_view id) {
    SymbolicState s;
    std::size_t pos = 0;
    while (pos <= id.size()) {
        const std::size_t end = std::min(id.find(',', pos), id.size());
        std::int64_t v = 0;
        auto [p, ec] = std::from_chars(id.data() + pos, id.data() + end, v);
        if (ec != std::errc() || p != id.data() + end)
            throw Error(ErrorCode::parse_error, "malformed state id '" + std::string(id) + "'");
        s.indices.push_back(v);
        pos = end + 1;
    }
    return s;
}

SplineQuantizer::SplineQuantizer(Box state_box, double delta, std::size_t interior_nodes, double theta)
    : m_res{delta, state_box.dim(), interior_nodes, theta},
      m_basis(interior_nodes, -delta, 0.0),
      m_lattice(std::move(state_box), 2.0 * theta) {
    if (m_lattice.empty()) throw Error(ErrorCode::shape_error, "state lattice is empty");
}

SplineQuantizer::Quantized SplineQuantizer::quantize(const StateFunction& y) const {
    if (y.dim() != m_res.dim) throw Error(ErrorCode::shape_error, "history has the wrong dimension");
    if (std::abs(y.delta() - m_res.delta) > 1e-12 * m_res.delta)
        throw Error(ErrorCode::shape_error, "history length does not match the spline interval");
    const std::size_t intervals = y.count() - 1;
    const std::size_t nodes = m_res.nodes();
    if (intervals % (nodes - 1) != 0)
        throw Error(ErrorCode::shape_error, "history grid does not contain the spline nodes");
    const std::size_t stride = intervals / (nodes - 1);
    std::vector<double> values(nodes * m_res.dim);
    for (std::size_t i = 0; i < nodes; ++i) {
        const auto v = y.at(i * stride);
        std::copy(v.begin(), v.end(), values.begin() + static_cast<std::ptrdiff_t>(i * m_res.dim));
    }
    return quantize_nodes(values);
}

SplineQuantizer::Quantized SplineQuantizer::quantize_nodes(std::span<const double> node_values) const {
    const std::size_t nodes = m_res.nodes();
    const std::size_t dim = m_res.dim;
    if (node_values.size() != nodes * dim) throw Error(ErrorCode::shape_error, "wrong number of node values");
    Quantized q;
    q.state.indices.resize(nodes * dim);
    for (std::size_t i = 0; i < nodes; ++i) {
        for (std::size_t a = 0; a < dim; ++a) {
            bool clamped = false;
            q.state.indices[a * nodes + i] = m_lattice.nearest_index(a, node_values[i * dim + a], clamped);
            if (clamped) ++q.clamped_nodes;
        }
    }
    return q;
}

void SplineQuantizer::check(const SymbolicState& s) const {
    if (s.indices.size() != m_res.nodes() * m_res.dim)
        throw Error(ErrorCode::basis_error, "symbolic state does not belong to this spline basis");
}

std::vector<double> SplineQuantizer::node_values(const SymbolicState& s) const {
    check(s);
    const std::size_t nodes = m_res.nodes();
    const std::size_t dim = m_res.dim;
    std::vector<double> out(nodes * dim);
    for (std::size_t a = 0; a < dim; ++a)
        for (std::size_t i = 0; i < nodes; ++i) out[i * dim + a] = m_lattice.coordinate(s.indices[a * nodes + i]);
    return out;
}

StateFunction SplineQuantizer::decode(const SymbolicState& s, std::size_t per_interval) const {
    if (per_interval == 0) throw Error(ErrorCode::shape_error, "need at least one sample per interval");
    const auto nv = node_values(s);
    const std::size_t dim = m_res.dim;
    const std::size_t intervals = m_res.nodes() - 1;
    const std::size_t count = intervals * per_interval + 1;
    std::vector<double> samples(count * dim);
    for (std::size_t j = 0; j < count; ++j) {
        const std::size_t i = std::min(j / per_interval, intervals - 1);
        const std::size_t r = j - i * per_interval;
        const double w = static_cast<double>(r) / static_cast<double>(per_interval);
        for (std::size_t a = 0; a < dim; ++a) {
            const double lo = nv[i * dim + a];
            const double hi = nv[(i + 1) * dim + a];
            samples[j * dim + a] = r == 0 ? lo : (r == per_interval ? hi : lo + w * (hi - lo));
        }
    }
    return StateFunction(m_res.delta, dim, std::move(samples));
}

void SplineQuantizer::value_at(const SymbolicState& s, double t, std::span<double> out) const {
    const auto nv = node_values(s);
    m_basis.combine(nv, m_res.dim, t, out);
}

double SplineQuantizer::sup_distance(const SymbolicState& p, const SymbolicState& q) const {
    check(p);
    check(q);
    std::int64_t m = 0;
    for (std::size_t i = 0; i < p.indices.size(); ++i) m = std::max(m, std::abs(p.indices[i] - q.indices[i]));
    return static_cast<double>(m) * m_lattice.spacing();
}

double SplineQuantizer::sup_gap(const StateFunction& z, const SymbolicState& q, std::size_t refine) const {
    if (z.dim() != m_res.dim) throw Error(ErrorCode::shape_error, "history has the wrong dimension");
    if (refine == 0) refine = 1;
    const auto nv = node_values(q);
    const std::size_t points = (z.count() - 1) * refine + 1;
    const double step = z.delta() / static_cast<double>(points - 1);
    Vector zv(m_res.dim), pv(m_res.dim);
    double gap = 0.0;
    for (std::size_t j = 0; j < points; ++j) {
        const double t = j + 1 == points ? 0.0 : -z.delta() + static_cast<double>(j) * step;
        z.value_at(t, zv);
        m_basis.combine(nv, m_res.dim, t, pv);
        gap = std::max(gap, inf_distance(zv, pv));
    }
    return gap;
}

double output_distance(const Resolution& ra, const SymbolicState& a, const Resolution& rb, const SymbolicState& b) {
    if (ra.dim != rb.dim || ra.delta != rb.delta)
        throw Error(ErrorCode::metric_error, "outputs live in different function spaces");
    if (a.indices.size() != ra.nodes() * ra.dim || b.indices.size() != rb.nodes() * rb.dim)
        throw Error(ErrorCode::basis_error, "symbolic state does not match its resolution");
    const std::size_t dim = ra.dim;
    if (ra == rb) {
        std::int64_t m = 0;
        for (std::size_t i = 0; i < a.indices.size(); ++i) m = std::max(m, std::abs(a.indices[i] - b.indices[i]));
        return static_cast<double>(m) * ra.spacing();
    }
    const SplineBasis ba = ra.basis();
    const SplineBasis bb = rb.basis();
    auto values = [dim](const Resolution& r, const SymbolicState& s) {
        std::vector<double> v(r.nodes() * dim);
        for (std::size_t ax = 0; ax < dim; ++ax)
            for (std::size_t i = 0; i < r.nodes(); ++i)
                v[i * dim + ax] = static_cast<double>(s.indices[ax * r.nodes() + i]) * r.spacing();
        return v;
    };
    const auto va = values(ra, a);
    const auto vb = values(rb, b);
    std::vector<double> times;
    for (std::size_t i = 0; i < ra.nodes(); ++i) times.push_back(ba.node(i));
    for (std::size_t i = 0; i < rb.nodes(); ++i) times.push_back(bb.node(i));
    Vector pa(dim), pb(dim);
    double d = 0.0;
    for (double t : times) {
        ba.combine(va, dim, t, pa);
        bb.combine(vb, dim, t, pb);
        d = std::max(d, inf_distance(pa, pb));
    }
    return d;
}

std::vector<Vector> input_labels(const Box& input_box, double lambda_u) {
    if (!(lambda_u > 0.0)) throw Error(ErrorCode::shape_error, "input quantization must be positive");
    return lattice_points(input_box, 2.0 * lambda_u);
}

}  // namespace tdsym
