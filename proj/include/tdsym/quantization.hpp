#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "tdsym/box.hpp"
#include "tdsym/state_function.hpp"

namespace tdsym {

using BigCount = boost::multiprecision::cpp_int;

/// Points of a box whose coordinates are integer multiples of `spacing`.
/// The lattice is anchored at the origin, not at the box corner.
class Lattice {
public:
    Lattice(Box box, double spacing);

    const Box& box() const noexcept { return m_box; }
    double spacing() const noexcept { return m_spacing; }
    std::size_t dim() const noexcept { return m_box.dim(); }

    std::int64_t min_index(std::size_t axis) const noexcept { return m_min[axis]; }
    std::int64_t max_index(std::size_t axis) const noexcept { return m_max[axis]; }
    std::uint64_t axis_size(std::size_t axis) const noexcept;
    bool empty() const noexcept;
    BigCount size() const;

    /// All points in lexicographic index order (first axis slowest).
    std::vector<Vector> points() const;

    /// Nearest in-box index on one axis; ties go to the smaller index.
    /// `clamped` is set when the unconstrained nearest point lies outside.
    std::int64_t nearest_index(std::size_t axis, double value, bool& clamped) const noexcept;
    double coordinate(std::int64_t index) const noexcept { return static_cast<double>(index) * m_spacing; }

    /// Largest max-norm distance from a point of the box to the lattice.
    double covering_radius() const noexcept;

private:
    Box m_box;
    double m_spacing;
    std::vector<std::int64_t> m_min;
    std::vector<std::int64_t> m_max;
};

std::vector<Vector> lattice_points(const Box& box, double spacing);

/// Piecewise-linear hat functions s_0..s_{N+1} on [a, b] with h = (b-a)/(N+1).
class SplineBasis {
public:
    SplineBasis(std::size_t interior_nodes, double a, double b);

    std::size_t interior_nodes() const noexcept { return m_n; }
    std::size_t size() const noexcept { return m_n + 2; }
    double a() const noexcept { return m_a; }
    double b() const noexcept { return m_b; }
    double h() const noexcept { return m_h; }
    double node(std::size_t i) const noexcept;

    double hat(std::size_t i, double t) const noexcept;

    /// sum_i c_i s_i(t) for node values c (size() x dim, node-major).
    void combine(std::span<const double> node_values, std::size_t dim, double t, std::span<double> out) const;

    friend bool operator==(const SplineBasis&, const SplineBasis&) = default;

private:
    std::size_t m_n;
    double m_a;
    double m_b;
    double m_h;
};

/// h^2 M / 8 + (N + 2) theta, with h = length / (N + 1).
double lambda_bound(std::size_t interior_nodes, double theta, double curvature, double length);

struct SplineResolution {
    std::size_t interior_nodes = 0;
    double theta = 0.0;
};

/// Splits `lambda` evenly: the smallest N with h^2 M / 8 <= lambda / 2, then
/// theta = (lambda / 2) / (N + 2).
SplineResolution choose_resolution(double lambda, double curvature, double length);

/// Everything needed to decode a symbolic state.
struct Resolution {
    double delta = 0.0;
    std::size_t dim = 0;
    std::size_t interior_nodes = 0;
    double theta = 0.0;

    std::size_t nodes() const noexcept { return interior_nodes + 2; }
    double spacing() const noexcept { return 2.0 * theta; }
    SplineBasis basis() const { return SplineBasis(interior_nodes, -delta, 0.0); }
    friend bool operator==(const Resolution&, const Resolution&) = default;
};

/// Lattice coefficients of a piecewise-linear spline, axis-major:
/// indices[axis * nodes + node]. Identity is the index vector.
struct SymbolicState {
    std::vector<std::int64_t> indices;

    friend bool operator==(const SymbolicState&, const SymbolicState&) = default;
    friend auto operator<=>(const SymbolicState&, const SymbolicState&) = default;
};

struct SymbolicStateHash {
    std::size_t operator()(const SymbolicState& s) const noexcept;
};

/// Decimal indices joined by ',' in axis-major order, e.g. "-3,0,2".
std::string canonical_id(const SymbolicState& s);
SymbolicState parse_canonical_id(std::string_view id);

/// The quantized spline interpolation operator, together with its inverse
/// image (decode) and the output metric.
class SplineQuantizer {
public:
    SplineQuantizer(Box state_box, double delta, std::size_t interior_nodes, double theta);

    const Resolution& resolution() const noexcept { return m_res; }
    const SplineBasis& basis() const noexcept { return m_basis; }
    const Lattice& lattice() const noexcept { return m_lattice; }

    struct Quantized {
        SymbolicState state;
        std::size_t clamped_nodes = 0;
    };

    /// Rounds y at every node to the spacing-2 theta lattice. The sample grid
    /// of y must contain every node.
    Quantized quantize(const StateFunction& y) const;
    /// Same, from node values (nodes x dim, node-major).
    Quantized quantize_nodes(std::span<const double> node_values) const;

    /// Node values (nodes x dim, node-major).
    std::vector<double> node_values(const SymbolicState& s) const;
    /// The spline sampled with `per_interval` samples per node interval.
    StateFunction decode(const SymbolicState& s, std::size_t per_interval = 1) const;
    void value_at(const SymbolicState& s, double t, std::span<double> out) const;

    /// Exact sup distance of two splines of this resolution (node maximum).
    double sup_distance(const SymbolicState& p, const SymbolicState& q) const;
    /// sup |z - decode(q)| over z's samples refined `refine` times per grid step.
    double sup_gap(const StateFunction& z, const SymbolicState& q, std::size_t refine = 1) const;

    void check(const SymbolicState& s) const;

private:
    Resolution m_res;
    SplineBasis m_basis;
    Lattice m_lattice;
};

/// Piecewise-linear sup distance between splines of possibly different
/// resolutions, evaluated on the union of both node sets.
double output_distance(const Resolution& ra, const SymbolicState& a, const Resolution& rb, const SymbolicState& b);

/// Constant-input labels: the spacing-2 lambda_u lattice inside the input box.
std::vector<Vector> input_labels(const Box& input_box, double lambda_u);

}  // namespace tdsym
