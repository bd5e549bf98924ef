#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace tdsym {

using Vector = std::vector<double>;

// Max norm, the vector norm used throughout.
double inf_norm(std::span<const double> v) noexcept;
double inf_distance(std::span<const double> a, std::span<const double> b) noexcept;

/// Axis-aligned box [lo_1,hi_1] x ... x [lo_n,hi_n].
class Box {
public:
    Box() = default;
    Box(Vector lo, Vector hi);

    std::size_t dim() const noexcept { return m_lo.size(); }
    const Vector& lo() const noexcept { return m_lo; }
    const Vector& hi() const noexcept { return m_hi; }

    bool contains(std::span<const double> x, double tol = 0.0) const noexcept;
    bool contains_origin() const noexcept;

    /// sup over the box of the max norm.
    double norm_bound() const noexcept;

    /// Box with the same center and every half-width scaled by `factor`.
    Box inflated(double factor) const;

    friend bool operator==(const Box&, const Box&) = default;

private:
    Vector m_lo;
    Vector m_hi;
};

}  // namespace tdsym
