#include "tdsym/box.hpp"

#include <algorithm>
#include <cmath>

#include "tdsym/error.hpp"

namespace tdsym {

double inf_norm(std::span<const double> v) noexcept {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double inf_distance(std::span<const double> a, std::span<const double> b) noexcept {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

Box::Box(Vector lo, Vector hi) : m_lo(std::move(lo)), m_hi(std::move(hi)) {
    if (m_lo.size() != m_hi.size() || m_lo.empty())
        throw Error(ErrorCode::shape_error, "box bounds must be nonempty and of equal dimension");
    for (std::size_t i = 0; i < m_lo.size(); ++i) {
        if (!std::isfinite(m_lo[i]) || !std::isfinite(m_hi[i]) || m_lo[i] > m_hi[i])
            throw Error(ErrorCode::shape_error, "box axis " + std::to_string(i) + " is empty or unbounded");
    }
}

bool Box::contains(std::span<const double> x, double tol) const noexcept {
    if (x.size() != dim()) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] >= m_lo[i] - tol && x[i] <= m_hi[i] + tol)) return false;
    }
    return true;
}

bool Box::contains_origin() const noexcept {
    return contains(Vector(dim(), 0.0));
}

double Box::norm_bound() const noexcept {
    double m = 0.0;
    for (std::size_t i = 0; i < dim(); ++i) m = std::max({m, std::abs(m_lo[i]), std::abs(m_hi[i])});
    return m;
}

Box Box::inflated(double factor) const {
    Vector lo(dim()), hi(dim());
    for (std::size_t i = 0; i < dim(); ++i) {
        const double c = 0.5 * (m_lo[i] + m_hi[i]);
        const double r = 0.5 * (m_hi[i] - m_lo[i]) * factor;
        lo[i] = c - r;
        hi[i] = c + r;
    }
    return Box(std::move(lo), std::move(hi));
}

}  // namespace tdsym
