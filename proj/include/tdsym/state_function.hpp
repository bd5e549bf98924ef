#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "tdsym/box.hpp"

namespace tdsym {

/// A history segment on [-delta, 0], stored as uniformly spaced samples.
///
/// Between samples j and j+1 the function is linear, unless the right slope
/// at j and the left slope at j+1 are both finite, in which case the cubic
/// Hermite interpolant is used. Integrated segments record their one-sided
/// slopes (the rhs values; they differ where the input switches) so chained
/// integration keeps fourth-order accuracy. Quantized states carry none.
class StateFunction {
public:
    StateFunction() = default;
    StateFunction(double delta, std::size_t dim, std::vector<double> samples,
                  std::vector<double> left_slopes = {}, std::vector<double> right_slopes = {});

    static StateFunction constant(double delta, std::size_t count, std::span<const double> value);
    static StateFunction sample(double delta, std::size_t count, std::size_t dim,
                                const std::function<Vector(double)>& fn);

    double delta() const noexcept { return m_delta; }
    std::size_t dim() const noexcept { return m_dim; }
    std::size_t count() const noexcept { return m_count; }
    double grid_step() const noexcept { return m_delta / static_cast<double>(m_count - 1); }
    double time(std::size_t j) const noexcept;

    std::span<const double> at(std::size_t j) const noexcept {
        return {m_samples.data() + j * m_dim, m_dim};
    }
    std::span<const double> now() const noexcept { return at(m_count - 1); }
    std::span<const double> oldest() const noexcept { return at(0); }

    bool has_slopes() const noexcept { return !m_left.empty(); }
    std::span<const double> left_slope(std::size_t j) const noexcept {
        return {m_left.data() + j * m_dim, m_dim};
    }
    std::span<const double> right_slope(std::size_t j) const noexcept {
        return {m_right.data() + j * m_dim, m_dim};
    }

    const std::vector<double>& samples() const noexcept { return m_samples; }

    /// Value at s in [-delta, 0]; s is clamped to the interval.
    Vector value_at(double s) const;
    void value_at(double s, std::span<double> out) const;

    double sup_norm() const noexcept;

    /// Max-norm distance over the samples; both functions must share the grid.
    double sampled_distance(const StateFunction& other) const;

    StateFunction without_slopes() const;

    friend bool operator==(const StateFunction&, const StateFunction&) = default;

private:
    double m_delta = 0.0;
    std::size_t m_dim = 0;
    std::size_t m_count = 0;
    std::vector<double> m_samples;
    std::vector<double> m_left;
    std::vector<double> m_right;
};

}  // namespace tdsym
