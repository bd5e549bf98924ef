#include "tdsym/state_function.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tdsym/error.hpp"

namespace tdsym {

StateFunction::StateFunction(double delta, std::size_t dim, std::vector<double> samples,
                             std::vector<double> left_slopes, std::vector<double> right_slopes)
    : m_delta(delta), m_dim(dim), m_samples(std::move(samples)), m_left(std::move(left_slopes)),
      m_right(std::move(right_slopes)) {
    if (!(delta > 0.0) || !std::isfinite(delta))
        throw Error(ErrorCode::shape_error, "history length must be positive and finite");
    if (dim == 0 || m_samples.size() % dim != 0)
        throw Error(ErrorCode::shape_error, "sample buffer is not a multiple of the dimension");
    m_count = m_samples.size() / dim;
    if (m_count < 2) throw Error(ErrorCode::shape_error, "a history needs at least two samples");
    if (m_left.size() != m_right.size() || (!m_left.empty() && m_left.size() != m_samples.size()))
        throw Error(ErrorCode::shape_error, "slope buffers do not match samples");
    for (double v : m_samples) {
        if (!std::isfinite(v)) throw Error(ErrorCode::shape_error, "history samples must be finite");
    }
}

StateFunction StateFunction::constant(double delta, std::size_t count, std::span<const double> value) {
    std::vector<double> buf;
    buf.reserve(count * value.size());
    for (std::size_t j = 0; j < count; ++j) buf.insert(buf.end(), value.begin(), value.end());
    return StateFunction(delta, value.size(), std::move(buf));
}

StateFunction StateFunction::sample(double delta, std::size_t count, std::size_t dim,
                                    const std::function<Vector(double)>& fn) {
    if (count < 2) throw Error(ErrorCode::shape_error, "a history needs at least two samples");
    std::vector<double> buf;
    buf.reserve(count * dim);
    const double step = delta / static_cast<double>(count - 1);
    for (std::size_t j = 0; j < count; ++j) {
        const double s = j + 1 == count ? 0.0 : -delta + static_cast<double>(j) * step;
        Vector v = fn(s);
        if (v.size() != dim) throw Error(ErrorCode::shape_error, "sampled value has wrong dimension");
        buf.insert(buf.end(), v.begin(), v.end());
    }
    return StateFunction(delta, dim, std::move(buf));
}

double StateFunction::time(std::size_t j) const noexcept {
    if (j + 1 == m_count) return 0.0;
    return -m_delta + static_cast<double>(j) * grid_step();
}

Vector StateFunction::value_at(double s) const {
    Vector out(m_dim);
    value_at(s, out);
    return out;
}

void StateFunction::value_at(double s, std::span<double> out) const {
    const double step = grid_step();
    const double u = std::clamp((s + m_delta) / step, 0.0, static_cast<double>(m_count - 1));
    auto j = static_cast<std::size_t>(std::floor(u));
    const double w = u - static_cast<double>(j);
    if (j >= m_count - 1 || w == 0.0) {
        const auto a = at(std::min(j, m_count - 1));
        std::copy(a.begin(), a.end(), out.begin());
        return;
    }
    const auto a = at(j);
    const auto b = at(j + 1);
    bool hermite = has_slopes();
    if (hermite) {
        const auto da = right_slope(j);
        const auto db = left_slope(j + 1);
        for (std::size_t i = 0; i < m_dim; ++i) {
            if (!std::isfinite(da[i]) || !std::isfinite(db[i])) {
                hermite = false;
                break;
            }
        }
        if (hermite) {
            const double w2 = w * w;
            const double w3 = w2 * w;
            const double h00 = 2 * w3 - 3 * w2 + 1;
            const double h10 = w3 - 2 * w2 + w;
            const double h01 = -2 * w3 + 3 * w2;
            const double h11 = w3 - w2;
            for (std::size_t i = 0; i < m_dim; ++i)
                out[i] = h00 * a[i] + h10 * step * da[i] + h01 * b[i] + h11 * step * db[i];
            return;
        }
    }
    for (std::size_t i = 0; i < m_dim; ++i) out[i] = a[i] + w * (b[i] - a[i]);
}

double StateFunction::sup_norm() const noexcept {
    return inf_norm(m_samples);
}

double StateFunction::sampled_distance(const StateFunction& other) const {
    if (other.m_dim != m_dim || other.m_count != m_count || other.m_delta != m_delta)
        throw Error(ErrorCode::shape_error, "histories are sampled on different grids");
    return inf_distance(m_samples, other.m_samples);
}

StateFunction StateFunction::without_slopes() const {
    return StateFunction(m_delta, m_dim, m_samples);
}

}  // namespace tdsym
