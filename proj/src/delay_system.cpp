#include "tdsym/delay_system.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "tdsym/error.hpp"

namespace tdsym {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorCode::shape_error, what);
}

void check_linear_shapes(const Matrix& a, const Matrix& ad, const Matrix& b) {
    require(a.rows == a.cols && a.rows > 0, "A must be square and nonempty");
    require(ad.rows == a.rows && ad.cols == a.cols, "Ad must match A");
    require(b.rows == a.rows && b.cols > 0, "B must have one row per state");
}

double ipow(double x, unsigned p) noexcept {
    double r = 1.0;
    for (unsigned i = 0; i < p; ++i) r *= x;
    return r;
}

std::string time_label(double t) {
    std::ostringstream os;
    os.precision(12);
    os << t;
    return os.str();
}

}  // namespace

Matrix::Matrix(std::size_t r, std::size_t c, std::vector<double> d) : rows(r), cols(c), data(std::move(d)) {
    require(data.size() == r * c, "matrix data does not match its shape");
}

void Matrix::multiply_add(std::span<const double> v, std::span<double> out) const noexcept {
    for (std::size_t i = 0; i < rows; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < cols; ++j) acc += data[i * cols + j] * v[j];
        out[i] += acc;
    }
}

LinearDelayRhs::LinearDelayRhs(Matrix a, Matrix ad, Matrix b)
    : m_a(std::move(a)), m_ad(std::move(ad)), m_b(std::move(b)) {
    check_linear_shapes(m_a, m_ad, m_b);
}

void LinearDelayRhs::eval(std::span<const double> now, std::span<const double> delayed,
                          std::span<const double> u, std::span<double> out) const {
    std::fill(out.begin(), out.end(), 0.0);
    m_a.multiply_add(now, out);
    m_ad.multiply_add(delayed, out);
    m_b.multiply_add(u, out);
}

TanhDelayRhs::TanhDelayRhs(Matrix a, Matrix ad, Matrix b)
    : m_a(std::move(a)), m_ad(std::move(ad)), m_b(std::move(b)) {
    check_linear_shapes(m_a, m_ad, m_b);
}

void TanhDelayRhs::eval(std::span<const double> now, std::span<const double> delayed,
                        std::span<const double> u, std::span<double> out) const {
    std::fill(out.begin(), out.end(), 0.0);
    m_a.multiply_add(now, out);
    Vector sat(delayed.size());
    for (std::size_t i = 0; i < delayed.size(); ++i) sat[i] = std::tanh(delayed[i]);
    m_ad.multiply_add(sat, out);
    m_b.multiply_add(u, out);
}

PolynomialRhs::PolynomialRhs(std::size_t state_dim, std::size_t input_dim,
                             std::vector<std::vector<Term>> components)
    : m_n(state_dim), m_m(input_dim), m_components(std::move(components)) {
    require(m_n > 0 && m_m > 0, "polynomial rhs needs positive state and input dimensions");
    require(m_components.size() == m_n, "polynomial rhs needs one term list per state component");
    for (auto& terms : m_components) {
        for (auto& t : terms) {
            if (t.now_powers.empty()) t.now_powers.assign(m_n, 0);
            if (t.delayed_powers.empty()) t.delayed_powers.assign(m_n, 0);
            if (t.input_powers.empty()) t.input_powers.assign(m_m, 0);
            require(t.now_powers.size() == m_n && t.delayed_powers.size() == m_n && t.input_powers.size() == m_m,
                    "monomial exponent vectors have the wrong length");
        }
    }
}

void PolynomialRhs::eval(std::span<const double> now, std::span<const double> delayed,
                         std::span<const double> u, std::span<double> out) const {
    for (std::size_t i = 0; i < m_n; ++i) {
        double acc = 0.0;
        for (const auto& t : m_components[i]) {
            double v = t.coefficient;
            for (std::size_t k = 0; k < m_n; ++k) v *= ipow(now[k], t.now_powers[k]) * ipow(delayed[k], t.delayed_powers[k]);
            for (std::size_t k = 0; k < m_m; ++k) v *= ipow(u[k], t.input_powers[k]);
            acc += v;
        }
        out[i] = acc;
    }
}

TimeDelaySystem::TimeDelaySystem(double delta, double input_delay, std::shared_ptr<const DelayRhs> rhs,
                                 Box state_box, Box input_box, double kappa, double embedding_inflation)
    : m_delta(delta), m_input_delay(input_delay), m_rhs(std::move(rhs)), m_state_box(std::move(state_box)),
      m_input_box(std::move(input_box)), m_kappa(kappa) {
    require(m_rhs != nullptr, "system needs a right-hand side");
    require(delta > 0.0 && std::isfinite(delta), "state delay must be positive and finite");
    require(input_delay >= 0.0 && std::isfinite(input_delay), "input delay must be nonnegative");
    require(m_state_box.dim() == m_rhs->state_dim(), "state box dimension does not match the rhs");
    require(m_input_box.dim() == m_rhs->input_dim(), "input box dimension does not match the rhs");
    require(m_input_box.contains_origin(), "input box must contain the origin");
    require(kappa >= 0.0 && std::isfinite(kappa), "Lipschitz constant must be nonnegative");
    require(embedding_inflation >= 1.0, "embedding inflation must be at least 1");
    m_embedding_box = m_state_box.inflated(embedding_inflation);

    const Vector zx(state_dim(), 0.0), zu(input_dim(), 0.0);
    Vector f0(state_dim());
    m_rhs->eval(zx, zx, zu, f0);
    require(inf_norm(f0) <= 1e-12, "rhs must vanish at the origin (f(0,0) = 0)");
}

Vector TimeDelaySystem::evaluate_rhs(const StateFunction& x, std::span<const double> u) const {
    if (x.dim() != state_dim() || u.size() != input_dim())
        throw Error(ErrorCode::shape_error, "history or input has the wrong dimension");
    if (std::abs(x.delta() - m_delta) > 1e-12 * m_delta)
        throw Error(ErrorCode::shape_error, "history length does not match the system delay");
    Vector out(state_dim());
    m_rhs->eval(x.now(), x.oldest(), u, out);
    for (double v : out) {
        if (!std::isfinite(v)) throw Error(ErrorCode::rhs_evaluation_failure, "rhs returned a non-finite value");
    }
    return out;
}

PiecewiseConstantInput::PiecewiseConstantInput(std::vector<Vector> values, double segment_length,
                                               const Box& input_box)
    : m_values(std::move(values)), m_segment_length(segment_length) {
    require(segment_length > 0.0, "segment length must be positive");
    for (std::size_t k = 0; k < m_values.size(); ++k) {
        if (!input_box.contains(m_values[k], 1e-12))
            throw Error(ErrorCode::shape_error, "input segment " + std::to_string(k) + " leaves the input box");
    }
}

std::size_t steps_in(double tau, double step) {
    const double ratio = tau / step;
    const double rounded = std::round(ratio);
    if (!(rounded >= 1.0) || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, rounded))
        throw Error(ErrorCode::shape_error, "time " + time_label(tau) + " is not a positive multiple of step " +
                                                time_label(step));
    return static_cast<std::size_t>(rounded);
}

void check_input_delay(const TimeDelaySystem& sys, double tau) {
    const double r = sys.input_delay();
    if (r == 0.0) return;
    const double ratio = r / tau;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio))
        throw Error(ErrorCode::input_delay_misaligned,
                    "input delay " + time_label(r) + " is not a multiple of the sampling time " + time_label(tau));
}

StepResult integrate_step(const TimeDelaySystem& sys, const StateFunction& xi, std::span<const double> u,
                          double tau, std::size_t substeps) {
    const std::size_t n = sys.state_dim();
    if (xi.dim() != n || u.size() != sys.input_dim())
        throw Error(ErrorCode::shape_error, "history or input has the wrong dimension");
    if (std::abs(xi.delta() - sys.delta()) > 1e-12 * sys.delta())
        throw Error(ErrorCode::shape_error, "history length does not match the system delay");
    if (substeps == 0) throw Error(ErrorCode::shape_error, "substeps must be positive");
    if (!(tau > 0.0)) throw Error(ErrorCode::shape_error, "sampling time must be positive");

    const std::size_t grid = xi.count() - 1;       // history intervals
    const std::size_t lag = grid * substeps;        // delay in integration steps
    const double h = xi.grid_step() / static_cast<double>(substeps);
    const std::size_t total = steps_in(tau, xi.grid_step()) * substeps;
    const std::size_t points = lag + total + 1;     // index j <-> time -delta + j h

    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> x(points * n);
    std::vector<double> f(points * n, nan);

    auto xs = [&](std::size_t j) { return std::span<double>(x.data() + j * n, n); };
    auto fs = [&](std::size_t j) { return std::span<double>(f.data() + j * n, n); };

    for (std::size_t j = 0; j <= lag; ++j) {
        if (j % substeps == 0) {
            const auto v = xi.at(j / substeps);
            std::copy(v.begin(), v.end(), xs(j).begin());
        } else {
            xi.value_at(-sys.delta() + static_cast<double>(j) * h, xs(j));
        }
    }

    auto rhs = [&](std::span<const double> now, std::span<const double> delayed, std::span<double> out) {
        sys.rhs().eval(now, delayed, u, out);
        for (double v : out) {
            if (!std::isfinite(v))
                throw Error(ErrorCode::integration_divergence, "rhs became non-finite during integration");
        }
    };

    Vector k1(n), k2(n), k3(n), k4(n), tmp(n), mid(n);
    const Box& domain = sys.embedding_box();
    for (std::size_t step = 0; step < total; ++step) {
        const std::size_t cur = lag + step;
        const std::size_t back = step;  // index of t_cur - delta
        const auto xc = xs(cur);
        const auto xd0 = xs(back);
        const auto xd1 = xs(back + 1);
        if (back + 1 <= lag) {
            xi.value_at(-sys.delta() + (static_cast<double>(back) + 0.5) * h, mid);
        } else {
            // cubic Hermite midpoint on a computed interval
            const auto fa = fs(back);
            const auto fb = fs(back + 1);
            for (std::size_t i = 0; i < n; ++i) mid[i] = 0.5 * (xd0[i] + xd1[i]) + h * (fa[i] - fb[i]) / 8.0;
        }

        rhs(xc, xd0, k1);
        std::copy(k1.begin(), k1.end(), fs(cur).begin());
        for (std::size_t i = 0; i < n; ++i) tmp[i] = xc[i] + 0.5 * h * k1[i];
        rhs(tmp, mid, k2);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = xc[i] + 0.5 * h * k2[i];
        rhs(tmp, mid, k3);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = xc[i] + h * k3[i];
        rhs(tmp, xd1, k4);

        const auto xn = xs(cur + 1);
        for (std::size_t i = 0; i < n; ++i) {
            xn[i] = xc[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            if (!std::isfinite(xn[i]))
                throw Error(ErrorCode::integration_divergence,
                            "state became non-finite at t=" + time_label(static_cast<double>(step + 1) * h));
        }
        if (!domain.contains(xn)) {
            throw Error(ErrorCode::state_escape,
                        "trajectory left the embedding box at t=" + time_label(static_cast<double>(step + 1) * h));
        }
    }
    rhs(xs(points - 1), xs(total), fs(points - 1));

    // x_tau: history over [tau - delta, tau] on the grid of xi
    const std::size_t count = xi.count();
    std::vector<double> samples(count * n), left(count * n), right(count * n);
    for (std::size_t m = 0; m < count; ++m) {
        const std::size_t j = total + m * substeps;
        std::copy_n(x.begin() + static_cast<std::ptrdiff_t>(j * n), n, samples.begin() + static_cast<std::ptrdiff_t>(m * n));
        for (std::size_t i = 0; i < n; ++i) {
            double l = nan, r = nan;
            if (j > lag) {
                l = r = f[j * n + i];
            } else {
                const std::size_t src = j / substeps;
                if (xi.has_slopes()) {
                    l = xi.left_slope(src)[i];
                    r = xi.right_slope(src)[i];
                }
                if (j == lag) r = f[j * n + i];
            }
            left[m * n + i] = l;
            right[m * n + i] = r;
        }
    }

    DenseTrajectory traj;
    traj.step = h;
    traj.dim = n;
    traj.values.assign(x.begin() + static_cast<std::ptrdiff_t>(lag * n), x.end());
    return StepResult{StateFunction(xi.delta(), n, std::move(samples), std::move(left), std::move(right)),
                      std::move(traj)};
}

std::vector<StateFunction> trajectory(const TimeDelaySystem& sys, const StateFunction& xi0,
                                      const PiecewiseConstantInput& input, std::size_t steps, std::size_t substeps) {
    if (input.segments() < steps)
        throw Error(ErrorCode::shape_error, "input has fewer segments than requested steps");
    check_input_delay(sys, input.segment_length());
    std::vector<StateFunction> out;
    out.reserve(steps + 1);
    out.push_back(xi0);
    for (std::size_t k = 0; k < steps; ++k) {
        try {
            out.push_back(integrate_step(sys, out.back(), input.values()[k], input.segment_length(), substeps).end);
        } catch (const Error& e) {
            throw Error(e.code(), "segment " + std::to_string(k) + ": " + e.detail());
        }
    }
    return out;
}

}  // namespace tdsym
