#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "tdsym/box.hpp"
#include "tdsym/state_function.hpp"

namespace tdsym {

/// Dense row-major matrix, enough for the built-in right-hand sides.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, std::vector<double> d);
    static Matrix zeros(std::size_t r, std::size_t c) { return Matrix(r, c, std::vector<double>(r * c, 0.0)); }

    double operator()(std::size_t i, std::size_t j) const noexcept { return data[i * cols + j]; }
    /// out += M * v
    void multiply_add(std::span<const double> v, std::span<double> out) const noexcept;
};

/// Right-hand side with a single discrete state delay:
/// dx/dt = F(x(t), x(t - delta), u).
class DelayRhs {
public:
    virtual ~DelayRhs() = default;
    virtual std::size_t state_dim() const noexcept = 0;
    virtual std::size_t input_dim() const noexcept = 0;
    virtual std::string name() const = 0;
    virtual void eval(std::span<const double> now, std::span<const double> delayed,
                      std::span<const double> u, std::span<double> out) const = 0;
};

/// dx/dt = A x(t) + Ad x(t - delta) + B u
class LinearDelayRhs final : public DelayRhs {
public:
    LinearDelayRhs(Matrix a, Matrix ad, Matrix b);
    std::size_t state_dim() const noexcept override { return m_a.rows; }
    std::size_t input_dim() const noexcept override { return m_b.cols; }
    std::string name() const override { return "linear-delay"; }
    void eval(std::span<const double> now, std::span<const double> delayed,
              std::span<const double> u, std::span<double> out) const override;

    const Matrix& a() const noexcept { return m_a; }
    const Matrix& ad() const noexcept { return m_ad; }
    const Matrix& b() const noexcept { return m_b; }

private:
    Matrix m_a, m_ad, m_b;
};

/// dx/dt = A x(t) + Ad tanh(x(t - delta)) + B u, tanh taken elementwise.
class TanhDelayRhs final : public DelayRhs {
public:
    TanhDelayRhs(Matrix a, Matrix ad, Matrix b);
    std::size_t state_dim() const noexcept override { return m_a.rows; }
    std::size_t input_dim() const noexcept override { return m_b.cols; }
    std::string name() const override { return "tanh-delay"; }
    void eval(std::span<const double> now, std::span<const double> delayed,
              std::span<const double> u, std::span<double> out) const override;

    const Matrix& a() const noexcept { return m_a; }
    const Matrix& ad() const noexcept { return m_ad; }
    const Matrix& b() const noexcept { return m_b; }

private:
    Matrix m_a, m_ad, m_b;
};

/// Each component is a sum of monomials in the variables
/// (x(t)_1..x(t)_n, x(t-delta)_1..x(t-delta)_n, u_1..u_m).
class PolynomialRhs final : public DelayRhs {
public:
    struct Term {
        double coefficient = 0.0;
        std::vector<unsigned> now_powers;
        std::vector<unsigned> delayed_powers;
        std::vector<unsigned> input_powers;
    };

    PolynomialRhs(std::size_t state_dim, std::size_t input_dim, std::vector<std::vector<Term>> components);
    std::size_t state_dim() const noexcept override { return m_n; }
    std::size_t input_dim() const noexcept override { return m_m; }
    std::string name() const override { return "polynomial"; }
    void eval(std::span<const double> now, std::span<const double> delayed,
              std::span<const double> u, std::span<double> out) const override;

private:
    std::size_t m_n;
    std::size_t m_m;
    std::vector<std::vector<Term>> m_components;
};

class TimeDelaySystem {
public:
    TimeDelaySystem(double delta, double input_delay, std::shared_ptr<const DelayRhs> rhs, Box state_box,
                    Box input_box, double kappa, double embedding_inflation = 1.25);

    double delta() const noexcept { return m_delta; }
    double input_delay() const noexcept { return m_input_delay; }
    std::size_t state_dim() const noexcept { return m_rhs->state_dim(); }
    std::size_t input_dim() const noexcept { return m_rhs->input_dim(); }
    const DelayRhs& rhs() const noexcept { return *m_rhs; }
    const std::shared_ptr<const DelayRhs>& rhs_ptr() const noexcept { return m_rhs; }
    const Box& state_box() const noexcept { return m_state_box; }
    const Box& input_box() const noexcept { return m_input_box; }
    double kappa() const noexcept { return m_kappa; }
    /// Integration domain; leaving it aborts the simulation.
    const Box& embedding_box() const noexcept { return m_embedding_box; }

    /// f(x_t, u) for a full history segment.
    Vector evaluate_rhs(const StateFunction& x, std::span<const double> u) const;

private:
    double m_delta;
    double m_input_delay;
    std::shared_ptr<const DelayRhs> m_rhs;
    Box m_state_box;
    Box m_input_box;
    double m_kappa;
    Box m_embedding_box;
};

/// Inputs held constant on consecutive segments of length tau.
class PiecewiseConstantInput {
public:
    PiecewiseConstantInput(std::vector<Vector> values, double segment_length, const Box& input_box);

    const std::vector<Vector>& values() const noexcept { return m_values; }
    double segment_length() const noexcept { return m_segment_length; }
    std::size_t segments() const noexcept { return m_values.size(); }

private:
    std::vector<Vector> m_values;
    double m_segment_length;
};

/// Dense solution on [0, tau] at the integration step.
struct DenseTrajectory {
    double step = 0.0;
    std::size_t dim = 0;
    std::vector<double> values;  // (points x dim), t = 0, step, ..., tau

    std::size_t points() const noexcept { return dim == 0 ? 0 : values.size() / dim; }
    std::span<const double> at(std::size_t k) const noexcept { return {values.data() + k * dim, dim}; }
};

struct StepResult {
    StateFunction end;  // x_tau, sampled on the grid of the initial history
    DenseTrajectory trajectory;
};

/// Integrates one segment of length tau with constant input u (classical RK4,
/// method of steps). The integration step is xi.grid_step() / substeps and
/// must divide tau.
StepResult integrate_step(const TimeDelaySystem& sys, const StateFunction& xi, std::span<const double> u,
                          double tau, std::size_t substeps = 1);

/// [x_0, x_tau, ..., x_{k tau}] under the first k segments of `input`.
std::vector<StateFunction> trajectory(const TimeDelaySystem& sys, const StateFunction& xi0,
                                      const PiecewiseConstantInput& input, std::size_t steps,
                                      std::size_t substeps = 1);

/// Number of grid steps in `tau`, or throws when tau is not a multiple of `step`.
std::size_t steps_in(double tau, double step);

/// The input delay only shifts whole segments; it must be 0 or a multiple of tau.
void check_input_delay(const TimeDelaySystem& sys, double tau);

}  // namespace tdsym
