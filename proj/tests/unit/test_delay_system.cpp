#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "tdsym/certificates.hpp"
#include "tdsym/error.hpp"

namespace tdsym {
namespace {

using testing::linear_system;
using testing::scalar;
using testing::ScalarDdeSolution;

TimeDelaySystem tanh_system() {
    auto rhs = std::make_shared<TanhDelayRhs>(scalar(-2.0), scalar(0.5), scalar(1.0));
    return TimeDelaySystem(0.1, 0.0, rhs, Box({-3.0}, {3.0}), Box({-1.0}, {1.0}), 2.5);
}

double max_error(const TimeDelaySystem& sys, std::size_t count, double tau, const ScalarDdeSolution& exact) {
    const StateFunction xi = StateFunction::constant(sys.delta(), count, Vector{1.0});
    const StepResult r = integrate_step(sys, xi, Vector{0.0}, tau);
    double err = 0.0;
    for (std::size_t k = 0; k < r.trajectory.points(); ++k)
        err = std::max(err, std::abs(r.trajectory.at(k)[0] - exact(static_cast<double>(k) * r.trajectory.step)));
    return err;
}

TEST(EvaluateRhs, ZeroAtOrigin) {
    const auto sys = tanh_system();
    const auto x = StateFunction::constant(0.1, 11, Vector{0.0});
    EXPECT_EQ(sys.evaluate_rhs(x, Vector{0.0})[0], 0.0);
}

TEST(EvaluateRhs, TanhConstantHistory) {
    const auto sys = tanh_system();
    const auto x = StateFunction::constant(0.1, 11, Vector{1.0});
    EXPECT_NEAR(sys.evaluate_rhs(x, Vector{0.0})[0], -2.0 + 0.5 * std::tanh(1.0), 1e-15);
    EXPECT_NEAR(sys.evaluate_rhs(x, Vector{0.0})[0], -1.619203, 1e-6);
}

TEST(EvaluateRhs, LinearConstantHistory) {
    const auto sys = linear_system();
    for (double c : {-0.7, 0.3, 1.0}) {
        const auto x = StateFunction::constant(0.1, 11, Vector{c});
        EXPECT_NEAR(sys.evaluate_rhs(x, Vector{0.0})[0], (-2.0 + 0.5) * c, 1e-15);
    }
}

TEST(EvaluateRhs, ReadsNewestAndOldestSample) {
    const auto sys = linear_system();
    const auto x = StateFunction::sample(0.1, 11, 1, [](double s) { return Vector{10.0 * s + 0.5}; });
    // x(0) = 0.5, x(-0.1) = -0.5
    EXPECT_NEAR(sys.evaluate_rhs(x, Vector{0.25})[0], -2.0 * 0.5 + 0.5 * -0.5 + 0.25, 1e-14);
}

TEST(EvaluateRhs, ShapeMismatch) {
    const auto sys = linear_system();
    const auto x = StateFunction::constant(0.1, 11, Vector{0.0, 0.0});
    EXPECT_THROW(sys.evaluate_rhs(x, Vector{0.0}), Error);
    try {
        sys.evaluate_rhs(StateFunction::constant(0.1, 11, Vector{0.0}), Vector{0.0, 1.0});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::shape_error);
    }
}

TEST(EvaluateRhs, NonFiniteResult) {
    // x(t)^3 overflows for huge samples
    std::vector<std::vector<PolynomialRhs::Term>> comps(1);
    comps[0].push_back({1.0, {3}, {0}, {0}});
    auto rhs = std::make_shared<PolynomialRhs>(1, 1, comps);
    const TimeDelaySystem sys(0.1, 0.0, rhs, Box({-1.0}, {1.0}), Box({-1.0}, {1.0}), 3.0);
    const auto x = StateFunction::constant(0.1, 11, Vector{1e200});
    try {
        sys.evaluate_rhs(x, Vector{0.0});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::rhs_evaluation_failure);
    }
}

TEST(TimeDelaySystem, RejectsInvalidConstruction) {
    auto rhs = std::make_shared<LinearDelayRhs>(scalar(-2.0), scalar(0.5), scalar(1.0));
    EXPECT_THROW(TimeDelaySystem(0.1, 0.0, rhs, Box({-1.0}, {1.0}), Box({0.5}, {1.0}), 2.5), Error);
    EXPECT_THROW(TimeDelaySystem(0.0, 0.0, rhs, Box({-1.0}, {1.0}), Box({-1.0}, {1.0}), 2.5), Error);
    std::vector<std::vector<PolynomialRhs::Term>> comps(1);
    comps[0].push_back({1.0, {0}, {0}, {0}});  // f(0, 0) = 1
    auto affine = std::make_shared<PolynomialRhs>(1, 1, comps);
    EXPECT_THROW(TimeDelaySystem(0.1, 0.0, affine, Box({-1.0}, {1.0}), Box({-1.0}, {1.0}), 2.5), Error);
}

TEST(IntegrateStep, FirstIntervalClosedForm) {
    const auto sys = linear_system();
    const StateFunction xi = StateFunction::constant(0.1, 101, Vector{1.0});
    const StepResult r = integrate_step(sys, xi, Vector{0.0}, 0.1);
    const double expected = std::exp(-0.2) + 0.25 * (1.0 - std::exp(-0.2));
    EXPECT_NEAR(r.trajectory.at(r.trajectory.points() - 1)[0], expected, 1e-12);
    EXPECT_NEAR(r.end.now()[0], 0.864, 5e-4);
}

TEST(IntegrateStep, OracleMatchesDirectFirstInterval) {
    const ScalarDdeSolution exact(2.0, 0.5, 0.1, 1.0, 5);
    for (double t : {0.0, 0.03, 0.1})
        EXPECT_NEAR(exact(t), std::exp(-2 * t) + 0.25 * (1.0 - std::exp(-2 * t)), 1e-14);
    // continuity at the breakpoints
    for (double t : {0.1, 0.2, 0.3}) EXPECT_NEAR(exact(t - 1e-12), exact(t + 1e-12), 1e-10);
}

TEST(IntegrateStep, ZeroSolution) {
    const auto sys = tanh_system();
    const auto xi = StateFunction::constant(0.1, 11, Vector{0.0});
    const StepResult r = integrate_step(sys, xi, Vector{0.0}, 0.3);
    for (double v : r.end.samples()) EXPECT_EQ(v, 0.0);
    for (double v : r.trajectory.values) EXPECT_EQ(v, 0.0);
}

TEST(IntegrateStep, ThreeIntervalsAgainstClosedForm) {
    const auto sys = linear_system();
    const ScalarDdeSolution exact(2.0, 0.5, 0.1, 1.0, 4);
    EXPECT_LE(max_error(sys, 101, 0.3, exact), 1e-8);
}

TEST(IntegrateStep, FourthOrderConvergence) {
    const auto sys = linear_system();
    const ScalarDdeSolution exact(2.0, 0.5, 0.1, 1.0, 4);
    double prev = 0.0;
    for (std::size_t count : {5, 9, 17, 33}) {
        const double err = max_error(sys, count, 0.3, exact);
        if (prev > 0.0) EXPECT_GE(std::log2(prev / err), 3.5) << "count " << count;
        prev = err;
    }
}

TEST(IntegrateStep, SplitIntegrationAgrees) {
    const auto sys = tanh_system();
    const auto xi = StateFunction::sample(0.1, 21, 1, [](double s) { return Vector{0.5 + 3.0 * s}; });
    const auto whole = integrate_step(sys, xi, Vector{0.4}, 0.4);
    const auto half = integrate_step(sys, xi, Vector{0.4}, 0.2);
    const auto rest = integrate_step(sys, half.end, Vector{0.4}, 0.2);
    EXPECT_LE(whole.end.sampled_distance(rest.end), 1e-10);
}

TEST(IntegrateStep, SubstepsRefineTheSameGrid) {
    const auto sys = linear_system();
    const ScalarDdeSolution exact(2.0, 0.5, 0.1, 1.0, 4);
    const auto xi = StateFunction::constant(0.1, 11, Vector{1.0});
    const auto coarse = integrate_step(sys, xi, Vector{0.0}, 0.3, 1);
    const auto fine = integrate_step(sys, xi, Vector{0.0}, 0.3, 4);
    EXPECT_EQ(fine.end.count(), 11u);
    EXPECT_EQ(fine.trajectory.points(), 121u);
    EXPECT_LT(std::abs(fine.end.now()[0] - exact(0.3)), std::abs(coarse.end.now()[0] - exact(0.3)));
}

TEST(IntegrateStep, StateEscape) {
    const auto sys = linear_system(2.0, 0.5, 0.1, 1.0, 1.0, 1.0);
    auto rhs = std::make_shared<LinearDelayRhs>(scalar(3.0), scalar(0.0), scalar(1.0));
    const TimeDelaySystem unstable(0.1, 0.0, rhs, Box({-1.0}, {1.0}), Box({-1.0}, {1.0}), 3.0, 1.0);
    const auto xi = StateFunction::constant(0.1, 11, Vector{0.9});
    try {
        integrate_step(unstable, xi, Vector{0.0}, 1.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::state_escape);
        EXPECT_NE(std::string(e.what()).find("t="), std::string::npos);
    }
    EXPECT_NO_THROW(integrate_step(sys, StateFunction::constant(0.1, 11, Vector{0.9}), Vector{1.0}, 1.0));
}

TEST(IntegrateStep, TauMustBeOnTheGrid) {
    const auto sys = linear_system();
    const auto xi = StateFunction::constant(0.1, 11, Vector{0.0});
    EXPECT_THROW(integrate_step(sys, xi, Vector{0.0}, 0.105), Error);
}

TEST(IntegrateStep, InputDelayMustAlign) {
    auto rhs = std::make_shared<LinearDelayRhs>(scalar(-2.0), scalar(0.5), scalar(1.0));
    const TimeDelaySystem sys(0.1, 0.3, rhs, Box({-1.0}, {1.0}), Box({-1.0}, {1.0}), 2.5);
    try {
        check_input_delay(sys, 0.2);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::input_delay_misaligned);
    }
    EXPECT_NO_THROW(check_input_delay(sys, 0.3));
    EXPECT_NO_THROW(check_input_delay(sys, 0.15));
}

TEST(Trajectory, ZeroStepsReturnsInitialState) {
    const auto sys = linear_system();
    const auto xi = StateFunction::constant(0.1, 11, Vector{0.4});
    const PiecewiseConstantInput input({Vector{0.0}}, 0.3, sys.input_box());
    const auto traj = trajectory(sys, xi, input, 0);
    ASSERT_EQ(traj.size(), 1u);
    EXPECT_EQ(traj[0], xi);
}

TEST(Trajectory, OneSegmentMatchesClosedForm) {
    const auto sys = linear_system();
    const ScalarDdeSolution exact(2.0, 0.5, 0.1, 1.0, 4);
    const auto xi = StateFunction::constant(0.1, 101, Vector{1.0});
    const PiecewiseConstantInput input({Vector{0.0}}, 0.3, sys.input_box());
    const auto traj = trajectory(sys, xi, input, 1);
    ASSERT_EQ(traj.size(), 2u);
    for (std::size_t j = 0; j < traj[1].count(); ++j)
        EXPECT_NEAR(traj[1].at(j)[0], exact(0.3 + traj[1].time(j)), 1e-8);
}

TEST(Trajectory, ZeroInitialConditionStaysZero) {
    const auto sys = tanh_system();
    const auto xi = StateFunction::constant(0.1, 11, Vector{0.0});
    const PiecewiseConstantInput input(std::vector<Vector>(5, Vector{0.0}), 0.3, sys.input_box());
    for (const auto& x : trajectory(sys, xi, input, 5))
        for (double v : x.samples()) EXPECT_EQ(v, 0.0);
}

TEST(Trajectory, FailingSegmentIsNamed) {
    auto rhs = std::make_shared<LinearDelayRhs>(scalar(3.0), scalar(0.0), scalar(1.0));
    const TimeDelaySystem unstable(0.1, 0.0, rhs, Box({-1.0}, {1.0}), Box({-1.0}, {1.0}), 3.0, 1.0);
    const auto xi = StateFunction::constant(0.1, 11, Vector{0.1});
    const PiecewiseConstantInput input(std::vector<Vector>(5, Vector{0.0}), 0.3, unstable.input_box());
    try {
        trajectory(unstable, xi, input, 5);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::state_escape);
        EXPECT_NE(std::string(e.what()).find("segment 2"), std::string::npos) << e.what();
    }
}

TEST(Trajectory, InputOutsideBoxRejected) {
    const auto sys = linear_system();
    EXPECT_THROW(PiecewiseConstantInput({Vector{1.5}}, 0.3, sys.input_box()), Error);
    EXPECT_THROW(PiecewiseConstantInput({Vector{0.5}}, 0.0, sys.input_box()), Error);
}

TEST(LipschitzSanity, RandomPairsRespectKappa) {
    const auto sys = tanh_system();
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ux(-3.0, 3.0), uu(-1.0, 1.0);
    for (int k = 0; k < 2000; ++k) {
        const Vector a{ux(rng)}, ad{ux(rng)}, au{uu(rng)};
        const Vector b{ux(rng)}, bd{ux(rng)}, bu{uu(rng)};
        Vector fa(1), fb(1);
        sys.rhs().eval(a, ad, au, fa);
        sys.rhs().eval(b, bd, bu, fb);
        const double dx = std::max(std::abs(a[0] - b[0]), std::abs(ad[0] - bd[0]));
        EXPECT_LE(std::abs(fa[0] - fb[0]), sys.kappa() * (dx + std::abs(au[0] - bu[0])) + 1e-12);
    }
}

}  // namespace
}  // namespace tdsym
