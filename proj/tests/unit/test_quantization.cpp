#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "tdsym/abstraction.hpp"
#include "tdsym/error.hpp"
#include "tdsym/quantization.hpp"

namespace tdsym {
namespace {

TEST(Lattice, OneDimensionalEnumeration) {
    const auto pts = lattice_points(Box({-1.0}, {1.0}), 0.5);
    ASSERT_EQ(pts.size(), 5u);
    const double expected[] = {-1.0, -0.5, 0.0, 0.5, 1.0};
    for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(pts[i][0], expected[i]);
}

TEST(Lattice, SquareGrid) {
    const auto pts = lattice_points(Box({-1.0, -1.0}, {1.0, 1.0}), 1.0);
    ASSERT_EQ(pts.size(), 9u);
    EXPECT_EQ(pts[0], (Vector{-1.0, -1.0}));
    EXPECT_EQ(pts[1], (Vector{-1.0, 0.0}));
    EXPECT_EQ(pts[8], (Vector{1.0, 1.0}));
}

TEST(Lattice, EmptyWhenNoMultipleInside) {
    const Lattice l(Box({0.3}, {0.4}), 1.0);
    EXPECT_TRUE(l.empty());
    EXPECT_EQ(l.size(), 0);
    EXPECT_TRUE(l.points().empty());
}

TEST(Lattice, AnchoredAtOrigin) {
    for (const auto& p : lattice_points(Box({-0.33}, {0.71}), 0.2)) {
        const double k = p[0] / 0.2;
        EXPECT_NEAR(k, std::round(k), 1e-12);
    }
    EXPECT_EQ(lattice_points(Box({-0.33}, {0.71}), 0.2).size(), 5u);  // -0.2 .. 0.6
}

TEST(Lattice, NearestIndexTiesDownAndClamps) {
    const Lattice l(Box({-1.0}, {1.0}), 0.5);
    bool clamped = false;
    EXPECT_EQ(l.nearest_index(0, 0.25, clamped), 0);
    EXPECT_FALSE(clamped);
    EXPECT_EQ(l.nearest_index(0, -0.25, clamped), -1);
    EXPECT_EQ(l.nearest_index(0, 0.26, clamped), 1);
    EXPECT_EQ(l.nearest_index(0, 1.4, clamped), 2);
    EXPECT_TRUE(clamped);
}

TEST(Lattice, CoveringRadiusSeesUnalignedEdges) {
    EXPECT_DOUBLE_EQ(Lattice(Box({-1.0}, {1.0}), 0.5).covering_radius(), 0.25);
    // points -0.9 .. 0.9: the box edges are 0.1 away, inner gaps 0.1125
    EXPECT_NEAR(Lattice(Box({-1.0}, {1.0}), 0.225).covering_radius(), 0.1125, 1e-15);
    EXPECT_NEAR(Lattice(Box({-1.0}, {1.0}), 0.8).covering_radius(), 0.4, 1e-15);
    EXPECT_NEAR(Lattice(Box({-1.0}, {1.0}), 1.5).covering_radius(), 1.0, 1e-15);
}

TEST(SplineBasis, PartitionOfUnityAtNodes) {
    const SplineBasis b(3, -0.1, 0.0);
    EXPECT_NEAR(b.h(), 0.025, 1e-17);
    EXPECT_EQ(b.node(4), 0.0);
    for (std::size_t i = 0; i < b.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) EXPECT_EQ(b.hat(i, b.node(j)), i == j ? 1.0 : 0.0);
    for (double t = -0.1; t <= 0.0; t += 0.0037) {
        double sum = 0.0;
        for (std::size_t i = 0; i < b.size(); ++i) sum += b.hat(i, t);
        EXPECT_NEAR(sum, 1.0, 1e-14);
    }
}

TEST(LambdaBound, DirectEvaluation) {
    EXPECT_NEAR(lambda_bound(3, 0.01, 8.0, 1.0), 0.1125, 1e-15);
    // with N = 0 and theta = lambda / 2, one Lambda share alone is already lambda
    const double lambda = 0.2;
    const double M = 8.0 * (lambda / 2.0);  // h = 1, so h^2 M / 8 = lambda / 2
    EXPECT_NEAR(lambda_bound(0, lambda / 2.0, M, 1.0), 1.5 * lambda, 1e-15);
    EXPECT_GT(lambda_bound(0, lambda / 2.0, M, 1.0), lambda);
}

TEST(LambdaBound, MonotoneInEachArgument) {
    double prev = 1e9;
    for (std::size_t n = 0; n < 8; ++n) {
        const double v = lambda_bound(n, 1e-12, 2.0, 1.0);
        EXPECT_LT(v, prev);
        prev = v;
    }
    EXPECT_LT(lambda_bound(2, 0.001, 2.0, 1.0), lambda_bound(2, 0.01, 2.0, 1.0));
}

TEST(ChooseResolution, SmallestNodeCount) {
    const auto r = choose_resolution(0.075, 16.6667, 0.1);
    EXPECT_EQ(r.interior_nodes, 0u);
    EXPECT_NEAR(r.theta, 0.01875, 1e-15);
    const auto r2 = choose_resolution(0.075, 32.04, 0.1);
    EXPECT_EQ(r2.interior_nodes, 1u);
    EXPECT_NEAR(r2.theta, 0.0125, 1e-15);
    for (double lambda : {0.01, 0.05, 0.3}) {
        const auto q = choose_resolution(lambda, 40.0, 1.0);
        const double h = 1.0 / static_cast<double>(q.interior_nodes + 1);
        EXPECT_LE(h * h * 40.0 / 8.0, lambda / 2.0);
        if (q.interior_nodes > 0) {
            const double hp = 1.0 / static_cast<double>(q.interior_nodes);
            EXPECT_GT(hp * hp * 40.0 / 8.0, lambda / 2.0);
        }
        EXPECT_LE(lambda_bound(q.interior_nodes, q.theta, 40.0, 1.0), lambda * (1 + 1e-12));
    }
}

StateFunction parabola(std::size_t count) {
    return StateFunction::sample(1.0, count, 1, [](double t) { return Vector{t * t}; });
}

TEST(Quantize, ZeroFunctionGivesZeroIndices) {
    const SplineQuantizer q(Box({-1.0}, {1.0}), 0.1, 2, 0.05);
    const auto r = q.quantize(StateFunction::constant(0.1, 31, Vector{0.0}));
    EXPECT_EQ(r.state.indices, (std::vector<std::int64_t>{0, 0, 0, 0}));
    EXPECT_EQ(r.clamped_nodes, 0u);
}

TEST(Quantize, ParabolaInterpolationErrorIsSharp) {
    // N = 1 on [-1, 0]: h = 0.5 and the error h^2 / 4 = 0.0625 sits at the midpoints;
    // a tiny theta leaves only the interpolation part
    const double theta = 1e-13;
    const SplineQuantizer q(Box({-2.0}, {2.0}), 1.0, 1, theta);
    const auto y = parabola(4001);
    const auto s = q.quantize(y).state;
    const double gap = q.sup_gap(y, s, 1);
    EXPECT_NEAR(gap, 0.0625, 1e-9);
    EXPECT_NEAR(lambda_bound(1, 0.0, 2.0, 1.0), 0.0625, 1e-15);
}

TEST(Quantize, ParabolaWithinLambda) {
    const SplineQuantizer q(Box({-2.0}, {2.0}), 1.0, 3, 0.01);
    const auto y = parabola(4001);
    const double gap = q.sup_gap(y, q.quantize(y).state, 1);
    EXPECT_LE(gap, 0.065625 + 1e-12);
    EXPECT_NEAR(lambda_bound(3, 0.01, 2.0, 1.0), 0.065625, 1e-15);
}

TEST(Quantize, NodeRoundingErrorAtMostTheta) {
    const double theta = 0.035;
    const SplineQuantizer q(Box({-1.0, -2.0}, {1.0, 2.0}), 0.1, 2, theta);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-0.9, 0.9);
    for (int k = 0; k < 500; ++k) {
        std::vector<double> nodes(8);
        for (auto& v : nodes) v = u(rng);
        const auto s = q.quantize_nodes(nodes).state;
        const auto back = q.node_values(s);
        for (std::size_t i = 0; i < nodes.size(); ++i) EXPECT_LE(std::abs(back[i] - nodes[i]), theta * (1 + 1e-12));
    }
}

TEST(Quantize, TiesGoToTheSmallerIndex) {
    // spacing 0.125: both samples are exact midpoints
    const SplineQuantizer q(Box({-1.0}, {1.0}), 0.1, 0, 0.0625);
    const auto s = q.quantize_nodes(std::vector<double>{0.0625, -0.1875}).state;
    EXPECT_EQ(s.indices, (std::vector<std::int64_t>{0, -2}));
}

TEST(Quantize, ClampsOutsideTheBox) {
    const SplineQuantizer q(Box({-1.0}, {1.0}), 0.1, 0, 0.05);
    const auto r = q.quantize_nodes(std::vector<double>{1.3, -0.2});
    EXPECT_EQ(r.state.indices, (std::vector<std::int64_t>{10, -2}));
    EXPECT_EQ(r.clamped_nodes, 1u);
}

TEST(Quantize, Deterministic) {
    const SplineQuantizer q(Box({-1.0}, {1.0}), 0.1, 2, 0.013);
    const auto y = StateFunction::sample(0.1, 31, 1, [](double t) { return Vector{std::sin(40 * t)}; });
    EXPECT_EQ(q.quantize(y).state, q.quantize(y).state);
}

TEST(Quantize, RequiresNodesOnTheGrid) {
    const SplineQuantizer q(Box({-1.0}, {1.0}), 0.1, 2, 0.05);
    EXPECT_THROW(q.quantize(StateFunction::constant(0.1, 11, Vector{0.0})), Error);
}

TEST(Decode, IdentityOnZeroState) {
    const SplineQuantizer q(Box({-1.0}, {1.0}), 0.1, 2, 0.05);
    const auto z = q.decode(SymbolicState{{0, 0, 0, 0}}, 4);
    EXPECT_EQ(z.count(), 13u);
    for (double v : z.samples()) EXPECT_EQ(v, 0.0);
}

TEST(Decode, RoundTripIsIdempotent) {
    const SplineQuantizer q(Box({-1.0, -1.0}, {1.0, 1.0}), 0.2, 3, 0.025);
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<std::int64_t> idx(-20, 20);
    for (int k = 0; k < 1000; ++k) {
        SymbolicState s;
        for (int i = 0; i < 10; ++i) s.indices.push_back(idx(rng));
        const auto z = q.decode(s, 3);
        EXPECT_EQ(q.quantize(z).state, s);
        const auto nodes = q.node_values(s);
        for (std::size_t node = 0; node < 5; ++node)
            for (std::size_t axis = 0; axis < 2; ++axis)
                EXPECT_EQ(z.at(node * 3)[axis], static_cast<double>(s.indices[axis * 5 + node]) * 0.05);
        EXPECT_EQ(nodes[1], static_cast<double>(s.indices[5]) * 0.05);  // node 0, axis 1
    }
}

TEST(SupDistance, MetricProperties) {
    const SplineQuantizer q(Box({-1.0}, {1.0}), 0.1, 2, 0.05);
    std::mt19937_64 rng(23);
    std::uniform_int_distribution<std::int64_t> idx(-10, 10);
    auto draw = [&] {
        SymbolicState s;
        for (int i = 0; i < 4; ++i) s.indices.push_back(idx(rng));
        return s;
    };
    for (int k = 0; k < 300; ++k) {
        const auto a = draw(), b = draw(), c = draw();
        EXPECT_EQ(q.sup_distance(a, a), 0.0);
        EXPECT_EQ(q.sup_distance(a, b), q.sup_distance(b, a));
        EXPECT_LE(q.sup_distance(a, c), q.sup_distance(a, b) + q.sup_distance(b, c) + 1e-15);
        // nodes are the breakpoints, so dense evaluation agrees
        EXPECT_NEAR(q.sup_gap(q.decode(a, 10), b, 3), q.sup_distance(a, b), 1e-12);
    }
}

TEST(SupDistance, SingleIndexStep) {
    const SplineQuantizer q(Box({-1.0}, {1.0}), 0.1, 2, 0.05);
    EXPECT_NEAR(q.sup_distance(SymbolicState{{0, 3, 0, 1}}, SymbolicState{{0, 3, 1, 1}}), 0.1, 1e-15);
}

TEST(SupDistance, BasisMismatch) {
    const SplineQuantizer q(Box({-1.0}, {1.0}), 0.1, 2, 0.05);
    try {
        q.sup_distance(SymbolicState{{0, 0, 0}}, SymbolicState{{0, 0, 0, 0}});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::basis_error);
    }
}

TEST(OutputDistance, DifferentResolutionsUseBothNodeSets) {
    const Resolution coarse{0.1, 1, 0, 0.05};  // nodes -0.1, 0
    const Resolution fine{0.1, 1, 1, 0.05};    // nodes -0.1, -0.05, 0
    // coarse: line from 0 to 0; fine: a bump of 0.3 in the middle
    EXPECT_NEAR(output_distance(coarse, SymbolicState{{0, 0}}, fine, SymbolicState{{0, 3, 0}}), 0.3, 1e-15);
    EXPECT_NEAR(output_distance(fine, SymbolicState{{0, 3, 0}}, coarse, SymbolicState{{0, 0}}), 0.3, 1e-15);
    const Resolution other{0.2, 1, 0, 0.05};
    try {
        output_distance(coarse, SymbolicState{{0, 0}}, other, SymbolicState{{0, 0}});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::metric_error);
    }
}

TEST(InputLabels, Enumeration) {
    const auto l = input_labels(Box({-1.0}, {1.0}), 0.25);
    ASSERT_EQ(l.size(), 5u);
    EXPECT_EQ(l[0][0], -1.0);
    EXPECT_EQ(l[4][0], 1.0);
}

TEST(InputLabels, HugeQuantizationLeavesOnlyZero) {
    const auto l = input_labels(Box({-1.0}, {1.0}), 100.0);
    ASSERT_EQ(l.size(), 1u);
    EXPECT_EQ(l[0][0], 0.0);
}

TEST(InputLabels, DenseCovering) {
    for (double lambda : {0.25, 0.1125, 0.5}) {
        const Box box({-1.0}, {1.0});
        const auto labels = input_labels(box, lambda);
        const double radius = Lattice(box, 2.0 * lambda).covering_radius();
        double worst = 0.0;
        for (double u = -1.0; u <= 1.0; u += 1e-4) {
            double best = 1e9;
            for (const auto& l : labels) best = std::min(best, std::abs(u - l[0]));
            worst = std::max(worst, best);
        }
        EXPECT_LE(worst, lambda + 1e-12) << lambda;
        EXPECT_NEAR(worst, radius, 2e-4) << lambda;
    }
}

TEST(SymbolicState, CanonicalIdRoundTrip) {
    const SymbolicState s{{-3, 0, 12, 7}};
    EXPECT_EQ(canonical_id(s), "-3,0,12,7");
    EXPECT_EQ(parse_canonical_id("-3,0,12,7"), s);
    EXPECT_THROW(parse_canonical_id("1,,2"), Error);
    EXPECT_EQ(SymbolicStateHash{}(s), SymbolicStateHash{}(parse_canonical_id(canonical_id(s))));
}

TEST(StateCountBound, Examples) {
    // [-0.2, 0.2] with spacing 0.1 has 5 points
    EXPECT_EQ(state_count_bound(Box({-0.2}, {0.2}), 2, 0.05), 625);
    EXPECT_EQ(state_count_bound(Box({-0.01}, {0.01}), 0, 0.05), 1);
    EXPECT_EQ(state_count_bound(Box({-1.0}, {1.0}), 2, 0.05), 194481);
    EXPECT_GT(state_count_bound(Box({-1.0}, {1.0}), 3, 0.05), state_count_bound(Box({-1.0}, {1.0}), 2, 0.05));
    EXPECT_GT(state_count_bound(Box({-1.0}, {1.0}), 2, 0.025), state_count_bound(Box({-1.0}, {1.0}), 2, 0.05));
    const BigCount huge = state_count_bound(Box({-1.0, -1.0}, {1.0, 1.0}), 30, 0.001);
    EXPECT_GT(huge, BigCount(std::numeric_limits<std::uint64_t>::max()));
}

}  // namespace
}  // namespace tdsym
