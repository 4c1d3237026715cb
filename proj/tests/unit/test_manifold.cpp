#include "alm/errors.hpp"
#include "alm/manifold.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace {

using alm::Manifold;
using alm::ManifoldSegment;
using alm::Vector;

alm::AffineModelSpec three_factor() {
    return alm::AffineModelSpec::independent_cir({{0.8, 1.0, 0.6}, {0.4, 1.0, 0.4}, {0.2, 1.0, 0.25}}, 10.0);
}

const std::vector<double> kLevels = {0.05, 0.08, 0.12, 0.15, 0.40};

TEST(Manifold, AnchoredLevelsAreHitAtSegmentEnds) {
    const auto spec = three_factor();
    const Manifold m = alm::anchored_manifold(spec, kLevels);
    ASSERT_EQ(m.segments().size(), kLevels.size());
    // The public parameter runs inward, so the outer end of segment i is segment_lo(i).
    for (std::size_t i = 0; i < m.segments().size(); ++i) {
        const double s = m.segment_lo(i);
        EXPECT_NEAR(alm::log_initial_martingale(spec, m.point(s)), kLevels[i], 1e-10);
    }
    EXPECT_LT(m.point(m.length()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Manifold, PointsAreComponentwiseNonIncreasing) {
    const Manifold m = alm::anchored_manifold(three_factor(), kLevels);
    Vector prev = m.point(0.0);
    for (int i = 1; i <= 2000; ++i) {
        const Vector p = m.point(m.length() * i / 2000.0);
        EXPECT_TRUE((p.array() <= prev.array() + 1e-15).all()) << "at step " << i;
        EXPECT_TRUE((p.array() >= -1e-15).all());
        prev = p;
    }
}

TEST(Manifold, TangentMatchesFiniteDifferences) {
    const Manifold m = alm::anchored_manifold(three_factor(), kLevels);
    const double h = 1e-7;
    for (int i = 1; i < 200; ++i) {
        const double s = m.length() * (i + 0.37) / 200.0;
        if (s + h > m.length()) break;
        const Vector fd = (m.point(s + h) - m.point(s - h)) / (2 * h);
        EXPECT_LT((fd - m.tangent(s)).cwiseAbs().maxCoeff(), 1e-6) << "s = " << s;
    }
}

TEST(Manifold, AnchoredManifoldIsSmooth) {
    const Manifold m = alm::anchored_manifold(three_factor(), kLevels);
    EXPECT_LT(m.max_joint_kink(), 1e-12);
    int arcs = 0;
    for (const auto& s : m.segments()) arcs += s.kind == ManifoldSegment::Kind::Arc;
    EXPECT_EQ(arcs, 2);
}

TEST(Manifold, CurvedOnlyOnArcs) {
    const Manifold m = alm::anchored_manifold(three_factor(), kLevels);
    for (std::size_t i = 0; i < m.segments().size(); ++i) {
        const double mid = 0.5 * (m.segment_lo(i) + m.segment_hi(i));
        EXPECT_EQ(m.curved_at(mid), m.segments()[i].kind == ManifoldSegment::Kind::Arc);
    }
}

TEST(Manifold, LineManifoldParameterIsArcLength) {
    const Manifold m(2, {ManifoldSegment::line(Vector::Unit(2, 1), 1.0), ManifoldSegment::line(Vector::Unit(2, 0), 2.0)},
                     false);
    EXPECT_DOUBLE_EQ(m.length(), 3.0);
    EXPECT_NEAR(m.point(0.0)[0], 2.0, 1e-15);
    EXPECT_NEAR(m.point(0.0)[1], 1.0, 1e-15);
    EXPECT_NEAR(m.point(2.5)[1], 0.5, 1e-15);
    EXPECT_GT(m.max_joint_kink(), 1.5);
}

TEST(Manifold, RejectsKinkWhenSmoothnessRequired) {
    EXPECT_THROW(Manifold(2, {ManifoldSegment::line(Vector::Unit(2, 1), 1.0), ManifoldSegment::line(Vector::Unit(2, 0), 1.0)}),
                 alm::ArgumentError);
    Vector neg(2);
    neg << -1.0, 0.0;
    EXPECT_THROW(Manifold(2, {ManifoldSegment::line(neg, 1.0)}, false), alm::ArgumentError);
    const std::vector<double> bad = {0.05, 0.04, 0.12, 0.15, 0.4};
    EXPECT_THROW(alm::anchored_manifold(three_factor(), bad), alm::ArgumentError);
    const std::vector<double> short_levels = {0.05, 0.08};
    EXPECT_THROW(alm::anchored_manifold(three_factor(), short_levels), alm::ArgumentError);
}

}  // namespace
