#include "alm/errors.hpp"
#include "alm/term_structure.hpp"

#include "../fixture.hpp"

#include <gtest/gtest.h>

#include <random>

namespace {

using alm::InterpolatorKind;
using alm::Vector;

const InterpolatorKind kKinds[] = {InterpolatorKind::IF1, InterpolatorKind::IF2, InterpolatorKind::IF3};

Vector random_state(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> U(0.0, 3.0);
    Vector x(3);
    x << U(rng), U(rng), U(rng);
    return x;
}

TEST(ContinuousTenor, InitialBondsMatchTheDiscountCurve) {
    const auto& f = fixture::synthetic();
    for (auto kind : kKinds) {
        const auto m = f.continuous(kind);
        for (int l = 0; l <= f.tenors.intervals(); ++l)
            EXPECT_NEAR(m.bond_price(0.0, f.tenors.master_time(l), f.model.initial_state()) / f.scenario.initial.discount[l],
                        1.0, 1e-10);
    }
}

TEST(ContinuousTenor, BondAtItsMaturityIsOne) {
    const auto& f = fixture::synthetic();
    std::mt19937_64 rng(1);
    for (auto kind : kKinds) {
        const auto m = f.continuous(kind);
        for (int i = 0; i < 20; ++i) {
            const double t = std::uniform_real_distribution<double>(0.0, f.model.horizon())(rng);
            EXPECT_NEAR(m.bond_price(t, t, random_state(rng)), 1.0, 1e-14);
        }
    }
}

TEST(ContinuousTenor, BondCoefficientsAgreeWithPrices) {
    const auto& f = fixture::synthetic();
    const auto m = f.continuous(InterpolatorKind::IF3);
    std::mt19937_64 rng(2);
    const Vector x = random_state(rng);
    const auto c = m.bond_coefficients(1.3, 6.1);
    EXPECT_NEAR(std::exp(c.alpha + c.beta.dot(x)), m.bond_price(1.3, 6.1, x), 1e-14);
}

TEST(ContinuousTenor, InitialForwardCurveOfIf1IsTheInput) {
    const auto& f = fixture::synthetic();
    const auto m = f.continuous(InterpolatorKind::IF1);
    for (int i = 0; i <= 100; ++i) {
        const double T = f.model.horizon() * i / 100.0;
        EXPECT_NEAR(m.forward_rate(0.0, T, f.model.initial_state()), f.scenario.forward_curve->rate(T), 1e-8);
    }
}

TEST(ContinuousTenor, ShortRateIsBoundedBelowByP) {
    // q >= 0 componentwise, so r_t >= p(t) on the state space.
    const auto& f = fixture::synthetic();
    std::mt19937_64 rng(3);
    for (auto kind : kKinds) {
        const auto m = f.continuous(kind);
        for (int i = 0; i < 200; ++i) {
            const double t = std::uniform_real_distribution<double>(0.0, f.model.horizon())(rng);
            const auto c = m.short_rate_coefficients(t);
            EXPECT_TRUE((c.q.array() >= -1e-15).all());
            EXPECT_GE(c.p, -1e-15);
            EXPECT_GE(m.short_rate(t, random_state(rng)), c.p - 1e-15);
        }
    }
}

TEST(ContinuousTenor, LeftCoefficientsDifferOnlyAtKinks) {
    const auto& f = fixture::synthetic();
    const auto m = f.continuous(InterpolatorKind::IF2);
    const double T = f.tenors.master_time(12);
    const auto right = m.short_rate_coefficients(T);
    const auto left = m.left_short_rate_coefficients(T);
    const auto before = m.short_rate_coefficients(T - 1e-9);
    EXPECT_NEAR(left.p, before.p, 1e-8);
    EXPECT_LT((left.q - before.q).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_GT((left.q - right.q).cwiseAbs().maxCoeff(), 1e-8);
    const auto mid = m.left_short_rate_coefficients(T + 0.1);
    EXPECT_EQ(mid.q, m.short_rate_coefficients(T + 0.1).q);
}

TEST(ContinuousTenor, SpotDensityStartsAtOne) {
    const auto& f = fixture::synthetic();
    for (auto kind : kKinds) {
        const auto m = f.continuous(kind);
        EXPECT_NEAR(m.spot_density(0.0, f.model.initial_state(), 0.0), 1.0, 1e-12);
    }
}

TEST(ContinuousTenor, SpotCharacteristicsVanishAtZero) {
    const auto& f = fixture::synthetic();
    const auto m = f.continuous(InterpolatorKind::IF2);
    const auto c = m.spot_characteristics(2.0, Vector::Zero(3));
    EXPECT_NEAR(c.F, 0.0, 1e-15);
    EXPECT_LT(c.R.cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ContinuousTenor, ShortRateMgfAtZeroIsOne) {
    const auto& f = fixture::synthetic();
    const auto m = f.continuous(InterpolatorKind::IF3);
    EXPECT_NEAR(m.short_rate_mgf(1.0, 3.0, 0.0, f.model.initial_state()), 1.0, 1e-10);
    // Derivative in w gives the expected short rate under the spot measure; compare with a small simulation.
    const double h = 1e-4;
    const double mean = (std::log(m.short_rate_mgf(0.0, 3.0, h, f.model.initial_state())) -
                         std::log(m.short_rate_mgf(0.0, 3.0, -h, f.model.initial_state()))) / (2 * h);
    const auto grid = alm::uniform_grid(3.0, 60);
    const auto paths = alm::generate_spot_paths(m, grid, 20000, 4);
    double s = 0.0, ss = 0.0;
    for (std::size_t p = 0; p < paths.paths(); ++p) {
        s += paths.rate(60, p);
        ss += paths.rate(60, p) * paths.rate(60, p);
    }
    const double n = static_cast<double>(paths.paths());
    const double mc = s / n, se = std::sqrt((ss / n - mc * mc) / n);
    EXPECT_NEAR(mean, mc, 4 * se + 1e-4);
}

TEST(ContinuousTenor, RejectsBackwardRates) {
    const auto& f = fixture::synthetic();
    const auto m = f.continuous(InterpolatorKind::IF2);
    EXPECT_THROW(m.forward_rate_coefficients(3.0, 2.0), alm::ArgumentError);
    EXPECT_THROW(alm::generate_spot_paths(m, alm::uniform_grid(12.0, 10), 10, 1), alm::ArgumentError);
}

}  // namespace
