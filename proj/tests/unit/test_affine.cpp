#include "alm/affine.hpp"
#include "alm/errors.hpp"

#include "../oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace {

using alm::AffineModelSpec;
using alm::Matrix;
using alm::Vector;

Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double a : v) out[i++] = a;
    return out;
}

AffineModelSpec three_factor() {
    return AffineModelSpec::independent_cir({{0.8, 1.0, 0.6}, {0.4, 1.0, 0.4}, {0.2, 1.0, 0.25}}, 10.0);
}

TEST(Riccati, MatchesClosedFormForRandomSquareRootFactors) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int p = 0; p < 30; ++p) {
        const oracle::Cir c{0.05 + 2.0 * U(rng), 0.1 + 2.0 * U(rng), 0.05 + 1.0 * U(rng)};
        const auto spec = AffineModelSpec::independent_cir({{c.speed, c.level, c.vol}}, 20.0);
        for (int j = 0; j < 10; ++j) {
            const double t = 0.01 + 15.0 * U(rng);
            const double u = -4.0 + (0.9 * oracle::cir_explosion(c, t) + 4.0) * U(rng);
            const auto s = alm::solve_riccati(spec, t, vec({u}));
            EXPECT_NEAR(s.phi, oracle::cir_phi(c, t, u), 1e-8);
            EXPECT_NEAR(s.psi[0], oracle::cir_psi(c, t, u), 1e-8);
        }
    }
}

TEST(Riccati, ZeroLagIsIdentity) {
    const auto s = alm::solve_riccati(three_factor(), 0.0, vec({0.3, -0.2, 0.1}));
    EXPECT_EQ(s.phi, 0.0);
    EXPECT_EQ(s.psi, vec({0.3, -0.2, 0.1}));
}

TEST(Riccati, SemiFlowHoldsOnRandomTriples) {
    const auto spec = three_factor();
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int n = 0; n < 40; ++n) {
        const double t = 4.0 * U(rng), s = 4.0 * U(rng);
        const Vector u = vec({2 * U(rng) - 1, 2 * U(rng) - 1, 2 * U(rng) - 1});
        const auto a = alm::solve_riccati(spec, t + s, u);
        const auto b = alm::solve_riccati(spec, t, u);
        const auto c = alm::solve_riccati(spec, s, b.psi);
        EXPECT_NEAR(a.phi, b.phi + c.phi, 1e-9);
        EXPECT_LT((a.psi - c.psi).cwiseAbs().maxCoeff(), 1e-9);
    }
}

TEST(Riccati, GradientsMatchFiniteDifferences) {
    const auto spec = three_factor();
    const Vector u = vec({0.4, 0.2, -0.3});
    const double t = 3.0, h = 1e-6;
    const auto s = alm::solve_riccati(spec, t, u);
    for (int j = 0; j < 3; ++j) {
        Vector up = u, dn = u;
        up[j] += h;
        dn[j] -= h;
        const auto a = alm::solve_riccati(spec, t, up, {.gradients = false});
        const auto b = alm::solve_riccati(spec, t, dn, {.gradients = false});
        EXPECT_NEAR(s.grad_phi[j], (a.phi - b.phi) / (2 * h), 1e-6);
        for (int i = 0; i < 3; ++i) EXPECT_NEAR(s.jac_psi(i, j), (a.psi[i] - b.psi[i]) / (2 * h), 1e-6);
    }
}

TEST(Riccati, FlowIsOrderPreserving) {
    const auto spec = three_factor();
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int n = 0; n < 50; ++n) {
        const Vector u = vec({U(rng), U(rng), U(rng)});
        const Vector w = u + vec({0.5 * (U(rng) + 1), 0.5 * (U(rng) + 1), 0.5 * (U(rng) + 1)});
        const auto a = alm::solve_riccati(spec, 2.0, u);
        const auto b = alm::solve_riccati(spec, 2.0, w);
        EXPECT_LE(a.phi, b.phi);
        EXPECT_TRUE((a.psi.array() <= b.psi.array()).all());
    }
}

TEST(Riccati, PathMatchesSeparateSolves) {
    const auto spec = three_factor();
    const Vector u = vec({0.2, 0.1, 0.05});
    const std::vector<double> lags = {0.0, 0.5, 2.0, 2.0, 7.5};
    const auto path = alm::solve_riccati_path(spec, lags, u);
    ASSERT_EQ(path.size(), lags.size());
    for (std::size_t i = 0; i < lags.size(); ++i) {
        const auto s = alm::solve_riccati(spec, lags[i], u);
        EXPECT_NEAR(path[i].phi, s.phi, 1e-9);
        EXPECT_LT((path[i].psi - s.psi).cwiseAbs().maxCoeff(), 1e-9);
    }
}

TEST(Riccati, BlowUpRaisesDomainError) {
    const oracle::Cir c{0.5, 1.0, 0.5};
    const auto spec = AffineModelSpec::independent_cir({{c.speed, c.level, c.vol}}, 10.0);
    const double t = 2.0;
    const double u = 1.2 * oracle::cir_explosion(c, t);
    try {
        alm::solve_riccati(spec, t, vec({u}));
        FAIL() << "expected DomainError";
    } catch (const alm::DomainError& e) {
        // psi reaches infinity where 1 - k u (1 - e^{-speed s}) vanishes.
        const double k = c.vol * c.vol / (2 * c.speed);
        const double exact = -std::log(1.0 - 1.0 / (k * u)) / c.speed;
        EXPECT_GT(e.blowup_time(), 0.0);
        EXPECT_LE(e.blowup_time(), t);
        EXPECT_NEAR(e.blowup_time(), exact, 1e-3);
    }
}

TEST(Riccati, RejectsBadArguments) {
    const auto spec = three_factor();
    EXPECT_THROW(alm::solve_riccati(spec, 1.0, vec({0.1, 0.2})), alm::ArgumentError);
    EXPECT_THROW(alm::solve_riccati(spec, -1.0, vec({0.1, 0.2, 0.3})), alm::ArgumentError);
    EXPECT_THROW(alm::solve_riccati(spec, 1.0, vec({NAN, 0.2, 0.3})), alm::ArgumentError);
    const std::vector<double> lags = {1.0, 0.5};
    EXPECT_THROW(alm::solve_riccati_path(spec, lags, vec({0.1, 0.2, 0.3})), alm::ArgumentError);
}

TEST(Mgf, MatchesMeanThroughDerivative) {
    const oracle::Cir c{0.7, 0.9, 0.4};
    const auto spec = AffineModelSpec::independent_cir({{c.speed, c.level, c.vol}}, 10.0);
    const double t = 1.5, x = 1.3;
    double h = 1e-3;
    const double d = (std::log(alm::mgf(spec, t, vec({h}), vec({x}))) -
                      std::log(alm::mgf(spec, t, vec({-h}), vec({x})))) / (2 * h);
    EXPECT_NEAR(d, oracle::cir_mean(c, t, x), 1e-6);
    h = 1e-2;
    const double v = (std::log(alm::mgf(spec, t, vec({h}), vec({x}))) + std::log(alm::mgf(spec, t, vec({-h}), vec({x})))) /
                     (h * h);
    EXPECT_NEAR(v, oracle::cir_variance(c, t, x), 1e-4);
}

TEST(MomentDomain, AxisBoundsMatchExplosionThreshold) {
    const auto spec = three_factor();
    const auto dom = alm::moment_domain(spec, 10.0, 1e-8);
    const auto& comps = spec.cir_components();
    for (int i = 0; i < 3; ++i) {
        const oracle::Cir c{comps[i].speed, comps[i].level, comps[i].vol};
        EXPECT_NEAR(dom.upper[i], oracle::cir_explosion(c, 10.0), 1e-5);
    }
    EXPECT_TRUE(dom.contains(vec({0.0, 0.0, 0.0})));
    EXPECT_TRUE(dom.contains(0.9 * dom.upper));
    EXPECT_FALSE(dom.contains(vec({1.1 * dom.upper[0], 0.0, 0.0})));
}

TEST(Admissibility, RejectsInvalidParameters) {
    EXPECT_THROW(AffineModelSpec::independent_cir({}, 10.0), alm::ArgumentError);
    EXPECT_THROW(AffineModelSpec::independent_cir({{-0.1, 1.0, 0.3}}, 10.0), alm::ArgumentError);
    EXPECT_THROW(AffineModelSpec::independent_cir({{0.1, -1.0, 0.3}}, 10.0), alm::ArgumentError);
    EXPECT_THROW(AffineModelSpec::independent_cir({{0.1, 1.0, 0.3}}, 0.0), alm::ArgumentError);

    Matrix beta = Matrix::Identity(2, 2) * -0.5;
    std::vector<Matrix> alpha(2, Matrix::Zero(2, 2));
    alpha[0](0, 0) = 0.1;
    alpha[1](1, 1) = 0.1;
    EXPECT_NO_THROW(AffineModelSpec::from_admissible(vec({0.1, 0.1}), beta, alpha, 5.0));
    EXPECT_THROW(AffineModelSpec::from_admissible(vec({-0.1, 0.1}), beta, alpha, 5.0), alm::ArgumentError);
    Matrix bad_beta = beta;
    bad_beta(0, 1) = -0.2;
    EXPECT_THROW(AffineModelSpec::from_admissible(vec({0.1, 0.1}), bad_beta, alpha, 5.0), alm::ArgumentError);
    auto bad_alpha = alpha;
    bad_alpha[0](0, 1) = bad_alpha[0](1, 0) = 0.05;
    EXPECT_THROW(AffineModelSpec::from_admissible(vec({0.1, 0.1}), beta, bad_alpha, 5.0), alm::ArgumentError);
}

TEST(Admissibility, CoupledDriftIsNotIndependent) {
    Matrix beta = Matrix::Identity(2, 2) * -0.5;
    beta(1, 0) = 0.2;
    std::vector<Matrix> alpha(2, Matrix::Zero(2, 2));
    alpha[0](0, 0) = 0.1;
    alpha[1](1, 1) = 0.1;
    const auto spec = AffineModelSpec::from_admissible(vec({0.1, 0.1}), beta, alpha, 5.0);
    EXPECT_FALSE(spec.independent_components());
    EXPECT_THROW(spec.cir_components(), alm::UnsupportedError);
    EXPECT_TRUE(AffineModelSpec::independent_cir({{0.1, 1.0, 0.3}}, 1.0).independent_components());
}

TEST(Characteristics, JacobianMatchesFiniteDifferences) {
    const auto spec = three_factor();
    const Vector u = vec({0.3, -0.4, 0.7});
    const Matrix J = alm::characteristics_jacobian(spec, u);
    const double h = 1e-6;
    for (int k = 0; k < 3; ++k) {
        Vector up = u, dn = u;
        up[k] += h;
        dn[k] -= h;
        const Vector d = (alm::functional_characteristics(spec, up).R - alm::functional_characteristics(spec, dn).R) / (2 * h);
        for (int i = 0; i < 3; ++i) EXPECT_NEAR(J(i, k), d[i], 1e-8);
    }
}

TEST(Inhomogeneous, HomogeneousCharacteristicsReproduceTheFlow) {
    const auto spec = three_factor();
    const alm::HomogeneousCharacteristics chars(spec);
    const Vector u = vec({0.2, -0.1, 0.3});
    const auto a = alm::solve_riccati_inhomogeneous(chars, 1.0, 4.0, u);
    const auto b = alm::solve_riccati(spec, 3.0, u);
    EXPECT_NEAR(a.phi, b.phi, 1e-9);
    EXPECT_LT((a.psi - b.psi).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Extended, MatchesJointMgfOracle) {
    const std::vector<alm::CirComponent> comps = {{0.8, 1.0, 0.6}, {0.3, 0.5, 0.2}};
    const auto spec = AffineModelSpec::independent_cir(comps, 5.0);
    const Vector w = vec({0.7, 1.3});
    const auto ext = alm::extended_characteristics(spec, alm::PiecewiseConstantWeight::constant(5.0, w));
    const Vector uX = vec({0.3, -0.5}), uY = vec({-0.6, 0.1});
    const double T = 4.0;
    Vector u(4);
    u << uX, uY;
    const auto flow = alm::solve_riccati_inhomogeneous(ext, 0.0, T, u);
    const Vector x0 = spec.initial_state();
    double expected = 0.0;
    for (int i = 0; i < 2; ++i) {
        const oracle::Cir c{comps[i].speed, comps[i].level, comps[i].vol};
        expected += oracle::cir_joint_log_mgf(c, T, uX[i], w[i] * uY[i], x0[i]);
    }
    EXPECT_NEAR(flow.phi + flow.psi.head(2).dot(x0), expected, 1e-8);
    // The Y-part of psi is carried unchanged.
    EXPECT_LT((flow.psi.tail(2) - uY).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Extended, PiecewiseWeightComposesFromPieces) {
    const std::vector<alm::CirComponent> comps = {{0.5, 1.0, 0.4}};
    const auto spec = AffineModelSpec::independent_cir(comps, 4.0);
    const alm::PiecewiseConstantWeight theta({0.0, 1.5, 4.0}, {vec({0.2}), vec({1.0})});
    const auto ext = alm::extended_characteristics(spec, theta);
    const Vector u = vec({0.1, -0.4});
    const auto whole = alm::solve_riccati_inhomogeneous(ext, 0.0, 4.0, u);
    const auto late = alm::solve_riccati_inhomogeneous(ext, 1.5, 4.0, u);
    const auto early = alm::solve_riccati_inhomogeneous(ext, 0.0, 1.5, late.psi);
    EXPECT_NEAR(whole.phi, late.phi + early.phi, 1e-9);
    EXPECT_LT((whole.psi - early.psi).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Extended, RejectsBadWeights) {
    EXPECT_THROW(alm::PiecewiseConstantWeight({0.0, 1.0}, {vec({-0.1})}), alm::ArgumentError);
    EXPECT_THROW(alm::PiecewiseConstantWeight({0.0, 0.0}, {vec({0.1})}), alm::ArgumentError);
    EXPECT_THROW(alm::PiecewiseConstantWeight({0.0, 1.0, 2.0}, {vec({0.1})}), alm::ArgumentError);
    const auto spec = three_factor();
    EXPECT_THROW(alm::extended_characteristics(spec, alm::PiecewiseConstantWeight::constant(1.0, vec({1.0}))),
                 alm::ArgumentError);
}

}  // namespace
