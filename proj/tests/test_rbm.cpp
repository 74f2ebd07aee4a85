#include <cmath>

#include <gtest/gtest.h>

#include "annealnqs/error.hpp"
#include "annealnqs/rbm.hpp"
#include "oracles.hpp"

using namespace annealnqs;

namespace {

SpinConfig spins(std::initializer_list<int> v) {
    std::vector<SpinConfig::value_type> s(v.begin(), v.end());
    return SpinConfig(s);
}

SpinConfig to_config(const std::vector<int>& v) {
    return SpinConfig(std::vector<SpinConfig::value_type>(v.begin(), v.end()));
}

}  // namespace

TEST(Theta, Examples) {
    const SpinConfig v = spins({1, -1});
    EXPECT_EQ(theta(RbmParams::zeros(2, 3), v).theta, Eigen::VectorXd::Zero(3));

    RbmParams p = RbmParams::zeros(2, 2);
    p.b << 1.0, -1.0;
    EXPECT_EQ(theta(p, v).theta, (Eigen::VectorXd(2) << 1.0, -1.0).finished());

    p = RbmParams::zeros(2, 2);
    p.W << 1.0, 0.5, -1.0, 2.0;
    const Eigen::VectorXd th = theta(p, v).theta;
    EXPECT_DOUBLE_EQ(th(0), 0.5);
    EXPECT_DOUBLE_EQ(th(1), -3.0);
}

TEST(Theta, DimensionMismatch) {
    EXPECT_THROW(theta(RbmParams::zeros(3, 2), spins({1, 1})), Error);
}

TEST(Params, ConstructorChecksShapes) {
    EXPECT_THROW(RbmParams(Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(3), Eigen::MatrixXd::Zero(2, 2)), Error);
    EXPECT_THROW(RbmParams::zeros(0, 2), Error);
}

TEST(Params, FlattenOrder) {
    RbmParams p = RbmParams::zeros(2, 2);
    p.a << 1, 2;
    p.b << 3, 4;
    p.W << 5, 6, 7, 8;
    const Eigen::VectorXd f = p.flatten();
    for (int k = 0; k < 8; ++k) EXPECT_EQ(f(k), k + 1);
    const RbmParams q = RbmParams::unflatten(2, 2, std::span<const double>(f.data(), 8));
    EXPECT_EQ(q.W, p.W);
}

TEST(Params, RandomInitWithinScale) {
    Rng rng(3);
    const RbmParams p = RbmParams::random(10, 10, rng);
    EXPECT_LE(p.flatten().cwiseAbs().maxCoeff(), 0.05);
    EXPECT_GT(p.flatten().cwiseAbs().maxCoeff(), 0.0);
}

TEST(LogPsi, Examples) {
    EXPECT_NEAR(log_psi(RbmParams::zeros(2, 3), spins({1, -1})), 1.5 * std::log(2.0), 1e-15);
    RbmParams p = RbmParams::zeros(2, 4);
    p.a << 2.0, 0.0;
    EXPECT_NEAR(log_psi(p, spins({1, 1})), 1.0 + 2.0 * std::log(2.0), 1e-15);
}

TEST(LogPsi, MatchesHiddenTrace) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const RbmParams p = oracle::random_params(3, 3, seed, 1.0);
        for (std::uint64_t vb = 0; vb < 8; ++vb) {
            const auto v = oracle::spins_of(vb, 3);
            EXPECT_NEAR(std::exp(2.0 * log_psi(p, to_config(v))) / oracle::hidden_trace(p, v), 1.0, 1e-12);
        }
    }
}

TEST(LogPsi, StableForHugeTheta) {
    RbmParams p = RbmParams::zeros(1, 1);
    p.b << 800.0;
    const double lp = log_psi(p, spins({1}));
    EXPECT_TRUE(std::isfinite(lp));
    EXPECT_NEAR(lp, 400.0, 1e-9);
    EXPECT_NEAR(log_two_cosh(-1000.0), 1000.0, 1e-12);
    EXPECT_NEAR(log_two_cosh(0.0), std::log(2.0), 1e-15);
}

TEST(LogPsi, NonFiniteParamsRejected) {
    RbmParams p = RbmParams::zeros(2, 2);
    p.W(1, 0) = std::nan("");
    try {
        log_psi(p, spins({1, 1}));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::non_finite);
    }
}

TEST(PsiRatio, Examples) {
    RbmParams p = RbmParams::zeros(3, 2);
    p.a << 0.3, -0.7, 1.1;
    const SpinConfig v = spins({1, -1, -1});
    const ThetaCache c = theta(p, v);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(psi_ratio(p, v, i, c), std::exp(-p.a(i) * v[i]), 1e-15);
    const RbmParams z = RbmParams::zeros(3, 2);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(psi_ratio(z, v, i, theta(z, v)), 1.0);
    EXPECT_THROW(psi_ratio(z, v, 3, theta(z, v)), Error);
}

TEST(PsiRatio, MatchesTwoEvaluations) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const RbmParams p = oracle::random_params(4, 4, seed + 10, 1.0);
        for (std::uint64_t vb = 0; vb < 16; ++vb) {
            const SpinConfig v = SpinConfig::from_bits(vb, 4);
            const ThetaCache c = theta(p, v);
            for (std::size_t i = 0; i < 4; ++i) {
                const double want = std::exp(log_psi(p, flip(v, i)) - log_psi(p, v));
                const double got = psi_ratio(p, v, i, c);
                EXPECT_GT(got, 0.0);
                EXPECT_NEAR(got / want, 1.0, 1e-12);
                EXPECT_NEAR(got * psi_ratio(p, flip(v, i), i, theta(p, flip(v, i))), 1.0, 1e-10);
            }
        }
    }
}

TEST(ApplyFlip, KeepsCacheConsistent) {
    const RbmParams p = oracle::random_params(6, 5, 4, 1.0);
    Rng rng(5);
    SpinConfig v = SpinConfig::from_bits(13, 6);
    ThetaCache c = theta(p, v);
    for (int t = 0; t < 500; ++t) apply_flip(p, v, uniform_index(rng, 6), c);
    EXPECT_LE((c.theta - theta(p, v).theta).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(LogDerivatives, Examples) {
    const RbmParams z = RbmParams::zeros(3, 2);
    const SpinConfig v = spins({1, -1, 1});
    const Eigen::VectorXd d = log_derivatives(z, v, theta(z, v));
    ASSERT_EQ(d.size(), 3 + 2 + 6);
    EXPECT_EQ(d.head(3), 0.5 * v.to_vector());
    EXPECT_EQ(d.tail(8), Eigen::VectorXd::Zero(8));

    RbmParams p = RbmParams::zeros(1, 1);
    p.b << 60.0;
    EXPECT_NEAR(log_derivatives(p, spins({1}), theta(p, spins({1})))(1), 0.5, 1e-15);
}

TEST(LogDerivatives, MatchesCentralDifferences) {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const RbmParams p = oracle::random_params(5, 5, seed + 20, 1.0);
        const SpinConfig v = SpinConfig::from_bits(seed * 7 + 3, 5);
        const Eigen::VectorXd d = log_derivatives(p, v, theta(p, v));
        const Eigen::VectorXd w = p.flatten();
        const double h = 1e-5;
        for (Eigen::Index k = 0; k < w.size(); ++k) {
            Eigen::VectorXd wp = w, wm = w;
            wp(k) += h;
            wm(k) -= h;
            const double fd = (log_psi(RbmParams::unflatten(5, 5, std::span<const double>(wp.data(), wp.size())), v) -
                               log_psi(RbmParams::unflatten(5, 5, std::span<const double>(wm.data(), wm.size())), v)) /
                              (2 * h);
            EXPECT_NEAR(d(k), fd, 1e-6 * std::max(1.0, std::abs(fd))) << "component " << k;
        }
    }
}

TEST(LocalEnergy, Examples) {
    const TfimLattice ring = chain_lattice(4, 0.5);
    const RbmParams z = RbmParams::zeros(4, 4);
    EXPECT_DOUBLE_EQ(local_energy(z, ring, spins({1, 1, 1, 1})), -6.0);
    EXPECT_DOUBLE_EQ(local_energy(z, ring, spins({1, -1, 1, -1})), 2.0);
    EXPECT_THROW(local_energy(RbmParams::zeros(3, 3), ring, spins({1, 1, 1, 1})), Error);
}

TEST(LocalEnergy, MatchesDenseMatrixVector) {
    const TfimLattice ring = chain_lattice(4, 1.0);
    const Eigen::MatrixXd H = oracle::dense_hamiltonian(ring);
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const RbmParams p = oracle::random_params(4, 4, seed + 30, 0.8);
        Eigen::VectorXd psi(16);
        for (std::uint64_t s = 0; s < 16; ++s) psi(s) = std::sqrt(oracle::hidden_trace(p, oracle::spins_of(s, 4)));
        const Eigen::VectorXd hpsi = H * psi;
        for (std::uint64_t s = 0; s < 16; ++s) {
            EXPECT_NEAR(local_energy(p, ring, SpinConfig::from_bits(s, 4)), hpsi(s) / psi(s), 1e-12);
        }
    }
}

TEST(UnnormalizedRho, Examples) {
    for (std::uint64_t s = 0; s < 8; ++s) EXPECT_NEAR(unnormalized_rho(RbmParams::zeros(3, 4), SpinConfig::from_bits(s, 3)), 16.0, 1e-12);
    RbmParams p = oracle::random_params(3, 3, 40, 1.0);
    p.a.setZero();
    p.b.setZero();
    for (std::uint64_t s = 0; s < 8; ++s) {
        EXPECT_NEAR(unnormalized_rho(p, SpinConfig::from_bits(s, 3)) / unnormalized_rho(p, SpinConfig::from_bits(7 - s, 3)),
                    1.0, 1e-13);
    }
}

TEST(UnnormalizedRho, SumsToPartitionFunction) {
    const RbmParams p = oracle::random_params(3, 3, 41, 1.0);
    double z_rho = 0.0;
    double z_joint = 0.0;
    for (std::uint64_t vb = 0; vb < 8; ++vb) {
        z_rho += unnormalized_rho(p, SpinConfig::from_bits(vb, 3));
        const auto v = oracle::spins_of(vb, 3);
        for (std::uint64_t hb = 0; hb < 8; ++hb) {
            const auto h = oracle::spins_of(hb, 3);
            double e = 0.0;
            for (int i = 0; i < 3; ++i) e += p.a(i) * v[i];
            for (int j = 0; j < 3; ++j) {
                e += p.b(j) * h[j];
                for (int i = 0; i < 3; ++i) e += h[j] * p.W(j, i) * v[i];
            }
            z_joint += std::exp(e);
        }
    }
    EXPECT_NEAR(z_rho / z_joint, 1.0, 1e-12);
}

TEST(LocalEnergy, ZeroVarianceNearClassicalFerromagnet) {
    // h = 0: every basis state is an eigenstate, so E_loc is the diagonal energy
    // and the ferromagnetic network concentrates on the two ground states.
    const TfimLattice lat = chain_lattice(6, 0.0);
    RbmParams p = RbmParams::zeros(6, 6);
    for (int j = 0; j < 6; ++j) {
        p.W(j, j) = 5.0;
        p.W(j, (j + 1) % 6) = 5.0;
    }
    double mean = 0.0, sq = 0.0, z = 0.0;
    for (std::uint64_t s = 0; s < 64; ++s) {
        const SpinConfig v = SpinConfig::from_bits(s, 6);
        const double w = unnormalized_rho(p, v);
        const double e = local_energy(p, lat, v);
        z += w;
        mean += w * e;
        sq += w * e * e;
    }
    mean /= z;
    EXPECT_LT(sq / z - mean * mean, 1e-3);
    EXPECT_NEAR(mean, -6.0, 1e-3);
}
