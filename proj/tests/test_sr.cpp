#include <cmath>

#include <gtest/gtest.h>

#include "annealnqs/chimera.hpp"
#include "annealnqs/error.hpp"
#include "annealnqs/reference.hpp"
#include "annealnqs/sr.hpp"
#include "oracles.hpp"

using namespace annealnqs;

namespace {

SamplerSpec mc_spec(int n_samples) {
    SamplerSpec s;
    s.n_samples = n_samples;
    s.n_chains = 2;
    return s;
}

// Variational energy ⟨Ψ|H|Ψ⟩/⟨Ψ|Ψ⟩ from the dense Hamiltonian.
double rayleigh(const RbmParams& p, const Eigen::MatrixXd& H) {
    const int n = p.n_visible();
    Eigen::VectorXd psi(std::size_t{1} << n);
    for (Eigen::Index s = 0; s < psi.size(); ++s) psi(s) = std::sqrt(oracle::hidden_trace(p, oracle::spins_of(s, n)));
    return psi.dot(H * psi) / psi.squaredNorm();
}

class FailingSampler final : public Sampler {
   public:
    explicit FailingSampler(int good_calls) : good_(good_calls) {}
    SamplerKind kind() const override { return SamplerKind::exact; }
    SampleBatch sample(const RbmParams& params, const SampleContext&, Rng&) const override {
        if (calls_++ >= good_) throw Error(Errc::non_finite, "injected failure");
        return sample_exact(params, params.n_visible());
    }
    bool stochastic() const override { return false; }

   private:
    int good_;
    mutable int calls_ = 0;
};

}  // namespace

TEST(BuildSrSystem, SingleSampleGivesZeroCovariance) {
    const RbmParams p = oracle::random_params(4, 4, 1, 0.5);
    SampleBatch b;
    b.visible = {SpinConfig::from_bits(5, 4)};
    const SrSystem sys = build_sr_system(b, p, chain_lattice(4, 1.0));
    EXPECT_LE(sys.S.cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LE(sys.F.cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_DOUBLE_EQ(sys.energy_mean, local_energy(p, chain_lattice(4, 1.0), b.visible[0]));
}

TEST(BuildSrSystem, EigenstateHasZeroForce) {
    RbmParams p = RbmParams::zeros(4, 4);
    p.a.setConstant(30.0);
    const TfimLattice lat = chain_lattice(4, 0.0);
    const SrSystem sys = build_sr_system(sample_exact(p, 4), p, lat);
    EXPECT_LE(sys.F.cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_NEAR(sys.energy_mean, -4.0, 1e-10);
}

TEST(BuildSrSystem, MatchesBruteForceSums) {
    const RbmParams p = oracle::random_params(3, 3, 2, 1.0);
    const TfimLattice lat = chain_lattice(3, 0.7);
    const SrSystem sys = build_sr_system(sample_exact(p, 3), p, lat);
    const Eigen::MatrixXd H = oracle::dense_hamiltonian(lat);
    const int np = static_cast<int>(p.n_params());
    Eigen::VectorXd psi(8);
    for (int s = 0; s < 8; ++s) psi(s) = std::sqrt(oracle::hidden_trace(p, oracle::spins_of(s, 3)));
    const Eigen::VectorXd hpsi = H * psi;
    const double z = psi.squaredNorm();
    Eigen::VectorXd md = Eigen::VectorXd::Zero(np), med = Eigen::VectorXd::Zero(np);
    Eigen::MatrixXd mdd = Eigen::MatrixXd::Zero(np, np);
    double me = 0.0;
    for (int s = 0; s < 8; ++s) {
        const auto v = oracle::spins_of(s, 3);
        // derivatives written out directly
        Eigen::VectorXd d(np);
        for (int i = 0; i < 3; ++i) d(i) = 0.5 * v[i];
        for (int j = 0; j < 3; ++j) {
            double th = p.b(j);
            for (int i = 0; i < 3; ++i) th += p.W(j, i) * v[i];
            d(3 + j) = 0.5 * std::tanh(th);
            for (int i = 0; i < 3; ++i) d(6 + 3 * j + i) = 0.5 * v[i] * std::tanh(th);
        }
        const double w = psi(s) * psi(s) / z;
        const double e = hpsi(s) / psi(s);
        me += w * e;
        md += w * d;
        med += w * e * d;
        mdd += w * d * d.transpose();
    }
    const Eigen::MatrixXd S = mdd - md * md.transpose();
    const Eigen::VectorXd F = med - me * md;
    EXPECT_NEAR(sys.energy_mean, me, 1e-12);
    EXPECT_LE((sys.S - S).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((sys.F - F).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(BuildSrSystem, ForceIsHalfTheEnergyGradient) {
    for (int n : {3, 4}) {
        const RbmParams p = oracle::random_params(n, n, 3 + n, 0.7);
        const TfimLattice lat = chain_lattice(n, 0.8);
        const Eigen::MatrixXd H = oracle::dense_hamiltonian(lat);
        const SrSystem sys = build_sr_system(sample_exact(p, n), p, lat);
        const Eigen::VectorXd w = p.flatten();
        const double h = 1e-5;
        for (Eigen::Index k = 0; k < w.size(); ++k) {
            Eigen::VectorXd wp = w, wm = w;
            wp(k) += h;
            wm(k) -= h;
            const double g = (rayleigh(RbmParams::unflatten(n, n, std::span<const double>(wp.data(), wp.size())), H) -
                              rayleigh(RbmParams::unflatten(n, n, std::span<const double>(wm.data(), wm.size())), H)) /
                             (2 * h);
            EXPECT_NEAR(2.0 * sys.F(k), g, 1e-4 * std::max(1.0, std::abs(g))) << "component " << k;
        }
    }
}

TEST(BuildSrSystem, CovarianceIsPositiveSemidefinite) {
    Rng rng(4);
    for (int t = 0; t < 10; ++t) {
        const RbmParams p = oracle::random_params(5, 5, 100 + t, 1.5);
        const SampleBatch b = t % 2 ? sample_exact(p, 5) : metropolis_sample(p, mc_spec(200), rng);
        const SrSystem sys = build_sr_system(b, p, chain_lattice(5, 1.0));
        EXPECT_LE((sys.S - sys.S.transpose()).cwiseAbs().maxCoeff(), 0.0);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sys.S, Eigen::EigenvaluesOnly);
        EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10);
    }
}

TEST(BuildSrSystem, ChunkingDoesNotChangeResult) {
    const RbmParams p = oracle::random_params(6, 6, 5, 1.0);
    Rng rng(6);
    const SampleBatch b = metropolis_sample(p, mc_spec(3000), rng);
    const TfimLattice lat = chain_lattice(6, 1.0);
    const SrSystem ref = build_sr_system(b, p, lat, 1 << 20);
    for (std::size_t chunk : {1, 7, 128, 1000}) {
        const SrSystem s = build_sr_system(b, p, lat, chunk);
        EXPECT_LE((s.S - ref.S).cwiseAbs().maxCoeff(), 1e-10);
        EXPECT_LE((s.F - ref.F).cwiseAbs().maxCoeff(), 1e-10);
        EXPECT_NEAR(s.energy_mean, ref.energy_mean, 1e-10);
    }
}

TEST(BuildSrSystem, EmptyBatchThrows) {
    EXPECT_THROW(build_sr_system(SampleBatch{}, RbmParams::zeros(3, 3), chain_lattice(3, 1.0)), Error);
}

TEST(SolveSr, Examples) {
    const Eigen::VectorXd f = (Eigen::VectorXd(3) << 1.0, -2.0, 0.5).finished();
    EXPECT_LE((solve_sr(Eigen::MatrixXd::Identity(3, 3), f, 0.0) - f).norm(), 1e-15);
    EXPECT_LE((solve_sr(Eigen::MatrixXd::Zero(3, 3), f, 1.0) - f).norm(), 1e-15);
}

TEST(SolveSr, MatchesGaussianElimination) {
    Rng rng(7);
    for (int t = 0; t < 5; ++t) {
        Eigen::MatrixXd A(5, 5);
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j) A(i, j) = 2.0 * uniform01(rng) - 1.0;
        const Eigen::MatrixXd S = A * A.transpose() + 0.1 * Eigen::MatrixXd::Identity(5, 5);
        Eigen::VectorXd F(5);
        for (int i = 0; i < 5; ++i) F(i) = 2.0 * uniform01(rng) - 1.0;
        const double lambda = 0.01 * t;
        const Eigen::VectorXd x = solve_sr(S, F, lambda);
        const Eigen::MatrixXd shifted = S + lambda * Eigen::MatrixXd::Identity(5, 5);
        EXPECT_LE((shifted * x - F).norm(), 1e-8 * (F.norm() + 1));
        EXPECT_LE((x - oracle::gauss_solve(shifted, F)).norm(), 1e-10 * (1 + x.norm()));
    }
}

TEST(SolveSr, Errors) {
    const Eigen::VectorXd f = Eigen::VectorXd::Ones(2);
    try {
        solve_sr(Eigen::MatrixXd::Zero(2, 2), f, 0.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::solver_failure);
    }
    Eigen::MatrixXd bad = Eigen::MatrixXd::Identity(2, 2);
    bad(0, 1) = bad(1, 0) = std::nan("");
    try {
        solve_sr(bad, f, 0.1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::non_finite);
    }
    EXPECT_THROW(solve_sr(Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Ones(3), 0.1), Error);
}

TEST(LambdaSchedule, DecayAndFloor) {
    LambdaSchedule s;
    EXPECT_DOUBLE_EQ(s.at(0), 0.1);
    EXPECT_NEAR(s.at(10), 0.1 * std::pow(0.95, 10), 1e-17);
    EXPECT_DOUBLE_EQ(s.at(10000), kLambdaFloorDefault);
    s.floor = 1e-6;
    EXPECT_DOUBLE_EQ(s.at(10000), 1e-6);
}

TEST(SrConfig, Validation) {
    SrConfig c;
    EXPECT_NO_THROW(c.validate());
    c.gamma = -0.1;
    EXPECT_THROW(c.validate(), Error);
    c = SrConfig{};
    c.beta_x0 = 0.0;
    EXPECT_THROW(c.validate(), Error);
    c = SrConfig{};
    c.iterations = -1;
    EXPECT_THROW(c.validate(), Error);
    c = SrConfig{};
    c.lambda.decay = 1.5;
    EXPECT_THROW(c.validate(), Error);
}

TEST(AdaptBeta, Rule) {
    Rng rng(8);
    EXPECT_DOUBLE_EQ(adapt_beta(2.0, -1.0, -1.5, 0.1, rng), 2.0);
    EXPECT_DOUBLE_EQ(adapt_beta(2.0, -1.0, -1.0, 0.1, rng), 2.0);
    bool changed = false;
    for (int t = 0; t < 1000; ++t) {
        const double b = adapt_beta(2.0, -1.5, -1.0, 0.1, rng);
        EXPECT_LE(std::abs(b - 2.0), 0.2 + 1e-15);
        EXPECT_GT(b, 0.0);
        changed |= b != 2.0;
    }
    EXPECT_TRUE(changed);
    for (int t = 0; t < 100; ++t) EXPECT_GT(adapt_beta(1.0, 0.0, 1.0, 0.999, rng), 0.0);
}

TEST(SrStep, ZeroLearningRateLeavesParams) {
    const TfimLattice lat = chain_lattice(4, 1.0);
    SrConfig cfg;
    cfg.gamma = 0.0;
    const RbmParams p = oracle::random_params(4, 4, 9, 0.05);
    TrainState st = initial_state(p, cfg, 1);
    const ExactSampler s;
    sr_step(st, s, lat, cfg);
    EXPECT_EQ(st.params.flatten(), p.flatten());
    EXPECT_EQ(st.energy_history.size(), 1u);
    EXPECT_EQ(st.iteration, 1);
}

TEST(SrStep, ClassicalLimitDecreasesToGroundEnergy) {
    const TfimLattice lat = chain_lattice(4, 0.0);
    SrConfig cfg;
    Rng init(10);
    TrainState st = initial_state(RbmParams::random(4, 4, init), cfg, 2);
    const ExactSampler s;
    for (int k = 0; k < 50; ++k) sr_step(st, s, lat, cfg);
    for (std::size_t k = 1; k < st.energy_history.size(); ++k) {
        EXPECT_LE(st.energy_history[k], st.energy_history[k - 1] + 1e-12) << k;
    }
    EXPECT_LE(st.energy_history.back(), -4.0 + 1e-2);
}

TEST(SrStep, StrongGuaranteeOnFailure) {
    const TfimLattice lat = chain_lattice(4, 1.0);
    SrConfig cfg;
    Rng init(11);
    TrainState st = initial_state(RbmParams::random(4, 4, init), cfg, 3);
    const FailingSampler s(1);
    sr_step(st, s, lat, cfg);
    const Eigen::VectorXd before = st.params.flatten();
    EXPECT_THROW(sr_step(st, s, lat, cfg), Error);
    EXPECT_EQ(st.iteration, 1);
    EXPECT_EQ(st.params.flatten(), before);
}

TEST(Train, NoiseFreeChainReachesReference) {
    const TfimLattice lat = chain_lattice(6, 0.5);
    const double ref = exact_energy_1d(6, 0.5).energy;
    SrConfig cfg;
    Rng init(12);
    const TrainResult r = train(lat, ExactSampler{}, cfg, initial_state(RbmParams::random(6, 6, init), cfg, 4), ref);
    EXPECT_LE(relative_error(r.state.energy_history.back(), ref), 1e-4);
    for (double e : r.state.energy_history) EXPECT_GE(e, ref - 1e-12);
    ASSERT_FALSE(r.records.empty());
    EXPECT_TRUE(r.records.back().delta_e.has_value());
    EXPECT_EQ(r.records.size(), r.state.energy_history.size());
}

TEST(Train, StopsOnConvergenceWindow) {
    const TfimLattice lat = chain_lattice(4, 0.0);
    SrConfig cfg;
    cfg.iterations = 5000;
    Rng init(13);
    const TrainResult r = train(lat, ExactSampler{}, cfg, initial_state(RbmParams::random(4, 4, init), cfg, 5));
    EXPECT_EQ(r.status, TrainStatus::converged);
    EXPECT_LT(r.state.iteration, 5000);
    const auto& h = r.state.energy_history;
    const std::size_t k = h.size() - 1;
    EXPECT_LT(std::abs(h[k] - h[k - 50]) / std::abs(h[k]), 1e-8);
}

TEST(Train, AbortsAndKeepsLastGoodState) {
    const TfimLattice lat = chain_lattice(4, 1.0);
    SrConfig cfg;
    cfg.iterations = 20;
    Rng init(14);
    const TrainResult r = train(lat, FailingSampler(7), cfg, initial_state(RbmParams::random(4, 4, init), cfg, 6));
    EXPECT_EQ(r.status, TrainStatus::aborted);
    EXPECT_EQ(r.state.iteration, 7);
    EXPECT_EQ(r.state.energy_history.size(), 7u);
    EXPECT_NE(r.message.find("injected"), std::string::npos);
}

TEST(Train, DivergenceGuardHalvesGammaOnce) {
    const TfimLattice lat = chain_lattice(6, 1.0);
    SrConfig cfg;
    cfg.gamma = 40.0;
    cfg.iterations = 30;
    cfg.divergence_threshold = 5.0;
    Rng init(15);
    const TrainResult r = train(lat, ExactSampler{}, cfg, initial_state(RbmParams::random(6, 6, init), cfg, 7));
    const auto& h = r.state.energy_history;
    const bool blew_up = std::any_of(h.begin(), h.end(), [&](double e) {
        return e > *std::min_element(h.begin(), h.end()) + cfg.divergence_threshold;
    });
    ASSERT_TRUE(blew_up);
    EXPECT_TRUE(r.state.gamma_halved);
    EXPECT_DOUBLE_EQ(r.state.gamma, 20.0);
}

TEST(Train, BetaChangesOnlyWhenEnergyGrows) {
    const TfimLattice lat = chain_lattice(4, 0.5);
    SrConfig cfg;
    cfg.iterations = 60;
    cfg.beta_adapt.enabled = true;
    SamplerSpec spec;
    spec.kind = SamplerKind::annealer;
    spec.n_samples = 300;
    const AnnealerSampler s(embed_rbm(4, 4, 1), spec, 2.0, cfg.beta_x0, 0.0);
    Rng init(16);
    const TrainResult r = train(lat, s, cfg, initial_state(RbmParams::random(4, 4, init), cfg, 8));
    int changes = 0;
    double beta = cfg.beta_x0;
    for (std::size_t k = 0; k < r.records.size(); ++k) {
        const bool grew = k > 0 && r.records[k].energy > r.records[k - 1].energy;
        if (r.records[k].beta_x != beta) {
            EXPECT_TRUE(grew) << k;
            ++changes;
        } else {
            EXPECT_FALSE(grew) << k;
        }
        beta = r.records[k].beta_x;
    }
    EXPECT_GT(changes, 0);
}

TEST(Train, SeededRunsAreIdentical) {
    const TfimLattice lat = chain_lattice(6, 1.0);
    SrConfig cfg;
    cfg.iterations = 20;
    SamplerSpec spec = mc_spec(500);
    const MetropolisSampler s(spec);
    Rng i1(17), i2(17);
    const TrainResult a = train(lat, s, cfg, initial_state(RbmParams::random(6, 6, i1), cfg, 9));
    const TrainResult b = train(lat, s, cfg, initial_state(RbmParams::random(6, 6, i2), cfg, 9));
    EXPECT_EQ(a.state.energy_history, b.state.energy_history);
    EXPECT_EQ(a.state.params.flatten(), b.state.params.flatten());
}

TEST(RelativeError, Definition) {
    EXPECT_NEAR(relative_error(-9.9, -10.0), 0.01, 1e-15);
    EXPECT_NEAR(relative_error(-10.1, -10.0), 0.01, 1e-15);
}
