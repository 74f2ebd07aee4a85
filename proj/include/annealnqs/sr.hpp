#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "annealnqs/lattice.hpp"
#include "annealnqs/rbm.hpp"
#include "annealnqs/rng.hpp"
#include "annealnqs/sampling.hpp"

namespace annealnqs {

/// Diagonal shift λ_k = max(floor, initial · decay^k).
struct LambdaSchedule {
    double initial = 0.1;
    double decay = 0.95;
    /// Unset means kLambdaFloorDefault. With γ = 0.2, exact-sampler runs on the
    /// 3x3 torus blow up after convergence once the shift drops below ~1e-4.
    std::optional<double> floor;

    double at(int iteration) const;
};

inline constexpr double kLambdaFloorDefault = 1e-3;

struct BetaAdaptConfig {
    bool enabled = false;
    double max_relative_step = 0.1;
};

struct SrConfig {
    double gamma = 0.2;
    LambdaSchedule lambda;
    int iterations = 500;
    double beta_x0 = 4.0;
    BetaAdaptConfig beta_adapt;
    /// Stop when |E_k - E_{k-window}| / |E_k| drops below tol.
    int convergence_window = 50;
    double convergence_tol = 1e-8;
    /// γ is halved once if the energy rises this far above its running minimum.
    double divergence_threshold = 10.0;

    void validate() const;
};

struct TrainState {
    RbmParams params;
    int iteration = 0;
    std::vector<double> energy_history;
    double beta_x = 1.0;
    double gamma = 0.2;
    bool gamma_halved = false;
    Rng rng;
};

TrainState initial_state(const RbmParams& params, const SrConfig& config, std::uint64_t seed);

struct SrSystem {
    Eigen::MatrixXd S;
    Eigen::VectorXd F;
    double energy_mean = 0.0;
    double energy_variance = 0.0;
};

/// S_ij = <D_i D_j> - <D_i><D_j>, F_j = <E D_j> - <E><D_j>, E = <E_loc>.
/// The batch is reduced in fixed chunks of `chunk` samples (pairwise over
/// chunks), so the result does not depend on the worker count.
SrSystem build_sr_system(const SampleBatch& batch, const RbmParams& params, const TfimLattice& lattice,
                         std::size_t chunk = 1024);

/// Solves (S + λI) x = F by Cholesky. Throws Errc::solver_failure when the
/// shifted matrix is not positive definite, Errc::non_finite on bad input.
Eigen::VectorXd solve_sr(const Eigen::MatrixXd& S, const Eigen::VectorXd& F, double lambda);

struct StepRecord {
    int iteration = 0;
    double energy = 0.0;
    std::optional<double> delta_e;
    double acceptance = 1.0;
    double chain_break_rate = 0.0;
    double beta_x = 1.0;
    double lambda = 0.0;
};

/// β_x · (1 + u), u ~ U[-δ, δ], when the energy grew; otherwise unchanged.
double adapt_beta(double beta_x, double e_prev, double e_new, double max_relative_step, Rng& rng);

/// One SR iteration. The state is only modified when the step succeeds.
StepRecord sr_step(TrainState& state, const Sampler& sampler, const TfimLattice& lattice, const SrConfig& config,
                   std::optional<double> reference_energy = std::nullopt);

enum class TrainStatus { completed, converged, aborted };

const char* to_string(TrainStatus status);

struct TrainResult {
    TrainState state;
    std::vector<StepRecord> records;
    TrainStatus status = TrainStatus::completed;
    std::string message;
};

using StepCallback = std::function<void(const TrainState&, const StepRecord&)>;

TrainResult train(const TfimLattice& lattice, const Sampler& sampler, const SrConfig& config, TrainState state,
                  std::optional<double> reference_energy = std::nullopt, const StepCallback& on_step = {});

/// Relative error |(E - E_ref) / E_ref|.
double relative_error(double energy, double reference);

}  // namespace annealnqs
