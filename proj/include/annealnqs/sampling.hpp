#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "annealnqs/lattice.hpp"
#include "annealnqs/rbm.hpp"
#include "annealnqs/rng.hpp"

namespace annealnqs {

enum class SamplerKind { exact, metropolis, gibbs, annealer };

const char* to_string(SamplerKind kind);
SamplerKind sampler_kind_from_string(const std::string& name);

struct SamplerDiagnostics {
    double acceptance_rate = 1.0;
    double chain_break_rate = 0.0;
    int sweeps_per_sample = 0;
};

/// Monte Carlo input for every estimator. `hidden` is filled by samplers that
/// see both layers; `weights` only by the exact sampler.
struct SampleBatch {
    std::vector<SpinConfig> visible;
    std::vector<SpinConfig> hidden;
    std::vector<double> weights;
    SamplerDiagnostics diagnostics;

    std::size_t size() const noexcept { return visible.size(); }
    bool weighted() const noexcept { return !weights.empty(); }
    /// Weight of sample k under the estimator (1/N_s when unweighted).
    double weight(std::size_t k) const noexcept {
        return weighted() ? weights[k] : 1.0 / static_cast<double>(visible.size());
    }
};

/// Concatenates batches in order; diagnostics are sample-weighted averages.
SampleBatch merge_batches(std::vector<SampleBatch> parts);

struct SamplerSpec {
    SamplerKind kind = SamplerKind::metropolis;
    int n_samples = 10000;
    int burn_in = 100;   // sweeps
    int thinning = 1;    // sweeps between retained samples
    int n_chains = 1;    // independent Markov chains, seeds derived by counter
    std::uint64_t seed = 0;

    /// Throws Errc::invalid_argument when an invariant is broken.
    void validate() const;
};

inline constexpr int kExactSamplerMaxSites = 20;

/// All 2^N visible configurations with weights |Ψ|²/Σ|Ψ|².
SampleBatch sample_exact(const RbmParams& params, int n_sites);

/// Single-spin-flip Metropolis on |Ψ|²; one sweep is N proposals at random sites.
SampleBatch metropolis_sample(const RbmParams& params, const SamplerSpec& spec, Rng& rng);

/// p(h_j = +1 | v) for each hidden unit.
Eigen::VectorXd gibbs_conditional_hidden(const RbmParams& params, const SpinConfig& v);
/// p(v_i = +1 | h) for each visible unit.
Eigen::VectorXd gibbs_conditional_visible(const RbmParams& params, const SpinConfig& h);

/// Block Gibbs on p(v, h) ∝ exp(a·v + b·h + hᵀWv); returns both layers.
SampleBatch gibbs_sample(const RbmParams& params, const SamplerSpec& spec, Rng& rng);

using ScalarObservable = std::function<double(const SpinConfig&)>;
using VectorObservable = std::function<Eigen::VectorXd(const SpinConfig&)>;

double estimate_mean(const SampleBatch& batch, const ScalarObservable& f);
Eigen::VectorXd estimate_mean(const SampleBatch& batch, const VectorObservable& f);

/// Per-call inputs that change during training.
struct SampleContext {
    double beta_x = 1.0;
};

/// Pluggable sampler used by the optimizer.
class Sampler {
   public:
    virtual ~Sampler() = default;
    virtual SamplerKind kind() const = 0;
    virtual SampleBatch sample(const RbmParams& params, const SampleContext& ctx, Rng& rng) const = 0;
    virtual bool stochastic() const { return true; }
    /// True when the sampled distribution depends on the β_x estimate.
    virtual bool uses_beta_x() const { return false; }
};

class ExactSampler final : public Sampler {
   public:
    SamplerKind kind() const override { return SamplerKind::exact; }
    SampleBatch sample(const RbmParams& params, const SampleContext&, Rng&) const override;
    bool stochastic() const override { return false; }
};

class MetropolisSampler final : public Sampler {
   public:
    explicit MetropolisSampler(SamplerSpec spec);
    SamplerKind kind() const override { return SamplerKind::metropolis; }
    SampleBatch sample(const RbmParams& params, const SampleContext&, Rng& rng) const override;

   private:
    SamplerSpec spec_;
};

class GibbsSampler final : public Sampler {
   public:
    explicit GibbsSampler(SamplerSpec spec);
    SamplerKind kind() const override { return SamplerKind::gibbs; }
    SampleBatch sample(const RbmParams& params, const SampleContext&, Rng& rng) const override;

   private:
    SamplerSpec spec_;
};

/// Total variation distance between two distributions on the same support.
double total_variation(const std::vector<double>& p, const std::vector<double>& q);

/// Empirical distribution of the visible layer over the 2^N bit patterns.
std::vector<double> visible_histogram(const SampleBatch& batch, int n_visible);

}  // namespace annealnqs
