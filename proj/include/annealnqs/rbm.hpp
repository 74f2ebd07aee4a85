#pragma once

#include <span>

#include <Eigen/Dense>

#include "annealnqs/lattice.hpp"
#include "annealnqs/rng.hpp"

namespace annealnqs {

/// Real RBM weights. Amplitude convention:
///   Ψ(v) = exp(a·v / 2) · Π_j [2 cosh(b_j + W_j·v)]^{1/2}
/// which is the visible marginal of p(v, h) ∝ exp(a·v + b·h + hᵀWv).
struct RbmParams {
    Eigen::VectorXd a;  // visible biases, length N
    Eigen::VectorXd b;  // hidden biases, length M
    Eigen::MatrixXd W;  // M x N, row j couples hidden j to every visible spin

    RbmParams() = default;
    RbmParams(Eigen::VectorXd a_, Eigen::VectorXd b_, Eigen::MatrixXd W_);

    static RbmParams zeros(int n_visible, int n_hidden);
    /// Independent uniform draws in [-scale, +scale].
    static RbmParams random(int n_visible, int n_hidden, Rng& rng, double scale = 0.05);

    int n_visible() const noexcept { return static_cast<int>(a.size()); }
    int n_hidden() const noexcept { return static_cast<int>(b.size()); }
    std::size_t n_params() const noexcept;

    /// Flat layout [a | b | W row-major]; the same order as log_derivatives.
    Eigen::VectorXd flatten() const;
    static RbmParams unflatten(int n_visible, int n_hidden, std::span<const double> values);

    bool all_finite() const;
    /// Throws Errc::non_finite if any weight is NaN or infinite.
    void check_finite() const;

    RbmParams& operator-=(const Eigen::VectorXd& flat_step);
};

/// θ_j = b_j + W_j·v for one visible configuration. Per-walker state.
struct ThetaCache {
    Eigen::VectorXd theta;
};

/// ln(2 cosh x) without overflow.
double log_two_cosh(double x);

ThetaCache theta(const RbmParams& params, const SpinConfig& v);

double log_psi(const RbmParams& params, const SpinConfig& v);
double log_psi(const RbmParams& params, const SpinConfig& v, const ThetaCache& cache);

/// Ψ(v with spin i flipped) / Ψ(v), from θ increments only.
double psi_ratio(const RbmParams& params, const SpinConfig& v, std::size_t i, const ThetaCache& cache);

/// Flips spin i of v and updates the cache to match.
void apply_flip(const RbmParams& params, SpinConfig& v, std::size_t i, ThetaCache& cache);

/// ∂ ln Ψ / ∂w in the flat [a | b | W] order.
Eigen::VectorXd log_derivatives(const RbmParams& params, const SpinConfig& v, const ThetaCache& cache);
void log_derivatives_into(const RbmParams& params, const SpinConfig& v, const ThetaCache& cache,
                          Eigen::Ref<Eigen::VectorXd> out);

/// ⟨v|H|Ψ⟩ / Ψ(v) = -h Σ_i Ψ(v̄_i)/Ψ(v) - Σ_<ij> v_i v_j.
double local_energy(const RbmParams& params, const TfimLattice& lattice, const SpinConfig& v,
                    const ThetaCache& cache);
double local_energy(const RbmParams& params, const TfimLattice& lattice, const SpinConfig& v);

/// |Ψ(v)|², the unnormalized quantum weight.
double unnormalized_rho(const RbmParams& params, const SpinConfig& v);

}  // namespace annealnqs
