#include "annealnqs/rbm.hpp"

#include <cmath>
#include <string>

#include "annealnqs/error.hpp"

namespace annealnqs {

namespace {

void check_visible(const RbmParams& params, const SpinConfig& v) {
    if (static_cast<int>(v.size()) != params.n_visible()) {
        throw Error(Errc::length_mismatch, "configuration has " + std::to_string(v.size()) +
                                               " spins, network has " + std::to_string(params.n_visible()) +
                                               " visible units");
    }
}

void check_cache(const RbmParams& params, const ThetaCache& cache) {
    if (cache.theta.size() != params.n_hidden()) {
        throw Error(Errc::length_mismatch, "theta cache does not match the hidden layer size");
    }
}

}  // namespace

RbmParams::RbmParams(Eigen::VectorXd a_, Eigen::VectorXd b_, Eigen::MatrixXd W_)
    : a(std::move(a_)), b(std::move(b_)), W(std::move(W_)) {
    if (a.size() < 1 || b.size() < 1) throw Error(Errc::invalid_argument, "RBM needs N >= 1 and M >= 1");
    if (W.rows() != b.size() || W.cols() != a.size()) {
        throw Error(Errc::length_mismatch, "W must be M x N");
    }
}

RbmParams RbmParams::zeros(int n_visible, int n_hidden) {
    return RbmParams(Eigen::VectorXd::Zero(n_visible), Eigen::VectorXd::Zero(n_hidden),
                     Eigen::MatrixXd::Zero(n_hidden, n_visible));
}

RbmParams RbmParams::random(int n_visible, int n_hidden, Rng& rng, double scale) {
    RbmParams p = zeros(n_visible, n_hidden);
    auto draw = [&] { return scale * (2.0 * uniform01(rng) - 1.0); };
    for (Eigen::Index i = 0; i < p.a.size(); ++i) p.a[i] = draw();
    for (Eigen::Index j = 0; j < p.b.size(); ++j) p.b[j] = draw();
    for (Eigen::Index j = 0; j < p.W.rows(); ++j) {
        for (Eigen::Index i = 0; i < p.W.cols(); ++i) p.W(j, i) = draw();
    }
    return p;
}

std::size_t RbmParams::n_params() const noexcept {
    return static_cast<std::size_t>(a.size() + b.size() + W.size());
}

Eigen::VectorXd RbmParams::flatten() const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(n_params()));
    const Eigen::Index n = a.size();
    const Eigen::Index m = b.size();
    out.head(n) = a;
    out.segment(n, m) = b;
    for (Eigen::Index j = 0; j < m; ++j) out.segment(n + m + j * n, n) = W.row(j).transpose();
    return out;
}

RbmParams RbmParams::unflatten(int n_visible, int n_hidden, std::span<const double> values) {
    RbmParams p = zeros(n_visible, n_hidden);
    if (values.size() != p.n_params()) {
        throw Error(Errc::length_mismatch, "flat parameter vector has " + std::to_string(values.size()) +
                                               " entries, expected " + std::to_string(p.n_params()));
    }
    std::size_t k = 0;
    for (int i = 0; i < n_visible; ++i) p.a[i] = values[k++];
    for (int j = 0; j < n_hidden; ++j) p.b[j] = values[k++];
    for (int j = 0; j < n_hidden; ++j) {
        for (int i = 0; i < n_visible; ++i) p.W(j, i) = values[k++];
    }
    return p;
}

bool RbmParams::all_finite() const { return a.allFinite() && b.allFinite() && W.allFinite(); }

void RbmParams::check_finite() const {
    if (!all_finite()) throw Error(Errc::non_finite, "RBM parameters contain NaN or infinity");
}

RbmParams& RbmParams::operator-=(const Eigen::VectorXd& flat_step) {
    if (flat_step.size() != static_cast<Eigen::Index>(n_params())) {
        throw Error(Errc::length_mismatch, "update vector length does not match the parameter count");
    }
    const Eigen::Index n = a.size();
    const Eigen::Index m = b.size();
    a -= flat_step.head(n);
    b -= flat_step.segment(n, m);
    for (Eigen::Index j = 0; j < m; ++j) W.row(j) -= flat_step.segment(n + m + j * n, n).transpose();
    return *this;
}

double log_two_cosh(double x) {
    const double ax = std::abs(x);
    return ax + std::log1p(std::exp(-2.0 * ax));
}

ThetaCache theta(const RbmParams& params, const SpinConfig& v) {
    check_visible(params, v);
    ThetaCache cache;
    cache.theta = params.b;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const auto col = static_cast<Eigen::Index>(i);
        if (v[i] > 0) {
            cache.theta += params.W.col(col);
        } else {
            cache.theta -= params.W.col(col);
        }
    }
    return cache;
}

double log_psi(const RbmParams& params, const SpinConfig& v, const ThetaCache& cache) {
    check_visible(params, v);
    check_cache(params, cache);
    params.check_finite();
    double bias = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) bias += params.a[static_cast<Eigen::Index>(i)] * v[i];
    double hidden = 0.0;
    for (Eigen::Index j = 0; j < cache.theta.size(); ++j) hidden += log_two_cosh(cache.theta[j]);
    return 0.5 * bias + 0.5 * hidden;
}

double log_psi(const RbmParams& params, const SpinConfig& v) { return log_psi(params, v, theta(params, v)); }

double psi_ratio(const RbmParams& params, const SpinConfig& v, std::size_t i, const ThetaCache& cache) {
    if (i >= v.size()) {
        throw Error(Errc::index_out_of_range, "flip index " + std::to_string(i) + " out of range");
    }
    const auto col = static_cast<Eigen::Index>(i);
    const double vi = v[i];
    double log_ratio = -params.a[col] * vi;
    for (Eigen::Index j = 0; j < cache.theta.size(); ++j) {
        const double t = cache.theta[j];
        log_ratio += 0.5 * (log_two_cosh(t - 2.0 * params.W(j, col) * vi) - log_two_cosh(t));
    }
    return std::exp(log_ratio);
}

void apply_flip(const RbmParams& params, SpinConfig& v, std::size_t i, ThetaCache& cache) {
    const auto col = static_cast<Eigen::Index>(i);
    cache.theta -= (2.0 * v[i]) * params.W.col(col);
    v.flip_in_place(i);
}

void log_derivatives_into(const RbmParams& params, const SpinConfig& v, const ThetaCache& cache,
                          Eigen::Ref<Eigen::VectorXd> out) {
    check_visible(params, v);
    check_cache(params, cache);
    const Eigen::Index n = params.a.size();
    const Eigen::Index m = params.b.size();
    if (out.size() != n + m + n * m) throw Error(Errc::length_mismatch, "derivative buffer has the wrong size");
    for (Eigen::Index i = 0; i < n; ++i) out[i] = 0.5 * v[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < m; ++j) {
        const double t = 0.5 * std::tanh(cache.theta[j]);
        out[n + j] = t;
        double* row = out.data() + n + m + j * n;
        for (Eigen::Index i = 0; i < n; ++i) row[i] = t * v[static_cast<std::size_t>(i)];
    }
}

Eigen::VectorXd log_derivatives(const RbmParams& params, const SpinConfig& v, const ThetaCache& cache) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(params.n_params()));
    log_derivatives_into(params, v, cache, out);
    return out;
}

double local_energy(const RbmParams& params, const TfimLattice& lattice, const SpinConfig& v,
                    const ThetaCache& cache) {
    if (lattice.n_sites() != params.n_visible()) {
        throw Error(Errc::length_mismatch, "network size does not match the lattice");
    }
    check_cache(params, cache);
    double off_diagonal = 0.0;
    if (lattice.field != 0.0) {
        for (std::size_t i = 0; i < v.size(); ++i) off_diagonal += psi_ratio(params, v, i, cache);
    }
    return -lattice.field * off_diagonal + diagonal_energy(lattice, v);
}

double local_energy(const RbmParams& params, const TfimLattice& lattice, const SpinConfig& v) {
    return local_energy(params, lattice, v, theta(params, v));
}

double unnormalized_rho(const RbmParams& params, const SpinConfig& v) {
    return std::exp(2.0 * log_psi(params, v));
}

}  // namespace annealnqs
