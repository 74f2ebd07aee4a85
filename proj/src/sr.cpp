#include "annealnqs/sr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "annealnqs/error.hpp"
#include "annealnqs/parallel.hpp"

namespace annealnqs {

namespace {

// Weighted first and second centered moments of (E_loc, D) over a sample set.
struct Moments {
    double weight = 0.0;
    double mean_e = 0.0;
    Eigen::VectorXd mean_d;
    double c_ee = 0.0;
    Eigen::VectorXd c_ed;
    Eigen::MatrixXd c_dd;
};

Moments merge(const Moments& x, const Moments& y) {
    if (x.weight == 0.0) return y;
    if (y.weight == 0.0) return x;
    Moments out;
    out.weight = x.weight + y.weight;
    const double f = y.weight / out.weight;
    const double g = x.weight * y.weight / out.weight;
    const double de = y.mean_e - x.mean_e;
    const Eigen::VectorXd dd = y.mean_d - x.mean_d;
    out.mean_e = x.mean_e + f * de;
    out.mean_d = x.mean_d + f * dd;
    out.c_ee = x.c_ee + y.c_ee + g * de * de;
    out.c_ed = x.c_ed + y.c_ed + g * de * dd;
    out.c_dd = x.c_dd + y.c_dd;
    out.c_dd.noalias() += g * dd * dd.transpose();
    return out;
}

Moments reduce_pairwise(std::vector<Moments>& parts, std::size_t lo, std::size_t hi) {
    if (hi - lo == 1) return std::move(parts[lo]);
    const std::size_t mid = lo + (hi - lo) / 2;
    return merge(reduce_pairwise(parts, lo, mid), reduce_pairwise(parts, mid, hi));
}

}  // namespace

double LambdaSchedule::at(int iteration) const {
    const double fl = floor.value_or(kLambdaFloorDefault);
    return std::max(fl, initial * std::pow(decay, iteration));
}

void SrConfig::validate() const {
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw Error(Errc::invalid_argument, "gamma must be finite and >= 0");
    if (!(lambda.initial >= 0.0)) throw Error(Errc::invalid_argument, "lambda initial must be >= 0");
    if (!(lambda.decay > 0.0 && lambda.decay <= 1.0)) throw Error(Errc::invalid_argument, "lambda decay must lie in (0, 1]");
    if (lambda.floor && !(*lambda.floor >= 0.0)) throw Error(Errc::invalid_argument, "lambda floor must be >= 0");
    if (iterations < 0) throw Error(Errc::invalid_argument, "iterations must be >= 0");
    if (!(beta_x0 > 0.0)) throw Error(Errc::invalid_argument, "beta_x0 must be > 0");
    if (!(beta_adapt.max_relative_step >= 0.0)) throw Error(Errc::invalid_argument, "beta step must be >= 0");
    if (convergence_window < 1) throw Error(Errc::invalid_argument, "convergence window must be >= 1");
}

TrainState initial_state(const RbmParams& params, const SrConfig& config, std::uint64_t seed) {
    TrainState s;
    s.params = params;
    s.beta_x = config.beta_x0;
    s.gamma = config.gamma;
    s.rng.seed(seed);
    return s;
}

SrSystem build_sr_system(const SampleBatch& batch, const RbmParams& params, const TfimLattice& lattice,
                         std::size_t chunk) {
    if (batch.size() == 0) throw Error(Errc::invalid_argument, "cannot build the SR system from an empty batch");
    const auto p = static_cast<Eigen::Index>(params.n_params());
    chunk = std::max<std::size_t>(1, chunk);
    const std::size_t n_chunks = (batch.size() + chunk - 1) / chunk;
    std::vector<Moments> parts(n_chunks);
    parallel_for_chunks(batch.size(), chunk, [&](std::size_t c, std::size_t begin, std::size_t end) {
        const auto rows = static_cast<Eigen::Index>(end - begin);
        Eigen::MatrixXd d(rows, p);
        Eigen::VectorXd e(rows);
        Eigen::VectorXd w(rows);
        Eigen::VectorXd buf(p);
        for (Eigen::Index r = 0; r < rows; ++r) {
            const std::size_t k = begin + static_cast<std::size_t>(r);
            const SpinConfig& v = batch.visible[k];
            const ThetaCache cache = theta(params, v);
            log_derivatives_into(params, v, cache, buf);
            d.row(r) = buf.transpose();
            e[r] = local_energy(params, lattice, v, cache);
            w[r] = batch.weighted() ? batch.weights[k] : 1.0;
        }
        Moments m;
        m.weight = w.sum();
        if (m.weight <= 0.0) {
            m.weight = 0.0;
            return;
        }
        m.mean_e = w.dot(e) / m.weight;
        m.mean_d = (d.transpose() * w) / m.weight;
        d.rowwise() -= m.mean_d.transpose();
        e.array() -= m.mean_e;
        const Eigen::VectorXd sw = w.cwiseSqrt();
        const Eigen::MatrixXd ds = d.array().colwise() * sw.array();
        m.c_dd = Eigen::MatrixXd::Zero(p, p);
        m.c_dd.selfadjointView<Eigen::Lower>().rankUpdate(ds.transpose());
        m.c_dd.triangularView<Eigen::StrictlyUpper>() = m.c_dd.transpose();
        m.c_ed = d.transpose() * (w.array() * e.array()).matrix();
        m.c_ee = (w.array() * e.array().square()).sum();
        parts[c] = std::move(m);
    });
    const Moments total = reduce_pairwise(parts, 0, parts.size());
    if (total.weight <= 0.0) throw Error(Errc::invalid_argument, "batch has zero total weight");
    SrSystem sys;
    sys.S = total.c_dd / total.weight;
    sys.F = total.c_ed / total.weight;
    sys.energy_mean = total.mean_e;
    sys.energy_variance = total.c_ee / total.weight;
    return sys;
}

Eigen::VectorXd solve_sr(const Eigen::MatrixXd& S, const Eigen::VectorXd& F, double lambda) {
    if (S.rows() != S.cols() || S.rows() != F.size()) throw Error(Errc::length_mismatch, "S must be square and match F");
    if (!(lambda >= 0.0)) throw Error(Errc::invalid_argument, "lambda must be >= 0");
    if (!S.allFinite() || !F.allFinite()) throw Error(Errc::non_finite, "SR system contains NaN or infinity");
    Eigen::MatrixXd shifted = S;
    shifted.diagonal().array() += lambda;
    Eigen::LLT<Eigen::MatrixXd> llt(shifted);
    if (llt.info() != Eigen::Success) {
        throw Error(Errc::solver_failure, "S + lambda I is not positive definite (lambda = " + std::to_string(lambda) + ")");
    }
    Eigen::VectorXd x = llt.solve(F);
    // One step of iterative refinement tightens the residual on ill-conditioned S.
    const Eigen::VectorXd r = F - shifted * x;
    x += llt.solve(r);
    const double residual = (F - shifted * x).norm();
    if (!x.allFinite() || residual > 1e-8 * (F.norm() + 1.0)) {
        throw Error(Errc::solver_failure, "SR solve residual " + std::to_string(residual) + " exceeds tolerance");
    }
    return x;
}

double adapt_beta(double beta_x, double e_prev, double e_new, double max_relative_step, Rng& rng) {
    if (!(e_new > e_prev)) return beta_x;
    double next = 0.0;
    do {
        const double u = max_relative_step * (2.0 * uniform01(rng) - 1.0);
        next = beta_x * (1.0 + u);
    } while (!(next > 0.0));
    return next;
}

StepRecord sr_step(TrainState& state, const Sampler& sampler, const TfimLattice& lattice, const SrConfig& config,
                   std::optional<double> reference_energy) {
    const double lambda = config.lambda.at(state.iteration);
    Rng rng = state.rng;
    SampleContext ctx;
    ctx.beta_x = state.beta_x;
    const SampleBatch batch = sampler.sample(state.params, ctx, rng);
    const SrSystem sys = build_sr_system(batch, state.params, lattice);
    if (!std::isfinite(sys.energy_mean)) {
        throw Error(Errc::non_finite, "mean local energy is not finite at iteration " + std::to_string(state.iteration));
    }
    const Eigen::VectorXd x = solve_sr(sys.S, sys.F, lambda);
    RbmParams next = state.params;
    next -= state.gamma * x;
    if (!next.all_finite()) {
        throw Error(Errc::non_finite, "parameter update is not finite at iteration " + std::to_string(state.iteration));
    }

    double beta_x = state.beta_x;
    if (config.beta_adapt.enabled && sampler.uses_beta_x() && !state.energy_history.empty()) {
        beta_x = adapt_beta(beta_x, state.energy_history.back(), sys.energy_mean, config.beta_adapt.max_relative_step, rng);
    }
    double gamma = state.gamma;
    bool halved = state.gamma_halved;
    if (!halved && !state.energy_history.empty()) {
        const double running_min = *std::min_element(state.energy_history.begin(), state.energy_history.end());
        if (sys.energy_mean > running_min + config.divergence_threshold) {
            gamma *= 0.5;
            halved = true;
        }
    }

    StepRecord rec;
    rec.iteration = state.iteration;
    rec.energy = sys.energy_mean;
    if (reference_energy) rec.delta_e = relative_error(sys.energy_mean, *reference_energy);
    rec.acceptance = batch.diagnostics.acceptance_rate;
    rec.chain_break_rate = batch.diagnostics.chain_break_rate;
    rec.beta_x = beta_x;
    rec.lambda = lambda;

    state.params = std::move(next);
    state.energy_history.push_back(sys.energy_mean);
    ++state.iteration;
    state.beta_x = beta_x;
    state.gamma = gamma;
    state.gamma_halved = halved;
    state.rng = rng;
    return rec;
}

const char* to_string(TrainStatus status) {
    switch (status) {
        case TrainStatus::completed: return "completed";
        case TrainStatus::converged: return "converged";
        case TrainStatus::aborted: return "aborted";
    }
    return "unknown";
}

TrainResult train(const TfimLattice& lattice, const Sampler& sampler, const SrConfig& config, TrainState state,
                  std::optional<double> reference_energy, const StepCallback& on_step) {
    config.validate();
    if (state.params.n_visible() != lattice.n_sites()) {
        throw Error(Errc::length_mismatch, "network size does not match the lattice");
    }
    TrainResult result;
    result.state = std::move(state);
    auto& st = result.state;
    while (st.iteration < config.iterations) {
        StepRecord rec;
        try {
            rec = sr_step(st, sampler, lattice, config, reference_energy);
        } catch (const Error& e) {
            if (e.code() != Errc::non_finite && e.code() != Errc::solver_failure) throw;
            result.status = TrainStatus::aborted;
            result.message = e.what();
            return result;
        }
        result.records.push_back(rec);
        if (on_step) on_step(st, rec);
        const auto& hist = st.energy_history;
        const auto w = static_cast<std::size_t>(config.convergence_window);
        if (hist.size() > w) {
            const double now = hist.back();
            const double then = hist[hist.size() - 1 - w];
            if (std::abs(now - then) <= config.convergence_tol * std::abs(now)) {
                result.status = TrainStatus::converged;
                return result;
            }
        }
    }
    result.status = TrainStatus::completed;
    return result;
}

double relative_error(double energy, double reference) {
    return std::abs((energy - reference) / reference);
}

}  // namespace annealnqs
