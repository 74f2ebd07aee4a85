#include "annealnqs/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "annealnqs/error.hpp"
#include "annealnqs/parallel.hpp"

namespace annealnqs {

namespace {

// 1 / (1 + exp(-2x)), i.e. e^x / (2 cosh x).
double plus_probability(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-2.0 * x));
    const double e = std::exp(2.0 * x);
    return e / (1.0 + e);
}

SpinConfig random_config(std::size_t n, Rng& rng) {
    std::vector<SpinConfig::value_type> s(n);
    for (auto& x : s) x = coin_flip(rng) ? 1 : -1;
    return SpinConfig(std::move(s));
}

SpinConfig draw_layer(const Eigen::VectorXd& fields, Rng& rng) {
    std::vector<SpinConfig::value_type> s(static_cast<std::size_t>(fields.size()));
    for (Eigen::Index k = 0; k < fields.size(); ++k) {
        s[static_cast<std::size_t>(k)] = uniform01(rng) < plus_probability(fields[k]) ? 1 : -1;
    }
    return SpinConfig(std::move(s));
}

// Equal split of n samples over chains; the first n % chains get one extra.
int chain_share(int n_samples, int n_chains, int c) {
    return n_samples / n_chains + (c < n_samples % n_chains ? 1 : 0);
}

struct ChainResult {
    SampleBatch batch;
    std::uint64_t proposed = 0;
    std::uint64_t accepted = 0;
};

template <class RunChain>
SampleBatch run_chains(const SamplerSpec& spec, Rng& rng, RunChain&& run_chain) {
    const int chains = std::min(spec.n_chains, spec.n_samples);
    const std::uint64_t base = rng();
    std::vector<ChainResult> results(static_cast<std::size_t>(chains));
    parallel_for_chunks(static_cast<std::size_t>(chains), 1, [&](std::size_t c, std::size_t, std::size_t) {
        Rng chain_rng(derive_seed(base, c));
        results[c] = run_chain(chain_share(spec.n_samples, chains, static_cast<int>(c)), chain_rng);
    });
    std::uint64_t proposed = 0;
    std::uint64_t accepted = 0;
    std::vector<SampleBatch> parts;
    parts.reserve(results.size());
    for (auto& r : results) {
        proposed += r.proposed;
        accepted += r.accepted;
        parts.push_back(std::move(r.batch));
    }
    SampleBatch out = merge_batches(std::move(parts));
    out.diagnostics.acceptance_rate =
        proposed == 0 ? 1.0 : static_cast<double>(accepted) / static_cast<double>(proposed);
    out.diagnostics.sweeps_per_sample = spec.thinning;
    return out;
}

}  // namespace

const char* to_string(SamplerKind kind) {
    switch (kind) {
        case SamplerKind::exact: return "exact";
        case SamplerKind::metropolis: return "metropolis";
        case SamplerKind::gibbs: return "gibbs";
        case SamplerKind::annealer: return "annealer";
    }
    return "unknown";
}

SamplerKind sampler_kind_from_string(const std::string& name) {
    if (name == "exact") return SamplerKind::exact;
    if (name == "metropolis") return SamplerKind::metropolis;
    if (name == "gibbs") return SamplerKind::gibbs;
    if (name == "annealer" || name == "annealer-emulator") return SamplerKind::annealer;
    throw Error(Errc::invalid_argument, "unknown sampler kind '" + name + "'");
}

void SamplerSpec::validate() const {
    if (n_samples < 1) throw Error(Errc::invalid_argument, "n_samples must be >= 1");
    if (burn_in < 0) throw Error(Errc::invalid_argument, "burn_in must be >= 0");
    if (thinning < 1) throw Error(Errc::invalid_argument, "thinning must be >= 1");
    if (n_chains < 1) throw Error(Errc::invalid_argument, "n_chains must be >= 1");
}

SampleBatch merge_batches(std::vector<SampleBatch> parts) {
    SampleBatch out;
    double acc = 0.0;
    double brk = 0.0;
    std::size_t total = 0;
    for (auto& p : parts) {
        if (p.weighted()) throw Error(Errc::invalid_argument, "weighted batches cannot be merged");
        const double n = static_cast<double>(p.size());
        acc += n * p.diagnostics.acceptance_rate;
        brk += n * p.diagnostics.chain_break_rate;
        total += p.size();
        out.diagnostics.sweeps_per_sample = p.diagnostics.sweeps_per_sample;
        std::move(p.visible.begin(), p.visible.end(), std::back_inserter(out.visible));
        std::move(p.hidden.begin(), p.hidden.end(), std::back_inserter(out.hidden));
    }
    if (total > 0) {
        out.diagnostics.acceptance_rate = acc / static_cast<double>(total);
        out.diagnostics.chain_break_rate = brk / static_cast<double>(total);
    }
    return out;
}

SampleBatch sample_exact(const RbmParams& params, int n_sites) {
    if (n_sites != params.n_visible()) {
        throw Error(Errc::length_mismatch, "site count does not match the visible layer");
    }
    if (n_sites > kExactSamplerMaxSites) {
        throw Error(Errc::too_large, "exact enumeration is capped at " + std::to_string(kExactSamplerMaxSites) +
                                         " sites, got " + std::to_string(n_sites));
    }
    const std::uint64_t count = std::uint64_t{1} << n_sites;
    SampleBatch batch;
    batch.visible.reserve(count);
    std::vector<double> log_w(count);
    for (std::uint64_t bits = 0; bits < count; ++bits) {
        batch.visible.push_back(SpinConfig::from_bits(bits, static_cast<std::size_t>(n_sites)));
        log_w[bits] = 2.0 * log_psi(params, batch.visible.back());
    }
    const double top = *std::max_element(log_w.begin(), log_w.end());
    batch.weights.resize(count);
    double z = 0.0;
    for (std::uint64_t k = 0; k < count; ++k) {
        batch.weights[k] = std::exp(log_w[k] - top);
        z += batch.weights[k];
    }
    for (auto& w : batch.weights) w /= z;
    batch.diagnostics.sweeps_per_sample = 0;
    return batch;
}

SampleBatch metropolis_sample(const RbmParams& params, const SamplerSpec& spec, Rng& rng) {
    spec.validate();
    params.check_finite();
    const auto n = static_cast<std::size_t>(params.n_visible());
    return run_chains(spec, rng, [&](int n_keep, Rng& r) {
        ChainResult res;
        SpinConfig v = random_config(n, r);
        ThetaCache cache = theta(params, v);
        auto sweep = [&](bool count) {
            for (std::size_t k = 0; k < n; ++k) {
                const auto i = static_cast<std::size_t>(uniform_index(r, n));
                const double ratio = psi_ratio(params, v, i, cache);
                const double p = ratio * ratio;
                const bool accept = p >= 1.0 || uniform01(r) < p;
                if (accept) apply_flip(params, v, i, cache);
                if (count) {
                    ++res.proposed;
                    res.accepted += accept ? 1 : 0;
                }
            }
        };
        for (int s = 0; s < spec.burn_in; ++s) sweep(false);
        res.batch.visible.reserve(static_cast<std::size_t>(n_keep));
        for (int s = 0; s < n_keep; ++s) {
            for (int t = 0; t < spec.thinning; ++t) sweep(true);
            res.batch.visible.push_back(v);
        }
        return res;
    });
}

Eigen::VectorXd gibbs_conditional_hidden(const RbmParams& params, const SpinConfig& v) {
    const ThetaCache cache = theta(params, v);
    return cache.theta.unaryExpr([](double t) { return plus_probability(t); });
}

Eigen::VectorXd gibbs_conditional_visible(const RbmParams& params, const SpinConfig& h) {
    if (static_cast<int>(h.size()) != params.n_hidden()) {
        throw Error(Errc::length_mismatch, "hidden configuration does not match the hidden layer size");
    }
    const Eigen::VectorXd field = params.a + params.W.transpose() * h.to_vector();
    return field.unaryExpr([](double t) { return plus_probability(t); });
}

SampleBatch gibbs_sample(const RbmParams& params, const SamplerSpec& spec, Rng& rng) {
    spec.validate();
    params.check_finite();
    const auto n = static_cast<std::size_t>(params.n_visible());
    return run_chains(spec, rng, [&](int n_keep, Rng& r) {
        ChainResult res;
        SpinConfig v = random_config(n, r);
        SpinConfig h;
        auto sweep = [&] {
            h = draw_layer(theta(params, v).theta, r);
            v = draw_layer(params.a + params.W.transpose() * h.to_vector(), r);
        };
        for (int s = 0; s < spec.burn_in; ++s) sweep();
        res.batch.visible.reserve(static_cast<std::size_t>(n_keep));
        res.batch.hidden.reserve(static_cast<std::size_t>(n_keep));
        for (int s = 0; s < n_keep; ++s) {
            for (int t = 0; t < spec.thinning; ++t) sweep();
            res.batch.visible.push_back(v);
            res.batch.hidden.push_back(h);
        }
        return res;
    });
}

double estimate_mean(const SampleBatch& batch, const ScalarObservable& f) {
    if (batch.size() == 0) throw Error(Errc::invalid_argument, "cannot average over an empty batch");
    double sum = 0.0;
    for (std::size_t k = 0; k < batch.size(); ++k) sum += batch.weight(k) * f(batch.visible[k]);
    return sum;
}

Eigen::VectorXd estimate_mean(const SampleBatch& batch, const VectorObservable& f) {
    if (batch.size() == 0) throw Error(Errc::invalid_argument, "cannot average over an empty batch");
    Eigen::VectorXd sum = batch.weight(0) * f(batch.visible[0]);
    for (std::size_t k = 1; k < batch.size(); ++k) sum += batch.weight(k) * f(batch.visible[k]);
    return sum;
}

SampleBatch ExactSampler::sample(const RbmParams& params, const SampleContext&, Rng&) const {
    return sample_exact(params, params.n_visible());
}

MetropolisSampler::MetropolisSampler(SamplerSpec spec) : spec_(spec) { spec_.validate(); }

SampleBatch MetropolisSampler::sample(const RbmParams& params, const SampleContext&, Rng& rng) const {
    return metropolis_sample(params, spec_, rng);
}

GibbsSampler::GibbsSampler(SamplerSpec spec) : spec_(spec) { spec_.validate(); }

SampleBatch GibbsSampler::sample(const RbmParams& params, const SampleContext&, Rng& rng) const {
    return gibbs_sample(params, spec_, rng);
}

double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
    if (p.size() != q.size()) throw Error(Errc::length_mismatch, "distributions have different supports");
    double d = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) d += std::abs(p[k] - q[k]);
    return 0.5 * d;
}

std::vector<double> visible_histogram(const SampleBatch& batch, int n_visible) {
    if (n_visible > kExactSamplerMaxSites) throw Error(Errc::too_large, "histogram support too large");
    std::vector<double> hist(std::size_t{1} << n_visible, 0.0);
    for (std::size_t k = 0; k < batch.size(); ++k) hist[batch.visible[k].to_bits()] += batch.weight(k);
    return hist;
}

}  // namespace annealnqs
