#include "annealnqs/chimera.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>

#include "annealnqs/error.hpp"
#include "annealnqs/parallel.hpp"

namespace annealnqs {

namespace {

double plus_probability(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-2.0 * x));
    const double e = std::exp(2.0 * x);
    return e / (1.0 + e);
}

double clip(double value, double bound, int& clip_count) {
    if (value > bound) {
        ++clip_count;
        return bound;
    }
    if (value < -bound) {
        ++clip_count;
        return -bound;
    }
    return value;
}

}  // namespace

ChimeraGraph::ChimeraGraph(int n) : n_(n) {
    if (n < 1) throw Error(Errc::invalid_argument, "chimera size must be >= 1");
    const int nq = n_qubits();
    adjacency_.resize(static_cast<std::size_t>(nq));
    edge_lookup_.resize(static_cast<std::size_t>(nq));
    auto add = [&](int q1, int q2) {
        const int e = static_cast<int>(edges_.size());
        edges_.emplace_back(std::min(q1, q2), std::max(q1, q2));
        adjacency_[static_cast<std::size_t>(q1)].push_back(q2);
        adjacency_[static_cast<std::size_t>(q2)].push_back(q1);
        edge_lookup_[static_cast<std::size_t>(q1)].emplace_back(q2, e);
        edge_lookup_[static_cast<std::size_t>(q2)].emplace_back(q1, e);
    };
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            for (int k = 0; k < 4; ++k) {
                for (int l = 4; l < 8; ++l) add(qubit(r, c, k), qubit(r, c, l));
            }
        }
    }
    for (int r = 0; r + 1 < n; ++r) {
        for (int c = 0; c < n; ++c) {
            for (int k = 0; k < 4; ++k) add(qubit(r, c, k), qubit(r + 1, c, k));
        }
    }
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c + 1 < n; ++c) {
            for (int l = 4; l < 8; ++l) add(qubit(r, c, l), qubit(r, c + 1, l));
        }
    }
}

int ChimeraGraph::edge_index(int q1, int q2) const {
    if (q1 < 0 || q2 < 0 || q1 >= n_qubits() || q2 >= n_qubits()) return -1;
    for (const auto& [nbr, e] : edge_lookup_[static_cast<std::size_t>(q1)]) {
        if (nbr == q2) return e;
    }
    return -1;
}

ChimeraGraph build_chimera(int n) { return ChimeraGraph(n); }

int ChimeraEmbedding::qubits_used() const {
    int count = 0;
    for (const auto& c : visible_chains) count += static_cast<int>(c.size());
    for (const auto& c : hidden_chains) count += static_cast<int>(c.size());
    return count;
}

std::vector<std::vector<int>> ChimeraEmbedding::all_chains() const {
    std::vector<std::vector<int>> out = visible_chains;
    out.insert(out.end(), hidden_chains.begin(), hidden_chains.end());
    return out;
}

ChimeraEmbedding embed_rbm(int n_visible, int n_hidden, std::shared_ptr<const ChimeraGraph> graph,
                           double chain_coupling) {
    if (!graph) throw Error(Errc::invalid_argument, "embedding needs a chimera graph");
    const int n = graph->size();
    if (n_visible < 1 || n_hidden < 1) throw Error(Errc::invalid_argument, "RBM needs N >= 1 and M >= 1");
    if (n_visible > 4 * n || n_hidden > 4 * n) {
        throw Error(Errc::capacity_exceeded,
                    "RBM with " + std::to_string(n_visible) + " visible and " + std::to_string(n_hidden) +
                        " hidden units does not fit chimera C_" + std::to_string(n) + ": at most " +
                        std::to_string(4 * n) + " per layer (L_max = 8n = " + std::to_string(8 * n) + ")");
    }
    if (!(chain_coupling > 0.0)) throw Error(Errc::invalid_argument, "chain coupling must be > 0");
    ChimeraEmbedding emb;
    emb.graph = graph;
    emb.n_visible = n_visible;
    emb.n_hidden = n_hidden;
    emb.chain_coupling = chain_coupling;
    const int rows_used = (n_hidden + 3) / 4;
    const int cols_used = (n_visible + 3) / 4;
    for (int i = 0; i < n_visible; ++i) {
        std::vector<int> chain;
        for (int r = 0; r < rows_used; ++r) chain.push_back(graph->qubit(r, i / 4, i % 4));
        emb.visible_chains.push_back(std::move(chain));
    }
    for (int j = 0; j < n_hidden; ++j) {
        std::vector<int> chain;
        for (int c = 0; c < cols_used; ++c) chain.push_back(graph->qubit(j / 4, c, 4 + j % 4));
        emb.hidden_chains.push_back(std::move(chain));
    }
    emb.host_edges.assign(static_cast<std::size_t>(n_hidden), std::vector<int>(static_cast<std::size_t>(n_visible), -1));
    for (int j = 0; j < n_hidden; ++j) {
        for (int i = 0; i < n_visible; ++i) {
            const int q_v = graph->qubit(j / 4, i / 4, i % 4);
            const int q_h = graph->qubit(j / 4, i / 4, 4 + j % 4);
            emb.host_edges[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = graph->edge_index(q_v, q_h);
        }
    }
    return emb;
}

ChimeraEmbedding embed_rbm(int n_visible, int n_hidden, int n, double chain_coupling) {
    if (n < 1) throw Error(Errc::invalid_argument, "chimera size must be >= 1");
    return embed_rbm(n_visible, n_hidden, std::make_shared<const ChimeraGraph>(n), chain_coupling);
}

std::vector<std::string> check_embedding(const ChimeraEmbedding& emb) {
    std::vector<std::string> problems;
    const auto& g = *emb.graph;
    const int n = g.size();
    if (emb.n_visible > 4 * n || emb.n_hidden > 4 * n) problems.emplace_back("capacity exceeded");
    std::set<int> seen;
    const auto chains = emb.all_chains();
    for (std::size_t c = 0; c < chains.size(); ++c) {
        if (chains[c].empty()) problems.push_back("chain " + std::to_string(c) + " is empty");
        for (std::size_t k = 0; k < chains[c].size(); ++k) {
            const int q = chains[c][k];
            if (q < 0 || q >= g.n_qubits()) problems.push_back("chain " + std::to_string(c) + " has an invalid qubit");
            if (!seen.insert(q).second) problems.push_back("qubit " + std::to_string(q) + " is shared by two chains");
            if (k > 0 && !g.adjacent(chains[c][k - 1], q)) {
                problems.push_back("chain " + std::to_string(c) + " is not connected at position " + std::to_string(k));
            }
        }
    }
    for (int j = 0; j < emb.n_hidden; ++j) {
        const auto& hc = emb.hidden_chains[static_cast<std::size_t>(j)];
        for (int i = 0; i < emb.n_visible; ++i) {
            const auto& vc = emb.visible_chains[static_cast<std::size_t>(i)];
            const int e = emb.host_edges[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
            if (e < 0) {
                problems.push_back("no host coupler for W(" + std::to_string(j) + "," + std::to_string(i) + ")");
                continue;
            }
            const auto [q1, q2] = g.edges()[static_cast<std::size_t>(e)];
            auto in = [](const std::vector<int>& c, int q) { return std::find(c.begin(), c.end(), q) != c.end(); };
            if (!((in(vc, q1) && in(hc, q2)) || (in(vc, q2) && in(hc, q1)))) {
                problems.push_back("host coupler for W(" + std::to_string(j) + "," + std::to_string(i) +
                                   ") does not join the two chains");
            }
        }
    }
    return problems;
}

std::string IsingInstance::to_text() const {
    std::ostringstream os;
    os << std::setprecision(17);
    for (int q : active_qubits) os << q << ' ' << B[static_cast<std::size_t>(q)] << '\n';
    const auto& edges = graph->edges();
    for (std::size_t e = 0; e < edges.size(); ++e) {
        if (role[e] == CouplerRole::unused) continue;
        os << edges[e].first << ' ' << edges[e].second << ' ' << J[e] << '\n';
    }
    return os.str();
}

std::pair<double, double> IsingInstance::energy_parts(const std::vector<std::int8_t>& sigma) const {
    double logical = 0.0;
    double chain = 0.0;
    for (int q : active_qubits) logical -= B[static_cast<std::size_t>(q)] * sigma[static_cast<std::size_t>(q)];
    const auto& edges = graph->edges();
    for (std::size_t e = 0; e < edges.size(); ++e) {
        if (role[e] == CouplerRole::unused) continue;
        const double term = -J[e] * sigma[static_cast<std::size_t>(edges[e].first)] *
                            sigma[static_cast<std::size_t>(edges[e].second)];
        (role[e] == CouplerRole::logical ? logical : chain) += term;
    }
    return {logical, chain};
}

IsingInstance lower(const RbmParams& params, const ChimeraEmbedding& emb, double beta_x) {
    if (!(beta_x > 0.0) || !std::isfinite(beta_x)) {
        throw Error(Errc::invalid_argument, "beta_x must be finite and > 0");
    }
    if (params.n_visible() != emb.n_visible || params.n_hidden() != emb.n_hidden) {
        throw Error(Errc::length_mismatch, "RBM size does not match the embedding");
    }
    params.check_finite();
    const auto& g = *emb.graph;
    IsingInstance inst;
    inst.graph = emb.graph;
    inst.beta_x = beta_x;
    inst.J.assign(g.edges().size(), 0.0);
    inst.B.assign(static_cast<std::size_t>(g.n_qubits()), 0.0);
    inst.role.assign(g.edges().size(), CouplerRole::unused);
    inst.chains = emb.all_chains();

    int clipped_chain = 0;
    const double chain_j = clip(emb.chain_coupling, kMaxCoupler, clipped_chain);
    for (const auto& chain : inst.chains) {
        for (std::size_t k = 1; k < chain.size(); ++k) {
            const int e = g.edge_index(chain[k - 1], chain[k]);
            inst.J[static_cast<std::size_t>(e)] = chain_j;
            inst.role[static_cast<std::size_t>(e)] = CouplerRole::chain;
            inst.clip_report += clipped_chain;
        }
        inst.active_qubits.insert(inst.active_qubits.end(), chain.begin(), chain.end());
    }
    if (clipped_chain > 0) {
        inst.warnings.push_back("chain coupling " + std::to_string(emb.chain_coupling) + " clipped to " +
                                std::to_string(kMaxCoupler));
    }
    std::sort(inst.active_qubits.begin(), inst.active_qubits.end());

    auto spread = [&](const std::vector<int>& chain, double bias) {
        const double per_qubit = bias / beta_x / static_cast<double>(chain.size());
        for (int q : chain) inst.B[static_cast<std::size_t>(q)] = clip(per_qubit, kMaxBias, inst.clip_report);
    };
    for (int i = 0; i < emb.n_visible; ++i) spread(emb.visible_chains[static_cast<std::size_t>(i)], params.a[i]);
    for (int j = 0; j < emb.n_hidden; ++j) spread(emb.hidden_chains[static_cast<std::size_t>(j)], params.b[j]);
    for (int j = 0; j < emb.n_hidden; ++j) {
        for (int i = 0; i < emb.n_visible; ++i) {
            const auto e = static_cast<std::size_t>(emb.host_edges[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)]);
            inst.J[e] = clip(params.W(j, i) / beta_x, kMaxCoupler, inst.clip_report);
            inst.role[e] = CouplerRole::logical;
        }
    }
    return inst;
}

namespace {

// Log-probability couplings of one active qubit.
struct QubitTerms {
    double field = 0.0;
    std::vector<std::pair<int, double>> logical;  // (qubit, weight)
    std::vector<std::pair<int, double>> chain;
};

}  // namespace

EmulatorRun emulate_anneal(const IsingInstance& inst, double mismatch_x, int n_samples,
                           const EmulatorOptions& opt, Rng& rng) {
    if (!(mismatch_x > 0.0) || !std::isfinite(mismatch_x)) {
        throw Error(Errc::invalid_argument, "mismatch x must be finite and > 0");
    }
    if (!(opt.p_break >= 0.0 && opt.p_break < 1.0)) throw Error(Errc::invalid_argument, "p_break must lie in [0, 1)");
    if (n_samples < 1 || opt.sweeps_per_sample < 1 || opt.burn_in < 0 || opt.n_chains < 1) {
        throw Error(Errc::invalid_argument, "emulator needs n_samples >= 1, sweeps >= 1, burn_in >= 0");
    }
    const auto& g = *inst.graph;
    const auto nq = static_cast<std::size_t>(g.n_qubits());
    const double logical_scale = inst.beta_x * mismatch_x;
    const double chain_scale = inst.beta_x;

    std::vector<QubitTerms> terms(nq);
    for (int q : inst.active_qubits) terms[static_cast<std::size_t>(q)].field = logical_scale * inst.B[static_cast<std::size_t>(q)];
    const auto& edges = g.edges();
    for (std::size_t e = 0; e < edges.size(); ++e) {
        if (inst.role[e] == CouplerRole::unused) continue;
        const auto [q1, q2] = edges[e];
        const bool logical = inst.role[e] == CouplerRole::logical;
        const double w = (logical ? logical_scale : chain_scale) * inst.J[e];
        auto& t1 = terms[static_cast<std::size_t>(q1)];
        auto& t2 = terms[static_cast<std::size_t>(q2)];
        (logical ? t1.logical : t1.chain).emplace_back(q2, w);
        (logical ? t2.logical : t2.chain).emplace_back(q1, w);
    }
    std::vector<const std::vector<int>*> long_chains;
    for (const auto& c : inst.chains) {
        if (c.size() > 1) long_chains.push_back(&c);
    }

    const int chains = std::min(opt.n_chains, n_samples);
    const std::uint64_t base = rng();
    std::vector<std::vector<RawConfig>> parts(static_cast<std::size_t>(chains));
    std::vector<std::uint64_t> changed(static_cast<std::size_t>(chains), 0);
    std::vector<std::uint64_t> updates(static_cast<std::size_t>(chains), 0);

    parallel_for_chunks(static_cast<std::size_t>(chains), 1, [&](std::size_t c, std::size_t, std::size_t) {
        Rng r(derive_seed(base, c));
        RawConfig sigma(nq, 0);
        for (int q : inst.active_qubits) sigma[static_cast<std::size_t>(q)] = coin_flip(r) ? 1 : -1;
        auto logical_field = [&](int q) {
            const auto& t = terms[static_cast<std::size_t>(q)];
            double f = t.field;
            for (const auto& [o, w] : t.logical) f += w * sigma[static_cast<std::size_t>(o)];
            return f;
        };
        auto sweep = [&](bool count) {
            for (int q : inst.active_qubits) {
                const auto& t = terms[static_cast<std::size_t>(q)];
                double f = logical_field(q);
                for (const auto& [o, w] : t.chain) f += w * sigma[static_cast<std::size_t>(o)];
                const std::int8_t next = uniform01(r) < plus_probability(f) ? 1 : -1;
                if (count) {
                    ++updates[c];
                    changed[c] += next != sigma[static_cast<std::size_t>(q)] ? 1 : 0;
                }
                sigma[static_cast<std::size_t>(q)] = next;
            }
            // Whole-chain flips leave intra-chain couplers unchanged.
            for (const auto* chain : long_chains) {
                double delta = 0.0;
                for (int q : *chain) delta -= 2.0 * sigma[static_cast<std::size_t>(q)] * logical_field(q);
                if (uniform01(r) < plus_probability(0.5 * delta)) {
                    for (int q : *chain) sigma[static_cast<std::size_t>(q)] = static_cast<std::int8_t>(-sigma[static_cast<std::size_t>(q)]);
                }
            }
        };
        for (int s = 0; s < opt.burn_in; ++s) sweep(false);
        const int n_keep = n_samples / chains + (static_cast<int>(c) < n_samples % chains ? 1 : 0);
        auto& out = parts[c];
        out.reserve(static_cast<std::size_t>(n_keep));
        for (int s = 0; s < n_keep; ++s) {
            for (int t = 0; t < opt.sweeps_per_sample; ++t) sweep(true);
            RawConfig sample = sigma;
            if (opt.p_break > 0.0) {
                for (const auto& chain : inst.chains) {
                    if (uniform01(r) < opt.p_break) {
                        const int q = chain[uniform_index(r, chain.size())];
                        sample[static_cast<std::size_t>(q)] = static_cast<std::int8_t>(-sample[static_cast<std::size_t>(q)]);
                    }
                }
            }
            out.push_back(std::move(sample));
        }
    });

    EmulatorRun run;
    run.samples.reserve(static_cast<std::size_t>(n_samples));
    std::uint64_t total_changed = 0;
    std::uint64_t total_updates = 0;
    for (std::size_t c = 0; c < parts.size(); ++c) {
        std::move(parts[c].begin(), parts[c].end(), std::back_inserter(run.samples));
        total_changed += changed[c];
        total_updates += updates[c];
    }
    run.flip_rate = total_updates == 0 ? 0.0 : static_cast<double>(total_changed) / static_cast<double>(total_updates);
    return run;
}

DecodedSample decode(const RawConfig& raw, const ChimeraEmbedding& emb, Rng& rng) {
    if (static_cast<int>(raw.size()) != emb.graph->n_qubits()) {
        throw Error(Errc::length_mismatch, "raw configuration does not cover the chip");
    }
    DecodedSample out;
    auto vote = [&](const std::vector<std::vector<int>>& chains) {
        std::vector<SpinConfig::value_type> values;
        values.reserve(chains.size());
        for (const auto& chain : chains) {
            int sum = 0;
            int plus = 0;
            for (int q : chain) {
                const auto s = raw[static_cast<std::size_t>(q)];
                if (s != 1 && s != -1) {
                    throw Error(Errc::invalid_argument, "qubit " + std::to_string(q) + " has no value");
                }
                sum += s;
                plus += s > 0 ? 1 : 0;
            }
            if (plus != 0 && plus != static_cast<int>(chain.size())) ++out.broken_chains;
            if (sum > 0) {
                values.push_back(1);
            } else if (sum < 0) {
                values.push_back(-1);
            } else {
                values.push_back(coin_flip(rng) ? 1 : -1);
            }
        }
        return SpinConfig(std::move(values));
    };
    out.visible = vote(emb.visible_chains);
    out.hidden = vote(emb.hidden_chains);
    return out;
}

SampleBatch annealer_sample(const RbmParams& params, const ChimeraEmbedding& emb, double beta_x,
                            double mismatch_x, const SamplerSpec& spec, double p_break, Rng& rng) {
    spec.validate();
    const IsingInstance inst = lower(params, emb, beta_x);
    EmulatorOptions opt;
    opt.sweeps_per_sample = spec.thinning;
    opt.burn_in = spec.burn_in;
    opt.n_chains = spec.n_chains;
    opt.p_break = p_break;
    const EmulatorRun run = emulate_anneal(inst, mismatch_x, spec.n_samples, opt, rng);

    SampleBatch batch;
    batch.visible.reserve(run.samples.size());
    batch.hidden.reserve(run.samples.size());
    std::uint64_t broken = 0;
    Rng tie_rng(rng());
    for (const auto& raw : run.samples) {
        DecodedSample d = decode(raw, emb, tie_rng);
        broken += static_cast<std::uint64_t>(d.broken_chains);
        batch.visible.push_back(std::move(d.visible));
        batch.hidden.push_back(std::move(d.hidden));
    }
    const double n_chain_reads = static_cast<double>(run.samples.size()) * static_cast<double>(emb.n_visible + emb.n_hidden);
    batch.diagnostics.chain_break_rate = static_cast<double>(broken) / n_chain_reads;
    batch.diagnostics.acceptance_rate = run.flip_rate;
    batch.diagnostics.sweeps_per_sample = spec.thinning;
    return batch;
}

AnnealerSampler::AnnealerSampler(ChimeraEmbedding embedding, SamplerSpec spec, double mismatch_x, double beta_x0,
                                 double p_break)
    : embedding_(std::move(embedding)), spec_(spec), device_beta_(mismatch_x * beta_x0), p_break_(p_break) {
    spec_.validate();
    if (!(mismatch_x > 0.0) || !(beta_x0 > 0.0)) throw Error(Errc::invalid_argument, "mismatch and beta_x0 must be > 0");
    if (!(p_break >= 0.0 && p_break < 1.0)) throw Error(Errc::invalid_argument, "p_break must lie in [0, 1)");
}

SampleBatch AnnealerSampler::sample(const RbmParams& params, const SampleContext& ctx, Rng& rng) const {
    return annealer_sample(params, embedding_, ctx.beta_x, device_beta_ / ctx.beta_x, spec_, p_break_, rng);
}

}  // namespace annealnqs
