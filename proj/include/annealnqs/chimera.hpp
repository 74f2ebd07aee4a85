#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "annealnqs/lattice.hpp"
#include "annealnqs/rbm.hpp"
#include "annealnqs/rng.hpp"
#include "annealnqs/sampling.hpp"

namespace annealnqs {

/// Hardware coupler range of the emulated chip.
inline constexpr double kMaxCoupler = 1.0;
inline constexpr double kMaxBias = 2.0;

/// n x n grid of K_{4,4} unit cells. Qubit numbering is cell row-major; inside
/// a cell indices 0-3 are the vertical partition and 4-7 the horizontal one.
/// Vertical qubits couple to the same index in the cells above and below,
/// horizontal qubits to the same index in the cells left and right.
class ChimeraGraph {
   public:
    explicit ChimeraGraph(int n);

    int size() const noexcept { return n_; }
    int n_qubits() const noexcept { return 8 * n_ * n_; }
    int qubit(int row, int col, int k) const noexcept { return 8 * (row * n_ + col) + k; }

    const std::vector<std::pair<int, int>>& edges() const noexcept { return edges_; }
    /// Index into edges() or -1 when the qubits are not coupled.
    int edge_index(int q1, int q2) const;
    bool adjacent(int q1, int q2) const { return edge_index(q1, q2) >= 0; }
    const std::vector<int>& neighbors(int q) const { return adjacency_[static_cast<std::size_t>(q)]; }

   private:
    int n_;
    std::vector<std::pair<int, int>> edges_;
    std::vector<std::vector<int>> adjacency_;
    std::vector<std::vector<std::pair<int, int>>> edge_lookup_;  // (neighbor, edge) per qubit
};

ChimeraGraph build_chimera(int n);

/// Neuron-to-chain map. Visible unit i is a chain of vertical-partition qubits
/// (index i % 4) down cell column i / 4; hidden unit j a chain of
/// horizontal-partition qubits (index 4 + j % 4) along cell row j / 4. Chains
/// only extend over the rows (columns) populated by the other layer.
struct ChimeraEmbedding {
    std::shared_ptr<const ChimeraGraph> graph;
    int n_visible = 0;
    int n_hidden = 0;
    std::vector<std::vector<int>> visible_chains;
    std::vector<std::vector<int>> hidden_chains;
    /// host_edges[j][i]: the single physical coupler carrying W_ji.
    std::vector<std::vector<int>> host_edges;
    double chain_coupling = 1.0;

    int qubits_used() const;
    /// Visible chains followed by hidden chains.
    std::vector<std::vector<int>> all_chains() const;
};

ChimeraEmbedding embed_rbm(int n_visible, int n_hidden, int n, double chain_coupling = 1.0);
ChimeraEmbedding embed_rbm(int n_visible, int n_hidden, std::shared_ptr<const ChimeraGraph> graph,
                           double chain_coupling = 1.0);

/// Structural problems with an embedding; empty when valid.
std::vector<std::string> check_embedding(const ChimeraEmbedding& embedding);

enum class CouplerRole : std::int8_t { unused, logical, chain };

/// Ising problem on the chip, E(σ) = -Σ B_q σ_q - Σ J_e σ_q σ_r.
struct IsingInstance {
    std::shared_ptr<const ChimeraGraph> graph;
    std::vector<double> J;            // per graph edge
    std::vector<double> B;            // per qubit
    std::vector<CouplerRole> role;    // per graph edge
    std::vector<std::vector<int>> chains;
    std::vector<int> active_qubits;   // sorted
    double beta_x = 1.0;              // estimate used for the lowering
    int clip_report = 0;
    std::vector<std::string> warnings;

    /// Lines `i B_i` for active qubits, then `i j J_ij` for used couplers.
    std::string to_text() const;
    /// Energy split into the programmed logical part and the chain part.
    std::pair<double, double> energy_parts(const std::vector<std::int8_t>& sigma) const;
};

/// J = W / β_x on one host coupler per pair, B = [a, b] / β_x spread equally
/// over each chain, chain couplers at +chain_coupling; all clipped to range.
IsingInstance lower(const RbmParams& params, const ChimeraEmbedding& embedding, double beta_x);

/// Chip-wide qubit values; 0 marks a qubit outside every chain.
using RawConfig = std::vector<std::int8_t>;

struct EmulatorOptions {
    int sweeps_per_sample = 1;
    int burn_in = 100;
    int n_chains = 1;
    double p_break = 0.0;
};

struct EmulatorRun {
    std::vector<RawConfig> samples;
    double flip_rate = 0.0;  // fraction of single-qubit updates that changed the qubit
};

/// Equilibrium emulator for p(σ) ∝ exp(-β_x [x E_logical(σ) + E_chain(σ)]).
/// Heat-bath sweeps over active qubits combined with whole-chain flips, then
/// each chain of each retained sample loses one uniformly chosen qubit with
/// probability p_break.
EmulatorRun emulate_anneal(const IsingInstance& instance, double mismatch_x, int n_samples,
                           const EmulatorOptions& options, Rng& rng);

struct DecodedSample {
    SpinConfig visible;
    SpinConfig hidden;
    int broken_chains = 0;
};

/// Majority vote per chain, fair coin on ties.
DecodedSample decode(const RawConfig& raw, const ChimeraEmbedding& embedding, Rng& rng);

SampleBatch annealer_sample(const RbmParams& params, const ChimeraEmbedding& embedding, double beta_x,
                            double mismatch_x, const SamplerSpec& spec, double p_break, Rng& rng);

/// Emulated device with a fixed true inverse temperature β = x0 · β_x0. Each
/// call lowers with the current estimate β_x and samples at mismatch β / β_x.
class AnnealerSampler final : public Sampler {
   public:
    AnnealerSampler(ChimeraEmbedding embedding, SamplerSpec spec, double mismatch_x, double beta_x0,
                    double p_break);
    SamplerKind kind() const override { return SamplerKind::annealer; }
    SampleBatch sample(const RbmParams& params, const SampleContext& ctx, Rng& rng) const override;
    bool uses_beta_x() const override { return true; }

    double device_beta() const noexcept { return device_beta_; }
    const ChimeraEmbedding& embedding() const noexcept { return embedding_; }

   private:
    ChimeraEmbedding embedding_;
    SamplerSpec spec_;
    double device_beta_;
    double p_break_;
};

}  // namespace annealnqs
