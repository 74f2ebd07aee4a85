#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "annealnqs/checkpoint.hpp"
#include "annealnqs/chimera.hpp"
#include "annealnqs/error.hpp"
#include "annealnqs/experiment.hpp"
#include "annealnqs/reference.hpp"

using namespace annealnqs;

namespace {

struct GlobalOptions {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<int> checkpoint_every;
};

void print_diagnostics(const std::vector<Diagnostic>& diags) {
    for (const auto& d : diags) {
        std::cerr << "error [" << d.code << "] " << (d.field.empty() ? "<root>" : d.field) << ": " << d.message << '\n';
    }
}

// Loads and validates a config, applying global overrides. Returns nullopt
// after printing diagnostics.
std::optional<ExperimentConfig> load_checked(const std::string& path, const GlobalOptions& g) {
    ParsedConfig parsed = load_config(path);
    if (!parsed.diagnostics.empty()) {
        print_diagnostics(parsed.diagnostics);
        return std::nullopt;
    }
    ExperimentConfig cfg = parsed.config;
    if (g.seed) cfg.seed = *g.seed;
    if (g.out) cfg.out_dir = *g.out;
    if (g.checkpoint_every) cfg.checkpoint_every = *g.checkpoint_every;
    const auto diags = validate_config(cfg);
    if (!diags.empty()) {
        print_diagnostics(diags);
        return std::nullopt;
    }
    return cfg;
}

std::vector<double> parse_values(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::size_t used = 0;
        const double v = std::stod(item, &used);
        if (used != item.size()) throw std::invalid_argument(item);
        out.push_back(v);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Variational Monte Carlo for the transverse-field Ising model with RBM wave functions"};
    app.require_subcommand(1);
    GlobalOptions g;
    std::uint64_t seed = 0;
    std::string out;
    int checkpoint_every = 0;
    auto* seed_opt = app.add_option("--seed", seed, "Override the experiment seed");
    auto* out_opt = app.add_option("--out", out, "Override the output directory");
    auto* ckpt_opt = app.add_option("--checkpoint-every", checkpoint_every, "Write a checkpoint every K iterations");
    // Subcommands pass global flags up to the parent parser.
    app.fallthrough();

    std::string config_path;
    auto* train_cmd = app.add_subcommand("train", "Run one SR optimization from a JSON config");
    train_cmd->add_option("config", config_path, "Experiment config")->required();

    std::string sweep_param;
    std::string sweep_values;
    auto* sweep_cmd = app.add_subcommand("sweep", "Repeat a run over values of one parameter");
    sweep_cmd->add_option("config", config_path, "Experiment config")->required();
    sweep_cmd->add_option("--param", sweep_param, "x, h, N, p_break or gamma")->required();
    sweep_cmd->add_option("--values", sweep_values, "Comma separated values")->required();

    std::string ref_kind = "chain";
    int ref_n = 8;
    int ref_lx = 0;
    int ref_ly = 0;
    double ref_h = 0.5;
    std::string ref_method = "auto";
    auto* ref_cmd = app.add_subcommand("reference", "Print the exact ground-state energy");
    // --h is the field, so help is long-form only here.
    ref_cmd->set_help_flag("--help", "Print this help message and exit");
    ref_cmd->add_option("--kind", ref_kind, "chain or torus")->check(CLI::IsMember({"chain", "torus"}));
    ref_cmd->add_option("--n", ref_n, "Chain length");
    ref_cmd->add_option("--lx", ref_lx, "Torus width");
    ref_cmd->add_option("--ly", ref_ly, "Torus height");
    ref_cmd->add_option("--h", ref_h, "Transverse field");
    ref_cmd->add_option("--method", ref_method, "auto, free-fermion, dense-ed or lanczos")
        ->check(CLI::IsMember({"auto", "free-fermion", "dense-ed", "lanczos"}));

    int emb_n = 2;
    int emb_visible = 8;
    int emb_hidden = 8;
    double emb_chain = 1.0;
    double emb_beta = 0.0;
    auto* emb_cmd = app.add_subcommand("embed-report", "Describe the chimera embedding of an RBM");
    emb_cmd->add_option("--n", emb_n, "Chimera grid size");
    emb_cmd->add_option("--visible", emb_visible, "Visible units");
    emb_cmd->add_option("--hidden", emb_hidden, "Hidden units");
    emb_cmd->add_option("--chain-coupling", emb_chain, "Chain coupler strength in units of beta_x");
    emb_cmd->add_option("--lower-beta", emb_beta,
                        "Also lower random parameters at this beta_x and print the Ising instance");

    auto* validate_cmd = app.add_subcommand("validate", "Check a config without running it");
    validate_cmd->add_option("config", config_path, "Experiment config")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitInvalidConfig;
    }
    if (seed_opt->count()) g.seed = seed;
    if (out_opt->count()) g.out = out;
    if (ckpt_opt->count()) g.checkpoint_every = checkpoint_every;

    try {
        if (*train_cmd) {
            const auto cfg = load_checked(config_path, g);
            if (!cfg) return kExitInvalidConfig;
            return run_experiment(*cfg, std::cout);
        }
        if (*sweep_cmd) {
            const auto cfg = load_checked(config_path, g);
            if (!cfg) return kExitInvalidConfig;
            std::vector<double> values;
            try {
                values = parse_values(sweep_values);
            } catch (const std::exception&) {
                std::cerr << "error: --values must be a comma separated list of numbers\n";
                return kExitInvalidConfig;
            }
            return sweep(*cfg, sweep_param, values, std::cout);
        }
        if (*validate_cmd) {
            const auto cfg = load_checked(config_path, g);
            if (!cfg) return kExitInvalidConfig;
            std::cout << "config ok: " << cfg->lattice.kind << " with " << make_lattice(*cfg).n_sites() << " sites, "
                      << hidden_units(*cfg) << " hidden units, " << cfg->sampler.kind << " sampler\n";
            return kExitOk;
        }
        if (*ref_cmd) {
            const TfimLattice lat =
                ref_kind == "torus" ? torus_lattice(ref_lx ? ref_lx : ref_n, ref_ly ? ref_ly : ref_n, ref_h)
                                    : chain_lattice(ref_n, ref_h);
            ReferenceResult r;
            if (ref_method == "auto") {
                r = reference_energy(lat);
            } else if (ref_method == "free-fermion") {
                if (lat.kind != LatticeKind::chain) throw Error(Errc::invalid_argument, "free-fermion needs a chain");
                r = exact_energy_1d(lat.n_sites(), ref_h);
            } else if (ref_method == "dense-ed") {
                r = dense_ground_energy(lat);
            } else {
                r = lanczos_ground_energy(lat);
            }
            std::cout << reference_to_json(r).dump(2) << '\n';
            return kExitOk;
        }
        if (*emb_cmd) {
            const ChimeraEmbedding emb = embed_rbm(emb_visible, emb_hidden, emb_n, emb_chain);
            nlohmann::json report;
            report["chimera_n"] = emb_n;
            report["physical_qubits"] = emb.graph->n_qubits();
            report["physical_couplers"] = emb.graph->edges().size();
            report["qubits_used"] = emb.qubits_used();
            report["visible_chains"] = emb.visible_chains;
            report["hidden_chains"] = emb.hidden_chains;
            report["problems"] = check_embedding(emb);
            if (emb_beta > 0.0) {
                Rng rng(g.seed.value_or(1));
                const RbmParams p = RbmParams::random(emb_visible, emb_hidden, rng);
                const IsingInstance inst = lower(p, emb, emb_beta);
                report["clip_report"] = inst.clip_report;
                report["warnings"] = inst.warnings;
                std::cout << report.dump(2) << '\n' << inst.to_text();
            } else {
                std::cout << report.dump(2) << '\n';
            }
            return kExitOk;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.code() == Errc::non_finite || e.code() == Errc::solver_failure ? kExitNumericalAbort
                                                                                 : kExitInvalidConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInvalidConfig;
    }
    return kExitOk;
}
