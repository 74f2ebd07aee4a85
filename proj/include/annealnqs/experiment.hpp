#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "annealnqs/reference.hpp"
#include "annealnqs/sampling.hpp"
#include "annealnqs/sr.hpp"

namespace annealnqs {

inline constexpr int kConfigSchemaVersion = 1;

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalidConfig = 2;
inline constexpr int kExitNumericalAbort = 3;

struct LatticeSpec {
    std::string kind = "chain";
    std::vector<int> dims{8};
    double h = 0.5;
};

struct SamplerConfig {
    std::string kind = "metropolis";
    int n_samples = 10000;
    int burn_in = 100;
    int thinning = 1;
    int n_chains = 4;
    // annealer emulator only
    double mismatch_x = 1.0;
    double p_break = 0.0;
    std::optional<int> chimera_n;
    double chain_coupling = 1.0;
};

struct ExperimentConfig {
    int schema_version = kConfigSchemaVersion;
    LatticeSpec lattice;
    double alpha = 1.0;
    SamplerConfig sampler;
    SrConfig sr;
    /// "auto", "free-fermion", "dense-ed", "lanczos" or "none".
    std::string reference = "auto";
    std::uint64_t seed = 1;
    std::string out_dir = "out";
    int checkpoint_every = 0;
    /// Final energy is averaged over this many trailing iterations.
    int tail_window = 20;
};

struct Diagnostic {
    std::string code;
    std::string field;
    std::string message;
};

/// Parse problems (wrong types, unknown keys) come back as diagnostics; the
/// returned config holds defaults for anything that failed to parse.
struct ParsedConfig {
    ExperimentConfig config;
    std::vector<Diagnostic> diagnostics;
};

ParsedConfig parse_config(const nlohmann::json& j);
ParsedConfig load_config(const std::string& path);
nlohmann::json config_to_json(const ExperimentConfig& config);

/// Empty iff the config can be run.
std::vector<Diagnostic> validate_config(const ExperimentConfig& config);

int hidden_units(const ExperimentConfig& config);
TfimLattice make_lattice(const ExperimentConfig& config);
std::unique_ptr<Sampler> make_sampler(const ExperimentConfig& config);
std::optional<ReferenceResult> compute_reference(const ExperimentConfig& config, const TfimLattice& lattice);

struct ExperimentResult {
    TrainResult train;
    std::optional<ReferenceResult> reference;
    double final_energy = 0.0;
    std::optional<double> delta_e;
    double wall_time = 0.0;
};

/// Runs a validated config in memory. Throws Error on invalid configs.
ExperimentResult execute_experiment(const ExperimentConfig& config, const StepCallback& on_step = {});

/// Mean of the last `window` energies (fewer if the history is shorter).
double tail_mean(const std::vector<double>& history, int window);

std::string csv_header();
std::string csv_row(const StepRecord& record);

/// Writes history.csv, summary.json and checkpoints under config.out_dir.
/// Returns kExitOk, kExitInvalidConfig or kExitNumericalAbort.
int run_experiment(const ExperimentConfig& config, std::ostream& log);

bool is_sweep_parameter(const std::string& name);
/// Copy of `base` with one parameter replaced; seed becomes base.seed + index.
ExperimentConfig sweep_point(const ExperimentConfig& base, const std::string& parameter, double value,
                             std::size_t index);

/// One run per value in out_dir/<parameter>_<index>, plus sweep_summary.csv
/// with columns value, final_delta_e, iterations.
int sweep(const ExperimentConfig& base, const std::string& parameter, const std::vector<double>& values,
          std::ostream& log);

}  // namespace annealnqs
