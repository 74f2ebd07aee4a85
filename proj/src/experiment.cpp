#include "annealnqs/experiment.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>

#include "annealnqs/checkpoint.hpp"
#include "annealnqs/chimera.hpp"
#include "annealnqs/error.hpp"

namespace annealnqs {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class Reader {
   public:
    explicit Reader(std::vector<Diagnostic>& diags) : diags_(diags) {}

    // Returns the sub-object at key, or nullptr if absent / not an object.
    const json* object(const json& parent, const std::string& key, const std::string& path) {
        if (!parent.contains(key)) return nullptr;
        const json& v = parent.at(key);
        if (!v.is_object()) {
            diags_.push_back({"field-type", path, "expected an object"});
            return nullptr;
        }
        return &v;
    }

    template <class T>
    void read(const json& parent, const std::string& key, const std::string& path, T& out) {
        if (!parent.contains(key)) return;
        const json& v = parent.at(key);
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) return type_error(path, "a boolean");
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) return type_error(path, "a string");
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) return type_error(path, "an integer");
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!v.is_number()) return type_error(path, "a number");
        }
        try {
            out = v.get<T>();
        } catch (const json::exception& e) {
            diags_.push_back({"field-type", path, e.what()});
        }
    }

    void allow(const json& obj, const std::string& path, std::initializer_list<const char*> keys) {
        std::set<std::string> known(keys.begin(), keys.end());
        for (auto it = obj.begin(); it != obj.end(); ++it) {
            if (!known.count(it.key())) {
                diags_.push_back({"unknown-field", path.empty() ? it.key() : path + "." + it.key(),
                                  "unrecognized configuration key"});
            }
        }
    }

   private:
    void type_error(const std::string& path, const char* what) {
        diags_.push_back({"field-type", path, std::string("expected ") + what});
    }

    std::vector<Diagnostic>& diags_;
};

std::string format_double(double x) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

bool is_stochastic(const std::string& kind) { return kind != "exact"; }

}  // namespace

ParsedConfig parse_config(const json& j) {
    ParsedConfig out;
    auto& c = out.config;
    Reader rd(out.diagnostics);
    if (!j.is_object()) {
        out.diagnostics.push_back({"config-parse", "", "configuration must be a JSON object"});
        return out;
    }
    rd.allow(j, "", {"schema_version", "lattice", "alpha", "sampler", "sr", "reference", "seed", "output"});
    rd.read(j, "schema_version", "schema_version", c.schema_version);
    if (const json* lat = rd.object(j, "lattice", "lattice")) {
        rd.allow(*lat, "lattice", {"kind", "dims", "h"});
        rd.read(*lat, "kind", "lattice.kind", c.lattice.kind);
        rd.read(*lat, "dims", "lattice.dims", c.lattice.dims);
        rd.read(*lat, "h", "lattice.h", c.lattice.h);
    }
    rd.read(j, "alpha", "alpha", c.alpha);
    if (const json* s = rd.object(j, "sampler", "sampler")) {
        rd.allow(*s, "sampler", {"kind", "n_samples", "burn_in", "thinning", "n_chains", "mismatch_x", "p_break",
                                 "chimera_n", "chain_coupling"});
        rd.read(*s, "kind", "sampler.kind", c.sampler.kind);
        rd.read(*s, "n_samples", "sampler.n_samples", c.sampler.n_samples);
        rd.read(*s, "burn_in", "sampler.burn_in", c.sampler.burn_in);
        rd.read(*s, "thinning", "sampler.thinning", c.sampler.thinning);
        rd.read(*s, "n_chains", "sampler.n_chains", c.sampler.n_chains);
        rd.read(*s, "mismatch_x", "sampler.mismatch_x", c.sampler.mismatch_x);
        rd.read(*s, "p_break", "sampler.p_break", c.sampler.p_break);
        if (s->contains("chimera_n") && !s->at("chimera_n").is_null()) {
            int n = 0;
            rd.read(*s, "chimera_n", "sampler.chimera_n", n);
            if (s->at("chimera_n").is_number_integer()) c.sampler.chimera_n = n;
        }
        rd.read(*s, "chain_coupling", "sampler.chain_coupling", c.sampler.chain_coupling);
    }
    if (const json* sr = rd.object(j, "sr", "sr")) {
        rd.allow(*sr, "sr", {"gamma", "lambda0", "lambda_decay", "lambda_floor", "iterations", "beta_x0",
                             "beta_adapt", "convergence_window", "convergence_tol", "divergence_threshold",
                             "tail_window"});
        rd.read(*sr, "gamma", "sr.gamma", c.sr.gamma);
        rd.read(*sr, "lambda0", "sr.lambda0", c.sr.lambda.initial);
        rd.read(*sr, "lambda_decay", "sr.lambda_decay", c.sr.lambda.decay);
        if (sr->contains("lambda_floor") && !sr->at("lambda_floor").is_null()) {
            double f = 0.0;
            rd.read(*sr, "lambda_floor", "sr.lambda_floor", f);
            if (sr->at("lambda_floor").is_number()) c.sr.lambda.floor = f;
        }
        rd.read(*sr, "iterations", "sr.iterations", c.sr.iterations);
        rd.read(*sr, "beta_x0", "sr.beta_x0", c.sr.beta_x0);
        if (const json* ba = rd.object(*sr, "beta_adapt", "sr.beta_adapt")) {
            rd.allow(*ba, "sr.beta_adapt", {"enabled", "max_relative_step"});
            rd.read(*ba, "enabled", "sr.beta_adapt.enabled", c.sr.beta_adapt.enabled);
            rd.read(*ba, "max_relative_step", "sr.beta_adapt.max_relative_step", c.sr.beta_adapt.max_relative_step);
        }
        rd.read(*sr, "convergence_window", "sr.convergence_window", c.sr.convergence_window);
        rd.read(*sr, "convergence_tol", "sr.convergence_tol", c.sr.convergence_tol);
        rd.read(*sr, "divergence_threshold", "sr.divergence_threshold", c.sr.divergence_threshold);
        rd.read(*sr, "tail_window", "sr.tail_window", c.tail_window);
    }
    rd.read(j, "reference", "reference", c.reference);
    rd.read(j, "seed", "seed", c.seed);
    if (const json* o = rd.object(j, "output", "output")) {
        rd.allow(*o, "output", {"dir", "checkpoint_every"});
        rd.read(*o, "dir", "output.dir", c.out_dir);
        rd.read(*o, "checkpoint_every", "output.checkpoint_every", c.checkpoint_every);
    }
    return out;
}

ParsedConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) {
        ParsedConfig p;
        p.diagnostics.push_back({"config-parse", path, "cannot open configuration file"});
        return p;
    }
    try {
        return parse_config(json::parse(is));
    } catch (const json::parse_error& e) {
        ParsedConfig p;
        p.diagnostics.push_back({"config-parse", path, e.what()});
        return p;
    }
}

json config_to_json(const ExperimentConfig& c) {
    json sampler = {{"kind", c.sampler.kind},
                    {"n_samples", c.sampler.n_samples},
                    {"burn_in", c.sampler.burn_in},
                    {"thinning", c.sampler.thinning},
                    {"n_chains", c.sampler.n_chains},
                    {"mismatch_x", c.sampler.mismatch_x},
                    {"p_break", c.sampler.p_break},
                    {"chain_coupling", c.sampler.chain_coupling}};
    sampler["chimera_n"] = c.sampler.chimera_n ? json(*c.sampler.chimera_n) : json(nullptr);
    json sr = {{"gamma", c.sr.gamma},
               {"lambda0", c.sr.lambda.initial},
               {"lambda_decay", c.sr.lambda.decay},
               {"iterations", c.sr.iterations},
               {"beta_x0", c.sr.beta_x0},
               {"beta_adapt", {{"enabled", c.sr.beta_adapt.enabled},
                               {"max_relative_step", c.sr.beta_adapt.max_relative_step}}},
               {"convergence_window", c.sr.convergence_window},
               {"convergence_tol", c.sr.convergence_tol},
               {"divergence_threshold", c.sr.divergence_threshold},
               {"tail_window", c.tail_window}};
    sr["lambda_floor"] = c.sr.lambda.floor ? json(*c.sr.lambda.floor) : json(nullptr);
    return {{"schema_version", c.schema_version},
            {"lattice", {{"kind", c.lattice.kind}, {"dims", c.lattice.dims}, {"h", c.lattice.h}}},
            {"alpha", c.alpha},
            {"sampler", sampler},
            {"sr", sr},
            {"reference", c.reference},
            {"seed", c.seed},
            {"output", {{"dir", c.out_dir}, {"checkpoint_every", c.checkpoint_every}}}};
}

int hidden_units(const ExperimentConfig& c) {
    if (c.lattice.dims.empty()) return 0;
    int n = 1;
    for (int d : c.lattice.dims) n *= d;
    return static_cast<int>(std::lround(c.alpha * n));
}

std::vector<Diagnostic> validate_config(const ExperimentConfig& c) {
    std::vector<Diagnostic> d;
    auto add = [&](const char* code, const char* field, std::string msg) { d.push_back({code, field, std::move(msg)}); };

    if (c.schema_version != kConfigSchemaVersion) {
        add("schema-version-unsupported", "schema_version",
            "schema_version " + std::to_string(c.schema_version) + " is not supported (expected " +
                std::to_string(kConfigSchemaVersion) + ")");
    }
    bool lattice_ok = true;
    int n_sites = 0;
    if (c.lattice.kind != "chain" && c.lattice.kind != "torus") {
        add("lattice-kind-unknown", "lattice.kind", "lattice kind must be 'chain' or 'torus', got '" + c.lattice.kind + "'");
        lattice_ok = false;
    } else {
        const std::size_t want = c.lattice.kind == "chain" ? 1 : 2;
        if (c.lattice.dims.size() != want) {
            add("lattice-dims-invalid", "lattice.dims",
                c.lattice.kind + " lattice needs " + std::to_string(want) + " dimension(s)");
            lattice_ok = false;
        } else {
            for (int x : c.lattice.dims) {
                if (x < 3) {
                    add("lattice-too-small", "lattice.dims", "every periodic dimension must be >= 3");
                    lattice_ok = false;
                    break;
                }
            }
        }
    }
    if (lattice_ok) {
        n_sites = 1;
        for (int x : c.lattice.dims) n_sites *= x;
    }
    if (!(c.lattice.h >= 0.0) || !std::isfinite(c.lattice.h)) add("field-negative", "lattice.h", "transverse field must be >= 0");
    const int m = hidden_units(c);
    if (!(c.alpha > 0.0)) {
        add("alpha-nonpositive", "alpha", "alpha must be > 0");
    } else if (lattice_ok && m < 1) {
        add("hidden-size-invalid", "alpha", "alpha * N rounds to zero hidden units");
    }

    const auto& s = c.sampler;
    const bool known_kind = s.kind == "exact" || s.kind == "metropolis" || s.kind == "gibbs" || s.kind == "annealer";
    if (!known_kind) add("sampler-kind-unknown", "sampler.kind", "unknown sampler kind '" + s.kind + "'");
    if (s.kind != "exact") {
        if (s.n_samples < 1) add("n-samples-nonpositive", "sampler.n_samples", "n_samples must be >= 1");
        if (s.burn_in < 0) add("burn-in-negative", "sampler.burn_in", "burn_in must be >= 0");
        if (s.thinning < 1) add("thinning-nonpositive", "sampler.thinning", "thinning must be >= 1");
        if (s.n_chains < 1) add("n-chains-nonpositive", "sampler.n_chains", "n_chains must be >= 1");
    }
    if (s.kind == "exact" && lattice_ok && n_sites > kExactSamplerMaxSites) {
        add("exact-too-large", "sampler.kind",
            "exact sampler enumerates 2^N states and is capped at N = " + std::to_string(kExactSamplerMaxSites));
    }
    if (s.kind == "annealer") {
        if (!s.chimera_n) {
            add("chimera-size-missing", "sampler.chimera_n", "annealer sampler requires chimera_n");
        } else if (*s.chimera_n < 1) {
            add("chimera-size-invalid", "sampler.chimera_n", "chimera_n must be >= 1");
        } else if (lattice_ok && (n_sites > 4 * *s.chimera_n || m > 4 * *s.chimera_n)) {
            add("chimera-capacity-exceeded", "sampler.chimera_n",
                "RBM with " + std::to_string(n_sites) + " visible and " + std::to_string(m) +
                    " hidden units does not fit chimera C_" + std::to_string(*s.chimera_n) + ": at most " +
                    std::to_string(4 * *s.chimera_n) + " per layer (L_max = 8n = " +
                    std::to_string(8 * *s.chimera_n) + ")");
        }
        if (!(s.mismatch_x > 0.0)) add("mismatch-nonpositive", "sampler.mismatch_x", "mismatch_x must be > 0");
        if (!(s.p_break >= 0.0 && s.p_break < 1.0)) add("p-break-out-of-range", "sampler.p_break", "p_break must lie in [0, 1)");
        if (!(s.chain_coupling > 0.0)) add("chain-coupling-nonpositive", "sampler.chain_coupling", "chain_coupling must be > 0");
    }

    const auto& sr = c.sr;
    if (!(sr.gamma > 0.0)) add("gamma-nonpositive", "sr.gamma", "gamma must be > 0");
    if (!(sr.lambda.initial >= 0.0)) add("lambda-invalid", "sr.lambda0", "lambda0 must be >= 0");
    if (!(sr.lambda.decay > 0.0 && sr.lambda.decay <= 1.0)) add("lambda-invalid", "sr.lambda_decay", "lambda_decay must lie in (0, 1]");
    if (sr.lambda.floor && !(*sr.lambda.floor > 0.0) && is_stochastic(s.kind)) {
        add("lambda-floor-nonpositive", "sr.lambda_floor", "stochastic samplers need a lambda floor > 0");
    }
    if (sr.lambda.floor && !(*sr.lambda.floor >= 0.0)) add("lambda-invalid", "sr.lambda_floor", "lambda_floor must be >= 0");
    if (sr.iterations < 1) add("iterations-nonpositive", "sr.iterations", "iterations must be >= 1");
    if (!(sr.beta_x0 > 0.0)) add("beta-x-nonpositive", "sr.beta_x0", "beta_x0 must be > 0");
    if (!(sr.beta_adapt.max_relative_step >= 0.0 && sr.beta_adapt.max_relative_step < 1.0)) {
        add("beta-step-invalid", "sr.beta_adapt.max_relative_step", "max_relative_step must lie in [0, 1)");
    }
    if (sr.convergence_window < 1) add("convergence-window-invalid", "sr.convergence_window", "convergence_window must be >= 1");
    if (c.tail_window < 1) add("tail-window-invalid", "sr.tail_window", "tail_window must be >= 1");

    if (c.reference != "auto" && c.reference != "none" && c.reference != "free-fermion" && c.reference != "dense-ed" &&
        c.reference != "lanczos") {
        add("reference-unknown", "reference", "unknown reference method '" + c.reference + "'");
    } else if (lattice_ok) {
        if (c.reference == "free-fermion" && (c.lattice.kind != "chain" || n_sites % 2 != 0 || n_sites < 4)) {
            add("reference-unavailable", "reference", "free-fermion reference needs an even chain with N >= 4");
        } else if (c.reference == "dense-ed" && n_sites > kDenseMaxSites) {
            add("reference-unavailable", "reference", "dense-ed reference is capped at " + std::to_string(kDenseMaxSites) + " sites");
        } else if ((c.reference == "lanczos" || c.reference == "auto") && n_sites > kLanczosMaxSites &&
                   !(c.lattice.kind == "chain" && n_sites % 2 == 0)) {
            add("reference-unavailable", "reference",
                "no reference available beyond " + std::to_string(kLanczosMaxSites) + " sites; use \"none\"");
        }
    }
    if (c.checkpoint_every < 0) add("checkpoint-every-negative", "output.checkpoint_every", "checkpoint_every must be >= 0");
    return d;
}

TfimLattice make_lattice(const ExperimentConfig& c) {
    return build_lattice(c.lattice.kind == "torus" ? LatticeKind::torus : LatticeKind::chain, c.lattice.dims, c.lattice.h);
}

std::unique_ptr<Sampler> make_sampler(const ExperimentConfig& c) {
    SamplerSpec spec;
    spec.kind = sampler_kind_from_string(c.sampler.kind);
    spec.n_samples = c.sampler.n_samples;
    spec.burn_in = c.sampler.burn_in;
    spec.thinning = c.sampler.thinning;
    spec.n_chains = c.sampler.n_chains;
    spec.seed = c.seed;
    switch (spec.kind) {
        case SamplerKind::exact: return std::make_unique<ExactSampler>();
        case SamplerKind::metropolis: return std::make_unique<MetropolisSampler>(spec);
        case SamplerKind::gibbs: return std::make_unique<GibbsSampler>(spec);
        case SamplerKind::annealer: {
            int n_sites = 1;
            for (int x : c.lattice.dims) n_sites *= x;
            auto emb = embed_rbm(n_sites, hidden_units(c), c.sampler.chimera_n.value_or(0), c.sampler.chain_coupling);
            return std::make_unique<AnnealerSampler>(std::move(emb), spec, c.sampler.mismatch_x, c.sr.beta_x0,
                                                     c.sampler.p_break);
        }
    }
    throw Error(Errc::invalid_argument, "unknown sampler kind");
}

std::optional<ReferenceResult> compute_reference(const ExperimentConfig& c, const TfimLattice& lattice) {
    if (c.reference == "none") return std::nullopt;
    if (c.reference == "auto") return reference_energy(lattice);
    switch (reference_method_from_string(c.reference)) {
        case ReferenceMethod::free_fermion: return exact_energy_1d(lattice.n_sites(), lattice.field);
        case ReferenceMethod::dense_ed: return dense_ground_energy(lattice);
        case ReferenceMethod::lanczos: return lanczos_ground_energy(lattice);
    }
    return std::nullopt;
}

double tail_mean(const std::vector<double>& history, int window) {
    if (history.empty()) return std::nan("");
    const std::size_t w = std::min<std::size_t>(history.size(), static_cast<std::size_t>(std::max(1, window)));
    double sum = 0.0;
    for (std::size_t k = history.size() - w; k < history.size(); ++k) sum += history[k];
    return sum / static_cast<double>(w);
}

ExperimentResult execute_experiment(const ExperimentConfig& c, const StepCallback& on_step) {
    const auto diags = validate_config(c);
    if (!diags.empty()) throw Error(Errc::invalid_argument, diags.front().field + ": " + diags.front().message);
    const auto start = std::chrono::steady_clock::now();
    const TfimLattice lattice = make_lattice(c);
    const auto sampler = make_sampler(c);
    ExperimentResult out;
    out.reference = compute_reference(c, lattice);

    Rng init_rng(derive_seed(c.seed, 0));
    const RbmParams params = RbmParams::random(lattice.n_sites(), hidden_units(c), init_rng);
    TrainState state = initial_state(params, c.sr, derive_seed(c.seed, 1));
    std::optional<double> ref;
    if (out.reference) ref = out.reference->energy;
    out.train = train(lattice, *sampler, c.sr, std::move(state), ref, on_step);
    out.final_energy = tail_mean(out.train.state.energy_history, c.tail_window);
    if (ref && !out.train.state.energy_history.empty()) out.delta_e = relative_error(out.final_energy, *ref);
    out.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

std::string csv_header() { return "iteration,energy,delta_e,acceptance,chain_break_rate,beta_x,lambda"; }

std::string csv_row(const StepRecord& r) {
    std::string row = std::to_string(r.iteration);
    row += ',' + format_double(r.energy);
    row += ',' + (r.delta_e ? format_double(*r.delta_e) : std::string());
    row += ',' + format_double(r.acceptance);
    row += ',' + format_double(r.chain_break_rate);
    row += ',' + format_double(r.beta_x);
    row += ',' + format_double(r.lambda);
    return row;
}

int run_experiment(const ExperimentConfig& c, std::ostream& log) {
    const auto diags = validate_config(c);
    if (!diags.empty()) {
        for (const auto& d : diags) log << "error [" << d.code << "] " << d.field << ": " << d.message << '\n';
        return kExitInvalidConfig;
    }
    try {
        fs::create_directories(c.out_dir);
        write_json_file((fs::path(c.out_dir) / "config.json").string(), config_to_json(c));
        std::ofstream csv(fs::path(c.out_dir) / "history.csv");
        if (!csv) throw Error(Errc::invalid_argument, "cannot write history.csv in " + c.out_dir);
        csv << csv_header() << '\n';
        const fs::path ckpt_dir = fs::path(c.out_dir) / "checkpoints";
        if (c.checkpoint_every > 0) fs::create_directories(ckpt_dir);

        auto on_step = [&](const TrainState& st, const StepRecord& rec) {
            csv << csv_row(rec) << '\n';
            if (c.checkpoint_every > 0 && st.iteration % c.checkpoint_every == 0) {
                write_json_file((ckpt_dir / ("checkpoint_" + std::to_string(st.iteration) + ".json")).string(),
                                state_to_json(st));
            }
        };
        const ExperimentResult res = execute_experiment(c, on_step);
        csv.flush();
        write_json_file((fs::path(c.out_dir) / "final_state.json").string(), state_to_json(res.train.state));

        json summary = {{"final_energy", res.final_energy},
                        {"last_energy", res.train.state.energy_history.empty() ? json(nullptr)
                                                                               : json(res.train.state.energy_history.back())},
                        {"iterations", res.train.state.iteration},
                        {"wall_time", res.wall_time},
                        {"status", to_string(res.train.status)},
                        {"final_beta_x", res.train.state.beta_x}};
        summary["delta_e"] = res.delta_e ? json(*res.delta_e) : json(nullptr);
        summary["reference"] = res.reference ? reference_to_json(*res.reference) : json(nullptr);
        if (!res.train.message.empty()) summary["message"] = res.train.message;
        write_json_file((fs::path(c.out_dir) / "summary.json").string(), summary);

        log << "run " << to_string(res.train.status) << " after " << res.train.state.iteration
            << " iterations, final energy " << format_double(res.final_energy);
        if (res.delta_e) log << ", delta_e " << format_double(*res.delta_e);
        log << '\n';
        if (res.train.status == TrainStatus::aborted) {
            log << "numerical abort: " << res.train.message << '\n';
            return kExitNumericalAbort;
        }
        return kExitOk;
    } catch (const Error& e) {
        log << "error: " << e.what() << '\n';
        return e.code() == Errc::non_finite || e.code() == Errc::solver_failure || e.code() == Errc::not_converged
                   ? kExitNumericalAbort
                   : kExitInvalidConfig;
    }
}

bool is_sweep_parameter(const std::string& name) {
    return name == "x" || name == "h" || name == "N" || name == "p_break" || name == "gamma";
}

ExperimentConfig sweep_point(const ExperimentConfig& base, const std::string& parameter, double value, std::size_t index) {
    if (!is_sweep_parameter(parameter)) {
        throw Error(Errc::invalid_argument, "unknown sweep parameter '" + parameter + "' (expected x, h, N, p_break or gamma)");
    }
    ExperimentConfig c = base;
    if (parameter == "x") {
        c.sampler.mismatch_x = value;
    } else if (parameter == "h") {
        c.lattice.h = value;
    } else if (parameter == "N") {
        const int n = static_cast<int>(std::lround(value));
        for (auto& d : c.lattice.dims) d = n;
    } else if (parameter == "p_break") {
        c.sampler.p_break = value;
    } else {
        c.sr.gamma = value;
    }
    c.seed = base.seed + index;
    c.out_dir = (fs::path(base.out_dir) / (parameter + "_" + std::to_string(index))).string();
    return c;
}

int sweep(const ExperimentConfig& base, const std::string& parameter, const std::vector<double>& values,
          std::ostream& log) {
    if (!is_sweep_parameter(parameter)) {
        log << "error: unknown sweep parameter '" << parameter << "' (expected x, h, N, p_break or gamma)\n";
        return kExitInvalidConfig;
    }
    for (std::size_t k = 0; k < values.size(); ++k) {
        const auto diags = validate_config(sweep_point(base, parameter, values[k], k));
        if (!diags.empty()) {
            for (const auto& d : diags) {
                log << "error [" << d.code << "] " << parameter << "=" << format_double(values[k]) << " " << d.field
                    << ": " << d.message << '\n';
            }
            return kExitInvalidConfig;
        }
    }
    std::error_code ec;
    fs::create_directories(base.out_dir, ec);
    std::ofstream summary(fs::path(base.out_dir) / "sweep_summary.csv");
    if (!summary) {
        log << "error: cannot write sweep_summary.csv in " << base.out_dir << '\n';
        return kExitInvalidConfig;
    }
    summary << "value,final_delta_e,iterations\n";
    int status = kExitOk;
    for (std::size_t k = 0; k < values.size(); ++k) {
        const ExperimentConfig point = sweep_point(base, parameter, values[k], k);
        log << parameter << " = " << format_double(values[k]) << ": ";
        const int rc = run_experiment(point, log);
        if (rc != kExitOk) status = rc;
        std::string delta;
        std::string iterations;
        try {
            const json s = read_json_file((fs::path(point.out_dir) / "summary.json").string());
            if (!s.at("delta_e").is_null()) delta = format_double(s.at("delta_e").get<double>());
            iterations = std::to_string(s.at("iterations").get<int>());
        } catch (const std::exception&) {
        }
        summary << format_double(values[k]) << ',' << delta << ',' << iterations << '\n';
    }
    return status;
}

}  // namespace annealnqs
