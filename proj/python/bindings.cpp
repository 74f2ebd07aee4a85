#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "annealnqs/checkpoint.hpp"
#include "annealnqs/chimera.hpp"
#include "annealnqs/error.hpp"
#include "annealnqs/experiment.hpp"
#include "annealnqs/reference.hpp"

namespace py = pybind11;
using namespace annealnqs;

namespace {

SpinConfig to_spins(const std::vector<int>& v) {
    std::vector<SpinConfig::value_type> s(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] != 1 && v[i] != -1) throw Error(Errc::invalid_argument, "spins must be +1 or -1");
        s[i] = static_cast<SpinConfig::value_type>(v[i]);
    }
    return SpinConfig(std::move(s));
}

std::vector<int> from_spins(const SpinConfig& s) {
    return std::vector<int>(s.spins().begin(), s.spins().end());
}

std::vector<std::vector<int>> from_spin_list(const std::vector<SpinConfig>& list) {
    std::vector<std::vector<int>> out;
    out.reserve(list.size());
    for (const auto& s : list) out.push_back(from_spins(s));
    return out;
}

py::dict batch_to_dict(const SampleBatch& b) {
    py::dict d;
    d["visible"] = from_spin_list(b.visible);
    d["hidden"] = from_spin_list(b.hidden);
    d["weights"] = b.weights;
    d["acceptance_rate"] = b.diagnostics.acceptance_rate;
    d["chain_break_rate"] = b.diagnostics.chain_break_rate;
    d["sweeps_per_sample"] = b.diagnostics.sweeps_per_sample;
    return d;
}

SamplerSpec make_spec(SamplerKind kind, int n_samples, int burn_in, int thinning, int n_chains) {
    SamplerSpec s;
    s.kind = kind;
    s.n_samples = n_samples;
    s.burn_in = burn_in;
    s.thinning = thinning;
    s.n_chains = n_chains;
    s.validate();
    return s;
}

ExperimentConfig config_from_json_text(const std::string& text) {
    ParsedConfig p = parse_config(nlohmann::json::parse(text));
    if (!p.diagnostics.empty()) {
        const auto& d = p.diagnostics.front();
        throw Error(Errc::invalid_argument, d.code + " " + d.field + ": " + d.message);
    }
    return p.config;
}

}  // namespace

PYBIND11_MODULE(_annealnqs, m) {
    m.doc() = "RBM variational Monte Carlo for the transverse-field Ising model";

    static py::exception<Error> error_type(m, "Error", PyExc_ValueError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            PyErr_SetString(error_type.ptr(), (std::string(to_string(e.code())) + ": " + e.what()).c_str());
        }
    });

    py::enum_<LatticeKind>(m, "LatticeKind").value("chain", LatticeKind::chain).value("torus", LatticeKind::torus);

    py::class_<TfimLattice>(m, "Lattice")
        .def_readonly("kind", &TfimLattice::kind)
        .def_readonly("dims", &TfimLattice::dims)
        .def_readonly("field", &TfimLattice::field)
        .def_property_readonly("n_sites", &TfimLattice::n_sites)
        .def_property_readonly("bonds", [](const TfimLattice& l) {
            std::vector<std::pair<std::size_t, std::size_t>> out;
            for (const auto& b : l.bonds) out.emplace_back(b.i, b.j);
            return out;
        });
    m.def("chain", &chain_lattice, py::arg("n"), py::arg("h"));
    m.def("torus", &torus_lattice, py::arg("lx"), py::arg("ly"), py::arg("h"));
    m.def(
        "diagonal_energy", [](const TfimLattice& l, const std::vector<int>& v) { return diagonal_energy(l, to_spins(v)); },
        py::arg("lattice"), py::arg("v"));

    py::class_<RbmParams>(m, "RbmParams")
        .def(py::init<Eigen::VectorXd, Eigen::VectorXd, Eigen::MatrixXd>(), py::arg("a"), py::arg("b"), py::arg("W"))
        .def_static("zeros", &RbmParams::zeros, py::arg("n_visible"), py::arg("n_hidden"))
        .def_static(
            "random",
            [](int n, int mh, std::uint64_t seed, double scale) {
                Rng rng(seed);
                return RbmParams::random(n, mh, rng, scale);
            },
            py::arg("n_visible"), py::arg("n_hidden"), py::arg("seed"), py::arg("scale") = 0.05)
        .def_readwrite("a", &RbmParams::a)
        .def_readwrite("b", &RbmParams::b)
        .def_readwrite("W", &RbmParams::W)
        .def_property_readonly("n_visible", &RbmParams::n_visible)
        .def_property_readonly("n_hidden", &RbmParams::n_hidden)
        .def_property_readonly("n_params", &RbmParams::n_params)
        .def("flatten", &RbmParams::flatten);

    m.def(
        "log_psi", [](const RbmParams& p, const std::vector<int>& v) { return log_psi(p, to_spins(v)); },
        py::arg("params"), py::arg("v"));
    m.def(
        "psi_ratio",
        [](const RbmParams& p, const std::vector<int>& v, std::size_t i) {
            const SpinConfig s = to_spins(v);
            if (i >= s.size()) throw Error(Errc::index_out_of_range, "flip index out of range");
            return psi_ratio(p, s, i, theta(p, s));
        },
        py::arg("params"), py::arg("v"), py::arg("i"));
    m.def(
        "log_derivatives",
        [](const RbmParams& p, const std::vector<int>& v) {
            const SpinConfig s = to_spins(v);
            return log_derivatives(p, s, theta(p, s));
        },
        py::arg("params"), py::arg("v"));
    m.def(
        "local_energy",
        [](const RbmParams& p, const TfimLattice& l, const std::vector<int>& v) { return local_energy(p, l, to_spins(v)); },
        py::arg("params"), py::arg("lattice"), py::arg("v"));

    m.def(
        "sample_exact", [](const RbmParams& p) { return batch_to_dict(sample_exact(p, p.n_visible())); },
        py::arg("params"));
    m.def(
        "sample_metropolis",
        [](const RbmParams& p, int n_samples, std::uint64_t seed, int burn_in, int thinning, int n_chains) {
            Rng rng(seed);
            return batch_to_dict(
                metropolis_sample(p, make_spec(SamplerKind::metropolis, n_samples, burn_in, thinning, n_chains), rng));
        },
        py::arg("params"), py::arg("n_samples"), py::arg("seed"), py::arg("burn_in") = 100, py::arg("thinning") = 1,
        py::arg("n_chains") = 1);
    m.def(
        "sample_gibbs",
        [](const RbmParams& p, int n_samples, std::uint64_t seed, int burn_in, int thinning, int n_chains) {
            Rng rng(seed);
            return batch_to_dict(gibbs_sample(p, make_spec(SamplerKind::gibbs, n_samples, burn_in, thinning, n_chains), rng));
        },
        py::arg("params"), py::arg("n_samples"), py::arg("seed"), py::arg("burn_in") = 100, py::arg("thinning") = 1,
        py::arg("n_chains") = 1);
    m.def(
        "sample_annealer",
        [](const RbmParams& p, int chimera_n, double beta_x, double mismatch_x, int n_samples, std::uint64_t seed,
           double p_break, int burn_in) {
            const ChimeraEmbedding emb = embed_rbm(p.n_visible(), p.n_hidden(), chimera_n);
            Rng rng(seed);
            return batch_to_dict(annealer_sample(p, emb, beta_x, mismatch_x,
                                                 make_spec(SamplerKind::annealer, n_samples, burn_in, 1, 1), p_break, rng));
        },
        py::arg("params"), py::arg("chimera_n"), py::arg("beta_x"), py::arg("mismatch_x"), py::arg("n_samples"),
        py::arg("seed"), py::arg("p_break") = 0.0, py::arg("burn_in") = 100);

    m.def("exact_energy_1d", [](int n, double h) { return exact_energy_1d(n, h).energy; }, py::arg("n"), py::arg("h"));
    m.def("exact_energy_1d_thermo", &exact_energy_1d_thermo, py::arg("h"));
    m.def(
        "dense_ground_energy", [](const TfimLattice& l) { return dense_ground_energy(l).energy; }, py::arg("lattice"));
    m.def(
        "lanczos_ground_energy", [](const TfimLattice& l) { return lanczos_ground_energy(l).energy; },
        py::arg("lattice"));
    m.def(
        "reference_energy", [](const TfimLattice& l) { return reference_energy(l).energy; }, py::arg("lattice"));

    m.def(
        "embed_report",
        [](int n, int n_visible, int n_hidden) {
            const ChimeraEmbedding emb = embed_rbm(n_visible, n_hidden, n);
            py::dict d;
            d["visible_chains"] = emb.visible_chains;
            d["hidden_chains"] = emb.hidden_chains;
            d["qubits_used"] = emb.qubits_used();
            d["n_qubits"] = emb.graph->n_qubits();
            d["n_couplers"] = emb.graph->edges().size();
            d["problems"] = check_embedding(emb);
            return d;
        },
        py::arg("n"), py::arg("n_visible"), py::arg("n_hidden"));
    m.def(
        "lower_to_text",
        [](const RbmParams& p, int n, double beta_x) {
            const IsingInstance inst = lower(p, embed_rbm(p.n_visible(), p.n_hidden(), n), beta_x);
            return py::make_tuple(inst.to_text(), inst.clip_report);
        },
        py::arg("params"), py::arg("chimera_n"), py::arg("beta_x"));

    m.def(
        "validate_config",
        [](const std::string& text) {
            std::vector<std::tuple<std::string, std::string, std::string>> out;
            ParsedConfig p = parse_config(nlohmann::json::parse(text));
            auto all = p.diagnostics;
            if (all.empty()) all = validate_config(p.config);
            for (const auto& d : all) out.emplace_back(d.code, d.field, d.message);
            return out;
        },
        py::arg("config_json"));
    m.def(
        "train",
        [](const std::string& text) {
            const ExperimentConfig cfg = config_from_json_text(text);
            ExperimentResult r;
            {
                py::gil_scoped_release release;
                r = execute_experiment(cfg);
            }
            py::dict d;
            d["status"] = std::string(to_string(r.train.status));
            d["iterations"] = r.train.state.iteration;
            d["energies"] = r.train.state.energy_history;
            d["final_energy"] = r.final_energy;
            d["delta_e"] = r.delta_e ? py::cast(*r.delta_e) : py::none();
            d["reference"] = r.reference ? py::cast(r.reference->energy) : py::none();
            d["beta_x"] = r.train.state.beta_x;
            d["params"] = r.train.state.params;
            return d;
        },
        py::arg("config_json"));
    m.def(
        "run", [](const std::string& text) {
            std::ostringstream log;
            const int rc = run_experiment(config_from_json_text(text), log);
            return py::make_tuple(rc, log.str());
        },
        py::arg("config_json"));
}
