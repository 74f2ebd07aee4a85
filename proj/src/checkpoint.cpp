#include "annealnqs/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "annealnqs/error.hpp"

namespace annealnqs {

nlohmann::json params_to_json(const RbmParams& params) {
    const Eigen::VectorXd flat = params.flatten();
    return {{"n_visible", params.n_visible()},
            {"n_hidden", params.n_hidden()},
            {"values", std::vector<double>(flat.data(), flat.data() + flat.size())}};
}

RbmParams params_from_json(const nlohmann::json& j) {
    const auto values = j.at("values").get<std::vector<double>>();
    return RbmParams::unflatten(j.at("n_visible").get<int>(), j.at("n_hidden").get<int>(), values);
}

nlohmann::json state_to_json(const TrainState& state) {
    std::ostringstream rng;
    rng << state.rng;
    return {{"params", params_to_json(state.params)},
            {"iteration", state.iteration},
            {"energy_history", state.energy_history},
            {"beta_x", state.beta_x},
            {"gamma", state.gamma},
            {"gamma_halved", state.gamma_halved},
            {"rng_state", rng.str()}};
}

TrainState state_from_json(const nlohmann::json& j) {
    TrainState s;
    s.params = params_from_json(j.at("params"));
    s.iteration = j.at("iteration").get<int>();
    s.energy_history = j.at("energy_history").get<std::vector<double>>();
    s.beta_x = j.at("beta_x").get<double>();
    s.gamma = j.at("gamma").get<double>();
    s.gamma_halved = j.at("gamma_halved").get<bool>();
    std::istringstream rng(j.at("rng_state").get<std::string>());
    rng >> s.rng;
    if (static_cast<int>(s.energy_history.size()) != s.iteration) {
        throw Error(Errc::invalid_argument, "checkpoint energy history does not match its iteration count");
    }
    return s;
}

nlohmann::json reference_to_json(const ReferenceResult& r) {
    return {{"energy", r.energy},
            {"energy_per_spin", r.energy_per_spin},
            {"method", to_string(r.method)},
            {"kind", to_string(r.kind)},
            {"dims", r.dims},
            {"h", r.h}};
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
    std::ofstream os(path);
    if (!os) throw Error(Errc::invalid_argument, "cannot write " + path);
    os << j.dump(2) << '\n';
}

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error(Errc::invalid_argument, "cannot read " + path);
    return nlohmann::json::parse(is);
}

}  // namespace annealnqs
