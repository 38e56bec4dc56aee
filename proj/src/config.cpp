#include "twi/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include "twi/delay_components.hpp"

namespace twi::cfg {

namespace {

using nlohmann::json;

json load_json(const std::string& file) {
    std::ifstream in(file);
    if (!in) {
        throw ConfigError("cannot open config file: " + file);
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config parse error in " + file + ": " + e.what());
    }
}

void require_object(const json& node, const std::string& path) {
    if (!node.is_object()) {
        throw ConfigError("expected an object at " + path);
    }
}

// Unknown keys are rejected outright so typos cannot silently fall back to
// defaults.
void check_keys(const json& node, const std::set<std::string>& allowed,
                const std::string& path) {
    require_object(node, path);
    for (const auto& [key, value] : node.items()) {
        if (!allowed.count(key)) {
            throw ConfigError("unknown key " + path + "." + key);
        }
    }
}

double get_number(const json& node, const std::string& path) {
    if (!node.is_number()) {
        throw ConfigError("expected a number at " + path);
    }
    return node.get<double>();
}

int get_int(const json& node, const std::string& path) {
    if (!node.is_number_integer()) {
        throw ConfigError("expected an integer at " + path);
    }
    return node.get<int>();
}

std::string get_string(const json& node, const std::string& path) {
    if (!node.is_string()) {
        throw ConfigError("expected a string at " + path);
    }
    return node.get<std::string>();
}

template <typename T, typename Fn>
T get_or(const json& obj, const std::string& key, const std::string& path, T fallback, Fn get) {
    if (!obj.contains(key)) return fallback;
    return get(obj.at(key), path + "." + key);
}

std::pair<double, double> get_interval(const json& node, const std::string& path) {
    if (!node.is_array() || node.size() != 2) {
        throw ConfigError("expected [lo, hi] at " + path);
    }
    return {get_number(node[0], path + "[0]"), get_number(node[1], path + "[1]")};
}

std::pair<int, int> get_int_interval(const json& node, const std::string& path) {
    if (!node.is_array() || node.size() != 2) {
        throw ConfigError("expected [lo, hi] at " + path);
    }
    return {get_int(node[0], path + "[0]"), get_int(node[1], path + "[1]")};
}

RetrySpec parse_retry(const json& node, const std::string& path, bool allow_snr) {
    check_keys(node, allow_snr ? std::set<std::string>{"fail_prob", "snr", "max_attempts"}
                               : std::set<std::string>{"fail_prob", "max_attempts"},
               path);
    RetrySpec retry;
    if (node.contains("snr")) {
        if (node.contains("fail_prob")) {
            throw ConfigError("give either fail_prob or snr at " + path);
        }
        retry.fail_prob = delay::sr_failure_from_snr(get_number(node.at("snr"), path + ".snr"));
    } else if (node.contains("fail_prob")) {
        retry.fail_prob = get_number(node.at("fail_prob"), path + ".fail_prob");
    } else {
        throw ConfigError("missing fail_prob at " + path);
    }
    if (!node.contains("max_attempts")) {
        throw ConfigError("missing max_attempts at " + path);
    }
    retry.max_attempts = get_int(node.at("max_attempts"), path + ".max_attempts");
    return retry;
}

ComputationSpec parse_computation(const json& node, const std::string& path) {
    check_keys(node, {"c_min_ms", "c_max_ms"}, path);
    if (!node.contains("c_min_ms") || !node.contains("c_max_ms")) {
        throw ConfigError("computation needs c_min_ms and c_max_ms at " + path);
    }
    return {get_number(node.at("c_min_ms"), path + ".c_min_ms"),
            get_number(node.at("c_max_ms"), path + ".c_max_ms")};
}

PathSpec parse_path(const json& node, const std::string& path, const FrameTime& frame) {
    check_keys(node,
               {"id", "hop_count", "propagation", "first_computation", "relay_hops", "sr", "pt"},
               path);
    PathSpec spec;
    spec.frame = frame;
    spec.path_id = get_or<std::string>(node, "id", path, "", get_string);
    if (!node.contains("hop_count")) {
        throw ConfigError("missing hop_count at " + path);
    }
    spec.hop_count = get_int(node.at("hop_count"), path + ".hop_count");
    if (!node.contains("propagation")) {
        throw ConfigError("missing propagation at " + path);
    }
    const json& prop = node.at("propagation");
    check_keys(prop, {"d_m", "v_m_per_ms"}, path + ".propagation");
    if (!prop.contains("d_m") || !prop.contains("v_m_per_ms")) {
        throw ConfigError("propagation needs d_m and v_m_per_ms at " + path + ".propagation");
    }
    spec.propagation = {get_number(prop.at("d_m"), path + ".propagation.d_m"),
                        get_number(prop.at("v_m_per_ms"), path + ".propagation.v_m_per_ms"),
                        spec.hop_count == 0 ? PropagationKind::EventToBs
                                            : PropagationKind::EventToSensor};
    if (spec.hop_count >= 1) {
        if (!node.contains("first_computation")) {
            throw ConfigError("missing first_computation at " + path);
        }
        spec.first_computation =
            parse_computation(node.at("first_computation"), path + ".first_computation");
        if (node.contains("relay_hops")) {
            const json& hops = node.at("relay_hops");
            if (!hops.is_array()) {
                throw ConfigError("expected an array at " + path + ".relay_hops");
            }
            for (std::size_t i = 0; i < hops.size(); ++i) {
                const std::string hop_path = path + ".relay_hops[" + std::to_string(i) + "]";
                check_keys(hops[i], {"fail_prob", "max_attempts", "c_min_ms", "c_max_ms"},
                           hop_path);
                HopSpec hop;
                hop.relay = {get_number(hops[i].at("fail_prob"), hop_path + ".fail_prob"),
                             get_int(hops[i].at("max_attempts"), hop_path + ".max_attempts")};
                hop.computation = {get_number(hops[i].at("c_min_ms"), hop_path + ".c_min_ms"),
                                   get_number(hops[i].at("c_max_ms"), hop_path + ".c_max_ms")};
                hop.relay.validate();
                hop.computation.validate();
                spec.hops.push_back(hop);
            }
        }
        if (!node.contains("sr") || !node.contains("pt")) {
            throw ConfigError("relayed path needs sr and pt at " + path);
        }
        spec.sr = parse_retry(node.at("sr"), path + ".sr", /*allow_snr=*/true);
        spec.pt = parse_retry(node.at("pt"), path + ".pt", /*allow_snr=*/false);
    }
    spec.validate();
    return spec;
}

mc::ParameterRanges parse_ranges(const json& node, const std::string& path) {
    check_keys(node,
               {"rho", "a_max", "zeta", "m_max", "eps_link", "n_max", "hop_computation_ms",
                "light", "sound", "d_m"},
               path);
    mc::ParameterRanges ranges;
    if (node.contains("rho")) {
        std::tie(ranges.rho_min, ranges.rho_max) = get_interval(node.at("rho"), path + ".rho");
    }
    if (node.contains("a_max")) {
        std::tie(ranges.amax_min, ranges.amax_max) =
            get_int_interval(node.at("a_max"), path + ".a_max");
    }
    if (node.contains("zeta")) {
        std::tie(ranges.zeta_min, ranges.zeta_max) = get_interval(node.at("zeta"), path + ".zeta");
    }
    if (node.contains("m_max")) {
        std::tie(ranges.mmax_min, ranges.mmax_max) =
            get_int_interval(node.at("m_max"), path + ".m_max");
    }
    if (node.contains("eps_link")) {
        std::tie(ranges.epslink_min, ranges.epslink_max) =
            get_interval(node.at("eps_link"), path + ".eps_link");
    }
    if (node.contains("n_max")) {
        std::tie(ranges.nmax_min, ranges.nmax_max) =
            get_int_interval(node.at("n_max"), path + ".n_max");
    }
    if (node.contains("hop_computation_ms")) {
        const auto [lo, hi] = get_interval(node.at("hop_computation_ms"), path + ".hop_computation_ms");
        ranges.hop_computation = {lo, hi};
    }
    const auto parse_modality = [&](const char* key, mc::ModalityParams& out) {
        if (!node.contains(key)) return;
        const std::string mpath = path + "." + key;
        const json& m = node.at(key);
        check_keys(m, {"v_m_per_ms", "c_min_ms", "c_max_ms"}, mpath);
        if (m.contains("v_m_per_ms")) {
            out.speed_m_per_ms = get_number(m.at("v_m_per_ms"), mpath + ".v_m_per_ms");
        }
        if (m.contains("c_min_ms")) out.c_min_ms = get_number(m.at("c_min_ms"), mpath + ".c_min_ms");
        if (m.contains("c_max_ms")) out.c_max_ms = get_number(m.at("c_max_ms"), mpath + ".c_max_ms");
    };
    parse_modality("light", ranges.light);
    parse_modality("sound", ranges.sound);
    if (node.contains("d_m")) {
        ranges.cell_radius_m = get_number(node.at("d_m"), path + ".d_m");
    }
    return ranges;
}

exp::Mode parse_mode(const std::string& text, const std::string& path) {
    if (text == "scenario_A") return exp::Mode::ScenarioA;
    if (text == "scenario_B") return exp::Mode::ScenarioB;
    if (text == "scenario_C") return exp::Mode::ScenarioC;
    if (text == "sweep") return exp::Mode::Sweep;
    throw ConfigError("unknown mode '" + text + "' at " + path);
}

exp::SweepParameter parse_sweep_parameter(const std::string& text, const std::string& path) {
    if (text == "K") return exp::SweepParameter::PathCount;
    if (text == "h_max") return exp::SweepParameter::MaxSensors;
    if (text == "tf_ms") return exp::SweepParameter::FrameMs;
    if (text == "d_m") return exp::SweepParameter::CellRadius;
    if (text == "rho") return exp::SweepParameter::HopFailProb;
    if (text == "zeta_eps") return exp::SweepParameter::AccessFailProb;
    if (text == "epsilon") return exp::SweepParameter::GlobalEpsilon;
    throw ConfigError("unknown sweep parameter '" + text + "' at " + path);
}

}  // namespace

void OptimizeConfig::validate() const {
    if (!(epsilon > 0.0 && epsilon < 1.0)) {
        throw ConfigError("optimize config: epsilon must lie in (0, 1)");
    }
    if (!(tol_ms > 0.0)) {
        throw ConfigError("optimize config: tol_ms must be > 0");
    }
    frame.validate();
    if (paths.empty() == summaries.empty()) {
        throw ConfigError("optimize config: give exactly one of paths or summaries");
    }
}

OptimizeConfig parse_optimize_config(const nlohmann::json& doc) {
    check_keys(doc, {"epsilon", "tol_ms", "tf_ms", "paths", "summaries"}, "$");
    OptimizeConfig config;
    config.epsilon = get_or(doc, "epsilon", "$", config.epsilon, get_number);
    config.tol_ms = get_or(doc, "tol_ms", "$", config.tol_ms, get_number);
    config.frame.tf_ms = get_or(doc, "tf_ms", "$", config.frame.tf_ms, get_number);

    if (doc.contains("paths")) {
        const json& paths = doc.at("paths");
        if (!paths.is_array() || paths.empty()) {
            throw ConfigError("expected a nonempty array at $.paths");
        }
        for (std::size_t i = 0; i < paths.size(); ++i) {
            config.paths.push_back(
                parse_path(paths[i], "$.paths[" + std::to_string(i) + "]", config.frame));
        }
    }
    if (doc.contains("summaries")) {
        const json& summaries = doc.at("summaries");
        if (!summaries.is_array() || summaries.empty()) {
            throw ConfigError("expected a nonempty array at $.summaries");
        }
        for (std::size_t i = 0; i < summaries.size(); ++i) {
            const std::string spath = "$.summaries[" + std::to_string(i) + "]";
            check_keys(summaries[i], {"mu_ms", "sigma_ms", "drop_prob"}, spath);
            if (!summaries[i].contains("mu_ms") || !summaries[i].contains("sigma_ms")) {
                throw ConfigError("summary needs mu_ms and sigma_ms at " + spath);
            }
            PathSummary s;
            s.mu_ms = get_number(summaries[i].at("mu_ms"), spath + ".mu_ms");
            const double sigma = get_number(summaries[i].at("sigma_ms"), spath + ".sigma_ms");
            if (sigma < 0.0) {
                throw ConfigError("sigma_ms must be >= 0 at " + spath);
            }
            s.sigma2_ms2 = sigma * sigma;
            s.drop_prob = get_or(summaries[i], "drop_prob", spath, 0.0, get_number);
            config.summaries.push_back(s);
        }
    }
    config.validate();
    return config;
}

OptimizeConfig load_optimize_config(const std::string& file) {
    return parse_optimize_config(load_json(file));
}

ExperimentFileConfig parse_experiment_config(const nlohmann::json& doc) {
    check_keys(doc,
               {"mode", "trials", "seed", "epsilon", "tol_ms", "tf_ms", "ranges", "sweep",
                "output_csv"},
               "$");
    ExperimentFileConfig config;
    if (!doc.contains("mode")) {
        throw ConfigError("missing key $.mode");
    }
    config.core.mode = parse_mode(get_string(doc.at("mode"), "$.mode"), "$.mode");
    config.core.trials = get_or(doc, "trials", "$", config.core.trials, get_int);
    if (doc.contains("seed")) {
        if (!doc.at("seed").is_number_unsigned() && !doc.at("seed").is_number_integer()) {
            throw ConfigError("expected an integer at $.seed");
        }
        config.core.seed = doc.at("seed").get<std::uint64_t>();
    } else {
        config.core.seed = default_seed();
    }
    config.core.epsilon = get_or(doc, "epsilon", "$", config.core.epsilon, get_number);
    config.core.tol_ms = get_or(doc, "tol_ms", "$", config.core.tol_ms, get_number);
    config.core.frame.tf_ms = get_or(doc, "tf_ms", "$", config.core.frame.tf_ms, get_number);
    if (doc.contains("ranges")) {
        config.core.ranges = parse_ranges(doc.at("ranges"), "$.ranges");
    }

    if (config.core.mode == exp::Mode::Sweep) {
        if (!doc.contains("sweep")) {
            throw ConfigError("sweep mode needs $.sweep");
        }
        const json& sweep = doc.at("sweep");
        check_keys(sweep, {"parameter", "values", "k", "h_max", "pins"}, "$.sweep");
        if (!sweep.contains("parameter") || !sweep.contains("values")) {
            throw ConfigError("sweep needs parameter and values at $.sweep");
        }
        config.core.sweep_parameter = parse_sweep_parameter(
            get_string(sweep.at("parameter"), "$.sweep.parameter"), "$.sweep.parameter");
        const json& values = sweep.at("values");
        if (!values.is_array() || values.empty()) {
            throw ConfigError("expected a nonempty array at $.sweep.values");
        }
        for (std::size_t i = 0; i < values.size(); ++i) {
            config.core.grid.push_back(
                get_number(values[i], "$.sweep.values[" + std::to_string(i) + "]"));
        }
        config.core.path_count = get_or(sweep, "k", "$.sweep", config.core.path_count, get_int);
        config.core.h_max = get_or(sweep, "h_max", "$.sweep", config.core.h_max, get_int);
        if (sweep.contains("pins")) {
            const json& pins = sweep.at("pins");
            check_keys(pins, {"rho", "a_max", "zeta", "m_max", "eps_link", "n_max"}, "$.sweep.pins");
            auto& ranges = config.core.ranges;
            if (pins.contains("rho")) {
                ranges.fixed_rho = get_number(pins.at("rho"), "$.sweep.pins.rho");
            }
            if (pins.contains("a_max")) {
                ranges.fixed_amax = get_int(pins.at("a_max"), "$.sweep.pins.a_max");
            }
            if (pins.contains("zeta")) {
                ranges.fixed_zeta = get_number(pins.at("zeta"), "$.sweep.pins.zeta");
            }
            if (pins.contains("m_max")) {
                ranges.fixed_mmax = get_int(pins.at("m_max"), "$.sweep.pins.m_max");
            }
            if (pins.contains("eps_link")) {
                ranges.fixed_epslink = get_number(pins.at("eps_link"), "$.sweep.pins.eps_link");
            }
            if (pins.contains("n_max")) {
                ranges.fixed_nmax = get_int(pins.at("n_max"), "$.sweep.pins.n_max");
            }
        }
    } else if (doc.contains("sweep")) {
        throw ConfigError("$.sweep is only valid in sweep mode");
    }

    config.output_csv = get_or<std::string>(doc, "output_csv", "$", "", get_string);
    if (config.output_csv.empty()) {
        config.output_csv = exp::to_string(config.core.mode) + ".csv";
    }
    try {
        config.core.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return config;
}

ExperimentFileConfig load_experiment_config(const std::string& file) {
    return parse_experiment_config(load_json(file));
}

nlohmann::json effective_config(const ExperimentFileConfig& config) {
    const exp::ExperimentConfig& core = config.core;
    json ranges = {
        {"rho", {core.ranges.rho_min, core.ranges.rho_max}},
        {"a_max", {core.ranges.amax_min, core.ranges.amax_max}},
        {"zeta", {core.ranges.zeta_min, core.ranges.zeta_max}},
        {"m_max", {core.ranges.mmax_min, core.ranges.mmax_max}},
        {"eps_link", {core.ranges.epslink_min, core.ranges.epslink_max}},
        {"n_max", {core.ranges.nmax_min, core.ranges.nmax_max}},
        {"hop_computation_ms",
         {core.ranges.hop_computation.c_min_ms, core.ranges.hop_computation.c_max_ms}},
        {"light",
         {{"v_m_per_ms", core.ranges.light.speed_m_per_ms},
          {"c_min_ms", core.ranges.light.c_min_ms},
          {"c_max_ms", core.ranges.light.c_max_ms}}},
        {"sound",
         {{"v_m_per_ms", core.ranges.sound.speed_m_per_ms},
          {"c_min_ms", core.ranges.sound.c_min_ms},
          {"c_max_ms", core.ranges.sound.c_max_ms}}},
        {"d_m", core.ranges.cell_radius_m},
    };
    json doc = {
        {"mode", exp::to_string(core.mode)},
        {"trials", core.trials},
        {"seed", core.seed},
        {"epsilon", core.epsilon},
        {"tol_ms", core.tol_ms},
        {"tf_ms", core.frame.tf_ms},
        {"ranges", std::move(ranges)},
        {"output_csv", config.output_csv},
    };
    if (core.mode == exp::Mode::Sweep) {
        json sweep = {
            {"parameter", exp::to_string(core.sweep_parameter)},
            {"values", core.grid},
            {"k", core.path_count},
            {"h_max", core.h_max},
        };
        json pins = json::object();
        if (core.ranges.fixed_rho) pins["rho"] = *core.ranges.fixed_rho;
        if (core.ranges.fixed_amax) pins["a_max"] = *core.ranges.fixed_amax;
        if (core.ranges.fixed_zeta) pins["zeta"] = *core.ranges.fixed_zeta;
        if (core.ranges.fixed_mmax) pins["m_max"] = *core.ranges.fixed_mmax;
        if (core.ranges.fixed_epslink) pins["eps_link"] = *core.ranges.fixed_epslink;
        if (core.ranges.fixed_nmax) pins["n_max"] = *core.ranges.fixed_nmax;
        if (!pins.empty()) sweep["pins"] = std::move(pins);
        doc["sweep"] = std::move(sweep);
    }
    return doc;
}

std::uint64_t default_seed() {
    if (const char* env = std::getenv("TWI_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw ConfigError("TWI_SEED must be an unsigned integer");
        }
    }
    return 20240101ULL;
}

}  // namespace twi::cfg
