#pragma once

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "pscc/autotuner.hpp"
#include "pscc/cost_selector.hpp"
#include "pscc/machine.hpp"
#include "pscc/outer_loop.hpp"

namespace pscc {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Scheduled scalar change at time t (speed set-point, load torque).
struct ScalarStep {
    double t{0.0};
    double value{0.0};
};

/// Scheduled weighting-factor change (fixed-WF experiments).
struct WeightStep {
    double t{0.0};
    WeightVector w{};
};

/// Scheduled Gamma-reference change (adaptive experiments).
struct ReferenceStep {
    double t{0.0};
    double gamma2_ref{0.0};
    double gamma3_ref{0.0};
};

/// Full, deterministic description of one simulation run.
struct Scenario {
    MachineParams machine{};
    OuterLoopConfig outer{};

    int plant_substeps{10};
    bool rotor_branch{true};
    /// When true the plant applies the controller's own discrete map instead
    /// of the RK4 truth model (model/plant mismatch removed).
    bool perfect_model{false};
    double T_load{0.0};
    std::vector<ScalarStep> load_steps;

    int metrics_N{720};

    bool adaptive{false};
    TunerConfig tuner{};
    std::vector<ReferenceStep> ref_steps;

    WeightVector weights{0.4, 0.0020};
    std::vector<WeightStep> wf_steps;

    double speed_ref{50.0};
    double omega0{0.0};
    std::vector<ScalarStep> speed_steps;

    double duration{1.0};
    bool log_samples{true};
    /// First-order filter pole for the correction term G; 0 disables.
    double g_filter{0.0};

    void validate() const {
        machine.validate();
        tuner.validate();
        if (duration < 0) throw ConfigError("scenario: duration must be non-negative");
        if (plant_substeps < 1) throw ConfigError("scenario: plant_substeps must be >= 1");
        if (metrics_N < 1) throw ConfigError("scenario: metrics_N must be >= 1");
        if (g_filter < 0 || g_filter >= 1) throw ConfigError("scenario: g_filter must be in [0,1)");
        auto ordered = [](auto const& steps) {
            for (size_t i = 1; i < steps.size(); ++i)
                if (steps[i].t < steps[i - 1].t) return false;
            return true;
        };
        if (!ordered(load_steps) || !ordered(speed_steps) || !ordered(wf_steps) || !ordered(ref_steps))
            throw ConfigError("scenario: step schedules must be time-ordered");
        if (weights.lambda_xy < tuner.lambda_xy_min || weights.lambda_xy > tuner.lambda_xy_max ||
            weights.lambda_sc < tuner.lambda_sc_min || weights.lambda_sc > tuner.lambda_sc_max)
            throw ConfigError("scenario: initial weights outside configured bounds");
    }
};

namespace detail {

using json = nlohmann::json;

template <typename T>
void read_field(const json& j, const char* key, T& out) {
    if (auto it = j.find(key); it != j.end()) {
        try {
            out = it->get<T>();
        } catch (const json::exception&) {
            throw ConfigError(std::string("config: bad value for key '") + key + "'");
        }
    }
}

inline void check_keys(const json& j, std::initializer_list<const char*> allowed,
                       const std::string& section) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (auto* k : allowed)
            if (it.key() == k) { ok = true; break; }
        if (!ok)
            throw ConfigError("config: unknown key '" + section + it.key() + "'");
    }
}

} // namespace detail

/// Parse a scenario from JSON (comments allowed). Unknown keys are rejected
/// so typos surface as config errors.
inline Scenario scenario_from_json(const nlohmann::json& j) {
    using detail::check_keys;
    using detail::read_field;
    Scenario sc;
    check_keys(j, {"machine", "outer", "plant", "metrics", "tuner", "weights",
                   "speed", "load", "duration", "log_samples"}, "");

    if (j.contains("machine")) {
        const auto& m = j.at("machine");
        check_keys(m, {"Rs", "Rr", "Lls", "Llr", "LM", "Jm", "P", "Vdc", "Ts", "B"}, "machine.");
        read_field(m, "Rs", sc.machine.Rs);
        read_field(m, "Rr", sc.machine.Rr);
        read_field(m, "Lls", sc.machine.Lls);
        read_field(m, "Llr", sc.machine.Llr);
        read_field(m, "LM", sc.machine.LM);
        read_field(m, "Jm", sc.machine.Jm);
        read_field(m, "P", sc.machine.P);
        read_field(m, "Vdc", sc.machine.Vdc);
        read_field(m, "Ts", sc.machine.Ts);
        read_field(m, "B", sc.machine.B);
    }
    if (j.contains("outer")) {
        const auto& o = j.at("outer");
        check_keys(o, {"kp", "ki", "iqs_limit", "ids_ref", "tau_r_mult", "decimation"}, "outer.");
        read_field(o, "kp", sc.outer.kp);
        read_field(o, "ki", sc.outer.ki);
        read_field(o, "iqs_limit", sc.outer.iqs_limit);
        read_field(o, "ids_ref", sc.outer.ids_ref);
        read_field(o, "tau_r_mult", sc.outer.tau_r_mult);
        read_field(o, "decimation", sc.outer.decimation);
    }
    if (j.contains("plant")) {
        const auto& p = j.at("plant");
        check_keys(p, {"substeps", "rotor_branch", "perfect_model", "T_load", "load_steps",
                       "g_filter"}, "plant.");
        read_field(p, "substeps", sc.plant_substeps);
        read_field(p, "rotor_branch", sc.rotor_branch);
        read_field(p, "perfect_model", sc.perfect_model);
        read_field(p, "T_load", sc.T_load);
        read_field(p, "g_filter", sc.g_filter);
        if (p.contains("load_steps"))
            for (const auto& s : p.at("load_steps"))
                sc.load_steps.push_back({s.at("t").get<double>(), s.at("value").get<double>()});
    }
    if (j.contains("metrics")) {
        const auto& m = j.at("metrics");
        check_keys(m, {"N"}, "metrics.");
        read_field(m, "N", sc.metrics_N);
    }
    if (j.contains("tuner")) {
        const auto& t = j.at("tuner");
        check_keys(t, {"enabled", "gamma2_ref", "gamma3_ref", "g_p2", "g_i2", "g_p3", "g_i3",
                       "lambda_xy_min", "lambda_xy_max", "lambda_sc_min", "lambda_sc_max",
                       "ref_steps"}, "tuner.");
        read_field(t, "enabled", sc.adaptive);
        read_field(t, "gamma2_ref", sc.tuner.gamma2_ref);
        read_field(t, "gamma3_ref", sc.tuner.gamma3_ref);
        read_field(t, "g_p2", sc.tuner.g_p2);
        read_field(t, "g_i2", sc.tuner.g_i2);
        read_field(t, "g_p3", sc.tuner.g_p3);
        read_field(t, "g_i3", sc.tuner.g_i3);
        read_field(t, "lambda_xy_min", sc.tuner.lambda_xy_min);
        read_field(t, "lambda_xy_max", sc.tuner.lambda_xy_max);
        read_field(t, "lambda_sc_min", sc.tuner.lambda_sc_min);
        read_field(t, "lambda_sc_max", sc.tuner.lambda_sc_max);
        if (t.contains("ref_steps"))
            for (const auto& s : t.at("ref_steps")) {
                ReferenceStep r{s.at("t").get<double>(), sc.tuner.gamma2_ref, sc.tuner.gamma3_ref};
                detail::read_field(s, "gamma2_ref", r.gamma2_ref);
                detail::read_field(s, "gamma3_ref", r.gamma3_ref);
                sc.ref_steps.push_back(r);
            }
    }
    if (j.contains("weights")) {
        const auto& w = j.at("weights");
        check_keys(w, {"lambda_xy", "lambda_sc", "steps"}, "weights.");
        read_field(w, "lambda_xy", sc.weights.lambda_xy);
        read_field(w, "lambda_sc", sc.weights.lambda_sc);
        if (w.contains("steps"))
            for (const auto& s : w.at("steps"))
                sc.wf_steps.push_back({s.at("t").get<double>(),
                                       {s.at("lambda_xy").get<double>(),
                                        s.at("lambda_sc").get<double>()}});
    }
    if (j.contains("speed")) {
        const auto& s = j.at("speed");
        check_keys(s, {"ref", "omega0", "steps"}, "speed.");
        read_field(s, "ref", sc.speed_ref);
        read_field(s, "omega0", sc.omega0);
        if (s.contains("steps"))
            for (const auto& st : s.at("steps"))
                sc.speed_steps.push_back({st.at("t").get<double>(), st.at("ref").get<double>()});
    }
    if (j.contains("load")) {
        const auto& l = j.at("load");
        check_keys(l, {"torque", "steps"}, "load.");
        read_field(l, "torque", sc.T_load);
        if (l.contains("steps"))
            for (const auto& st : l.at("steps"))
                sc.load_steps.push_back({st.at("t").get<double>(), st.at("value").get<double>()});
    }
    read_field(j, "duration", sc.duration);
    read_field(j, "log_samples", sc.log_samples);
    sc.validate();
    // dt_block follows the metrics cadence unless the config overrides it via
    // a different machine Ts / N pair.
    sc.tuner.dt_block = sc.metrics_N * sc.machine.Ts;
    return sc;
}

/// Serialize the fully resolved scenario; parsing this back reproduces the
/// run bit-exactly (the run manifest).
inline nlohmann::json scenario_to_json(const Scenario& sc) {
    nlohmann::json j;
    j["machine"] = {{"Rs", sc.machine.Rs}, {"Rr", sc.machine.Rr}, {"Lls", sc.machine.Lls},
                    {"Llr", sc.machine.Llr}, {"LM", sc.machine.LM}, {"Jm", sc.machine.Jm},
                    {"P", sc.machine.P}, {"Vdc", sc.machine.Vdc}, {"Ts", sc.machine.Ts},
                    {"B", sc.machine.B}};
    j["outer"] = {{"kp", sc.outer.kp}, {"ki", sc.outer.ki}, {"iqs_limit", sc.outer.iqs_limit},
                  {"ids_ref", sc.outer.ids_ref}, {"tau_r_mult", sc.outer.tau_r_mult},
                  {"decimation", sc.outer.decimation}};
    j["plant"] = {{"substeps", sc.plant_substeps}, {"rotor_branch", sc.rotor_branch},
                  {"perfect_model", sc.perfect_model}, {"T_load", sc.T_load},
                  {"g_filter", sc.g_filter}};
    j["metrics"] = {{"N", sc.metrics_N}};
    j["tuner"] = {{"enabled", sc.adaptive}, {"gamma2_ref", sc.tuner.gamma2_ref},
                  {"gamma3_ref", sc.tuner.gamma3_ref}, {"g_p2", sc.tuner.g_p2},
                  {"g_i2", sc.tuner.g_i2}, {"g_p3", sc.tuner.g_p3}, {"g_i3", sc.tuner.g_i3},
                  {"lambda_xy_min", sc.tuner.lambda_xy_min},
                  {"lambda_xy_max", sc.tuner.lambda_xy_max},
                  {"lambda_sc_min", sc.tuner.lambda_sc_min},
                  {"lambda_sc_max", sc.tuner.lambda_sc_max}};
    auto& rs = j["tuner"]["ref_steps"] = nlohmann::json::array();
    for (const auto& s : sc.ref_steps)
        rs.push_back({{"t", s.t}, {"gamma2_ref", s.gamma2_ref}, {"gamma3_ref", s.gamma3_ref}});
    j["weights"] = {{"lambda_xy", sc.weights.lambda_xy}, {"lambda_sc", sc.weights.lambda_sc}};
    auto& ws = j["weights"]["steps"] = nlohmann::json::array();
    for (const auto& s : sc.wf_steps)
        ws.push_back({{"t", s.t}, {"lambda_xy", s.w.lambda_xy}, {"lambda_sc", s.w.lambda_sc}});
    j["speed"] = {{"ref", sc.speed_ref}, {"omega0", sc.omega0}};
    auto& ss = j["speed"]["steps"] = nlohmann::json::array();
    for (const auto& s : sc.speed_steps) ss.push_back({{"t", s.t}, {"ref", s.value}});
    j["load"] = {{"torque", sc.T_load}};
    auto& ls = j["load"]["steps"] = nlohmann::json::array();
    for (const auto& s : sc.load_steps) ls.push_back({{"t", s.t}, {"value", s.value}});
    j["duration"] = sc.duration;
    j["log_samples"] = sc.log_samples;
    return j;
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("config: cannot open '" + path + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(f, nullptr, true, /*ignore_comments=*/true);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config: parse error in '" + path + "': " + e.what());
    }
    return scenario_from_json(j);
}

/// Apply a dotted-key override like "tuner.gamma2_ref=0.03" to a JSON tree.
inline void apply_override(nlohmann::json& j, const std::string& kv) {
    auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError("override: expected key=value, got '" + kv + "'");
    std::string key = kv.substr(0, eq);
    std::string val = kv.substr(eq + 1);
    std::string ptr = "/";
    for (char c : key) ptr += (c == '.') ? '/' : c;
    nlohmann::json parsed;
    try {
        parsed = nlohmann::json::parse(val);
    } catch (const nlohmann::json::parse_error&) {
        parsed = val; // plain string
    }
    j[nlohmann::json::json_pointer(ptr)] = parsed;
}

} // namespace pscc
