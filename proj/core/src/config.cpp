#include "waveqed/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace waveqed {

namespace {

using nlohmann::json;

/// Wraps a JSON object and records key access so leftovers can be rejected.
class StrictObject {
  public:
    StrictObject(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    const json& get(const std::string& key) {
        seen_.insert(key);
        return j_.at(key);
    }

    template <typename T>
    T value(const std::string& key, T fallback) {
        if (!j_.contains(key)) return fallback;
        seen_.insert(key);
        try {
            return j_.at(key).get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(path_ + "." + key + ": " + e.what());
        }
    }

    StrictObject child(const std::string& key) {
        seen_.insert(key);
        return StrictObject(j_.at(key), path_ + "." + key);
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key()))
                throw ConfigError(path_ + ": unknown key '" + it.key() + "'");
    }

  private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

json parse_text(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
}

Coupling parse_kind(const std::string& s, const std::string& where) {
    if (s == "chiral") return Coupling::chiral;
    if (s == "symmetric") return Coupling::symmetric;
    throw ConfigError(where + ": kind must be 'chiral' or 'symmetric'");
}

std::string read_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("config: cannot open " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace

PulseSpec ScenarioConfig::pulse() const {
    if (pulse_shape == "rect") return PulseSpec::rect(gamma_tp, photons);
    if (pulse_shape == "gaussian") return PulseSpec::gaussian(gamma_tc, gamma_tp, photons);
    if (pulse_shape == "sampled") {
        TimeGrid g(gamma_dt, samples.size());
        return PulseSpec::sampled(g, samples, photons);
    }
    throw ConfigError("pulse.shape must be rect, gaussian or sampled");
}

TimeGrid ScenarioConfig::grid() const {
    const auto p = pulse();
    if (gamma_tmax <= 0.0) return default_grid(p, gamma_dt);
    double step = gamma_dt;
    if (p.is_rect()) {
        const auto m = static_cast<std::size_t>(std::max(1.0, std::round(gamma_tp / step)));
        step = gamma_tp / static_cast<double>(m);
    }
    const auto n = static_cast<std::size_t>(std::ceil(gamma_tmax / step));
    return TimeGrid(step, n);
}

void ScenarioConfig::validate() const {
    if (!(gamma_dt > 0.0 && gamma_dt <= 0.05))
        throw ConfigError("grid.gamma_dt must lie in (0, 0.05]");
    if (photons != 1 && photons != 2) throw ConfigError("pulse.photons must be 1 or 2");
    if (pulse_shape != "rect" && pulse_shape != "gaussian" && pulse_shape != "sampled")
        throw ConfigError("pulse.shape must be rect, gaussian or sampled");
    if (pulse_shape != "sampled" && !(gamma_tp > 0.0))
        throw ConfigError("pulse.gamma_tp must be positive");
    if (pulse_shape == "sampled") {
        double norm2 = 0.0;
        for (double v : samples) norm2 += v * v;
        if (!(norm2 > 0.0)) throw ConfigError("pulse.samples must not vanish identically");
    }
    if (!engine_analytic && !engine_mps) throw ConfigError("engines: select at least one");
    if ((outputs.spectrum || outputs.intensity || outputs.stationary || outputs.g1) &&
        photons == 2 && !engine_mps)
        throw ConfigError("2-photon correlation outputs require the mps engine");
    if (delta_over_gamma != 0.0 && engine_analytic)
        throw ConfigError("emitter.delta_over_gamma must be 0 for the analytic engine");
    try {
        mps_policy.validate(photons);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("mps: ") + e.what());
    }
    if (omega_points < 2) throw ConfigError("spectra.omega_points must be >= 2");
    if (!(omega_half_width > 0)) throw ConfigError("spectra.omega_half_width must be > 0");
}

void SweepConfig::validate() const {
    if (tp_list.empty()) throw ConfigError("sweep.tp_list must not be empty");
    for (double tp : tp_list)
        if (!(tp > 0)) throw ConfigError("sweep.tp_list entries must be positive");
    if (photon_numbers.empty()) throw ConfigError("sweep.photons must not be empty");
    for (int n : photon_numbers)
        if (n != 1 && n != 2) throw ConfigError("sweep.photons entries must be 1 or 2");
    if (!(gamma_dt > 0.0 && gamma_dt <= 0.05))
        throw ConfigError("sweep.gamma_dt must lie in (0, 0.05]");
    if (engine != "analytic" && engine != "mps")
        throw ConfigError("sweep.engine must be 'analytic' or 'mps'");
}

ScenarioConfig parse_scenario_config(const std::string& text) {
    const json root_json = parse_text(text);
    StrictObject root(root_json, "config");
    ScenarioConfig cfg;

    cfg.name = root.value<std::string>("name", cfg.name);

    if (root.has("emitter")) {
        auto em = root.child("emitter");
        cfg.kind = parse_kind(em.value<std::string>("kind", "chiral"), "emitter");
        cfg.delta_over_gamma = em.value<double>("delta_over_gamma", 0.0);
        em.finish();
    }
    if (root.has("pulse")) {
        auto pu = root.child("pulse");
        cfg.pulse_shape = pu.value<std::string>("shape", "rect");
        cfg.gamma_tp = pu.value<double>("gamma_tp", cfg.gamma_tp);
        cfg.gamma_tc = pu.value<double>("gamma_tc", cfg.gamma_tc);
        cfg.photons = pu.value<int>("photons", 1);
        cfg.samples = pu.value<std::vector<double>>("samples", {});
        pu.finish();
    }
    if (root.has("grid")) {
        auto gr = root.child("grid");
        cfg.gamma_dt = gr.value<double>("gamma_dt", cfg.gamma_dt);
        cfg.gamma_tmax = gr.value<double>("gamma_tmax", 0.0);
        gr.finish();
    }
    if (root.has("engines")) {
        auto en = root.child("engines");
        cfg.engine_analytic = en.value<bool>("analytic", true);
        cfg.engine_mps = en.value<bool>("mps", false);
        en.finish();
    }
    if (root.has("mps")) {
        auto mp = root.child("mps");
        cfg.mps_policy.svd_cutoff = mp.value<double>("svd_cutoff", 1e-12);
        cfg.mps_policy.max_bond = mp.value<int>("max_bond", 64);
        mp.finish();
    }
    if (root.has("outputs")) {
        auto ou = root.child("outputs");
        cfg.outputs.population = ou.value<bool>("population", true);
        cfg.outputs.flux = ou.value<bool>("flux", true);
        cfg.outputs.g1 = ou.value<bool>("g1", false);
        cfg.outputs.spectrum = ou.value<bool>("spectrum", false);
        cfg.outputs.intensity = ou.value<bool>("intensity", false);
        cfg.outputs.stationary = ou.value<bool>("stationary", false);
        ou.finish();
    }
    if (root.has("spectra")) {
        auto sp = root.child("spectra");
        cfg.no_tls = sp.value<bool>("no_tls", false);
        cfg.spectrum_stride = sp.value<std::size_t>("time_stride", 0);
        cfg.omega_half_width = sp.value<double>("omega_half_width", 10.0);
        cfg.omega_points = sp.value<std::size_t>("omega_points", 401);
        cfg.g1_csv_stride = sp.value<std::size_t>("g1_csv_stride", 0);
        cfg.save_mps = sp.value<bool>("save_mps", false);
        sp.finish();
    }
    root.finish();
    cfg.validate();
    return cfg;
}

ScenarioConfig load_scenario_config(const std::string& path) {
    return parse_scenario_config(read_file(path));
}

SweepConfig parse_sweep_config(const std::string& text) {
    const json root_json = parse_text(text);
    StrictObject root(root_json, "sweep");
    SweepConfig cfg;
    cfg.name = root.value<std::string>("name", cfg.name);
    cfg.kind = parse_kind(root.value<std::string>("kind", "chiral"), "sweep");
    cfg.photon_numbers = root.value<std::vector<int>>("photons", {1});
    cfg.tp_list = root.value<std::vector<double>>("tp_list", {});
    cfg.gamma_dt = root.value<double>("gamma_dt", 0.005);
    cfg.engine = root.value<std::string>("engine", "analytic");
    root.finish();
    cfg.validate();
    return cfg;
}

SweepConfig load_sweep_config(const std::string& path) {
    return parse_sweep_config(read_file(path));
}

std::string scenario_to_json(const ScenarioConfig& cfg) {
    json j;
    j["name"] = cfg.name;
    j["emitter"] = {{"kind", cfg.kind == Coupling::chiral ? "chiral" : "symmetric"},
                    {"delta_over_gamma", cfg.delta_over_gamma}};
    j["pulse"] = {{"shape", cfg.pulse_shape},
                  {"gamma_tp", cfg.gamma_tp},
                  {"gamma_tc", cfg.gamma_tc},
                  {"photons", cfg.photons}};
    if (!cfg.samples.empty()) j["pulse"]["samples"] = cfg.samples;
    j["grid"] = {{"gamma_dt", cfg.gamma_dt}, {"gamma_tmax", cfg.gamma_tmax}};
    j["engines"] = {{"analytic", cfg.engine_analytic}, {"mps", cfg.engine_mps}};
    j["mps"] = {{"svd_cutoff", cfg.mps_policy.svd_cutoff},
                {"max_bond", cfg.mps_policy.max_bond}};
    j["outputs"] = {{"population", cfg.outputs.population}, {"flux", cfg.outputs.flux},
                    {"g1", cfg.outputs.g1},                 {"spectrum", cfg.outputs.spectrum},
                    {"intensity", cfg.outputs.intensity},   {"stationary", cfg.outputs.stationary}};
    j["spectra"] = {{"no_tls", cfg.no_tls},
                    {"time_stride", cfg.spectrum_stride},
                    {"omega_half_width", cfg.omega_half_width},
                    {"omega_points", cfg.omega_points},
                    {"g1_csv_stride", cfg.g1_csv_stride},
                    {"save_mps", cfg.save_mps}};
    return j.dump(2);
}

std::string sweep_to_json(const SweepConfig& cfg) {
    json j;
    j["name"] = cfg.name;
    j["kind"] = cfg.kind == Coupling::chiral ? "chiral" : "symmetric";
    j["photons"] = cfg.photon_numbers;
    j["tp_list"] = cfg.tp_list;
    j["gamma_dt"] = cfg.gamma_dt;
    j["engine"] = cfg.engine;
    return j.dump(2);
}

}  // namespace waveqed
