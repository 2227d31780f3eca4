#pragma once

#include <optional>
#include <string>
#include <vector>

#include "waveqed/mps.hpp"
#include "waveqed/pulse.hpp"
#include "waveqed/types.hpp"

namespace waveqed {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Which observables a scenario run emits.
struct OutputSelection {
    bool population = true;
    bool flux = true;
    bool g1 = false;
    bool spectrum = false;
    bool intensity = false;
    bool stationary = false;
};

/// Fully deterministic description of one scattering scenario. Parsed from a
/// strict JSON file: unknown keys are fatal, ranges are validated.
struct ScenarioConfig {
    std::string name = "scenario";

    Coupling kind = Coupling::chiral;
    double delta_over_gamma = 0.0;

    std::string pulse_shape = "rect";  // rect | gaussian | sampled
    double gamma_tp = 2.0;
    double gamma_tc = 0.0;
    std::vector<double> samples;  // sampled shape only
    int photons = 1;

    double gamma_dt = 0.005;
    double gamma_tmax = 0.0;  // 0 -> pulse support + 15/gamma

    bool engine_analytic = true;
    bool engine_mps = false;

    mps::TruncationPolicy mps_policy{};

    OutputSelection outputs{};

    bool no_tls = false;            // pulse-only reference kernel for spectra
    std::size_t spectrum_stride = 0;  // 0 -> auto
    double omega_half_width = 10.0;
    std::size_t omega_points = 401;
    std::size_t g1_csv_stride = 0;  // 0 -> auto
    bool save_mps = false;          // write the scattered chain as a checkpoint

    EmitterParams emitter() const {
        return EmitterParams::preset(kind, 1.0, delta_over_gamma);
    }
    PulseSpec pulse() const;
    TimeGrid grid() const;

    void validate() const;
};

/// Pulse-length sweep over peak populations.
struct SweepConfig {
    std::string name = "sweep";
    Coupling kind = Coupling::chiral;
    std::vector<int> photon_numbers = {1};
    std::vector<double> tp_list;
    double gamma_dt = 0.005;
    std::string engine = "analytic";  // analytic | mps

    void validate() const;
};

ScenarioConfig parse_scenario_config(const std::string& json_text);
ScenarioConfig load_scenario_config(const std::string& path);
SweepConfig parse_sweep_config(const std::string& json_text);
SweepConfig load_sweep_config(const std::string& path);

/// Resolved-config echo used by the run manifest.
std::string scenario_to_json(const ScenarioConfig& cfg);
std::string sweep_to_json(const SweepConfig& cfg);

}  // namespace waveqed
