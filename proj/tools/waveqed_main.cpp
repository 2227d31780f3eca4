#include <cstdio>
#include <cstdlib>
#include <string>

#include <CLI11.hpp>

#include "waveqed/config.hpp"
#include "waveqed/runner.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitEngine = 3;

std::string resolve_out_dir(const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("WAVEQED_OUT"); env && *env) return env;
    return "waveqed_out";
}

void print_summary(const waveqed::run::RunSummary& s) {
    for (const auto& [key, value] : s.residuals)
        std::printf("  %-28s %.6g\n", key.c_str(), value);
    std::printf("  manifest: %s\n", s.manifest_path.c_str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Few-photon pulse scattering on a waveguide emitter: analytic and "
                 "matrix-product-state engines with time-dependent spectra"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_flag;
    std::string engine;
    int threads = 1;
    bool flip_drive_sign = false;

    auto add_common = [&](CLI::App* sub, bool config_required) {
        sub->add_option("--config", config_path, "Path to the JSON config")
            ->required(config_required);
        sub->add_option("--out", out_flag,
                        "Output directory (default: $WAVEQED_OUT or ./waveqed_out)");
        sub->add_option("--engine", engine, "Engine override: analytic | mps | both")
            ->check(CLI::IsMember({"analytic", "mps", "both"}));
        sub->add_option("--threads", threads, "Worker threads for sweeps and omega columns")
            ->check(CLI::PositiveNumber);
    };

    auto* sim = app.add_subcommand("simulate", "Population and flux run for one scenario");
    add_common(sim, true);
    auto* sweep = app.add_subcommand("sweep", "Peak population versus pulse length");
    add_common(sweep, true);
    auto* spectra = app.add_subcommand("spectra", "G1 kernel, S(w,t), I(w,t) and S(w)");
    add_common(spectra, true);
    auto* verify = app.add_subcommand("verify", "Run the invariant checks and report");
    add_common(verify, false);
    verify->add_flag("--flip-drive-sign", flip_drive_sign,
                     "Self-test: inject a sign error and require the checks to fail");

    CLI11_PARSE(app, argc, argv);

    waveqed::run::RunOptions opts;
    opts.out_dir = resolve_out_dir(out_flag);
    opts.threads = threads;
    opts.engine_override = engine;

    try {
        if (sim->parsed()) {
            const auto cfg = waveqed::load_scenario_config(config_path);
            const auto summary = waveqed::run::run_simulate(cfg, opts);
            std::printf("simulate: ok\n");
            print_summary(summary);
        } else if (sweep->parsed()) {
            const auto cfg = waveqed::load_sweep_config(config_path);
            const auto summary = waveqed::run::run_sweep(cfg, opts);
            std::printf("sweep: ok (%g failed points)\n",
                        summary.residuals.at("failed_points"));
            print_summary(summary);
        } else if (spectra->parsed()) {
            const auto cfg = waveqed::load_scenario_config(config_path);
            const auto summary = waveqed::run::run_spectra_job(cfg, opts);
            std::printf("spectra: ok\n");
            print_summary(summary);
        } else if (verify->parsed()) {
            waveqed::run::VerifyOptions vopts;
            vopts.flip_drive_sign = flip_drive_sign;
            vopts.threads = threads;
            const auto report = waveqed::run::run_verify(opts, vopts);
            const auto path = waveqed::run::write_verify_report(report, opts);
            for (const auto& c : report.checks)
                std::printf("[%s] %-32s value=%.3e threshold=%.3e %s\n",
                            c.passed ? "PASS" : "FAIL", c.name.c_str(), c.value, c.threshold,
                            c.detail.c_str());
            std::printf("report: %s\n", path.c_str());
            return report.all_passed() ? kExitOk : 1;
        }
    } catch (const waveqed::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "engine error: %s\n", e.what());
        return kExitEngine;
    }
    return kExitOk;
}
