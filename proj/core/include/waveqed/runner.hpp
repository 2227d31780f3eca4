#pragma once

#include <map>
#include <string>
#include <vector>

#include "waveqed/config.hpp"
#include "waveqed/types.hpp"

namespace waveqed::run {

struct RunOptions {
    std::string out_dir = "waveqed_out";
    int threads = 1;
    std::string engine_override;  // "", "analytic", "mps", "both"
};

struct EngineError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Files written plus the residuals recorded into the run manifest.
struct RunSummary {
    std::vector<std::string> files;
    std::map<std::string, double> residuals;
    std::string manifest_path;
};

/// One verification check with its measured value and pinned threshold.
struct CheckResult {
    std::string name;
    bool passed = false;
    double value = 0.0;
    double threshold = 0.0;
    std::string detail;
};

struct VerifyReport {
    std::vector<CheckResult> checks;
    bool all_passed() const {
        for (const auto& c : checks)
            if (!c.passed) return false;
        return true;
    }
};

struct VerifyOptions {
    // Self-test hook: miswire the population drive term in a synthetic record
    // and require the invariant checks to catch it.
    bool flip_drive_sign = false;
    int threads = 1;
    bool quick = false;  // restrict to the fast subset (used by unit tests)
};

/// Population/flux run for the configured engines; cross-engine diff summary
/// when both are selected.
RunSummary run_simulate(const ScenarioConfig& cfg, const RunOptions& opts);

/// Peak-population sweep over pulse lengths, with the 2-to-1 photon peak
/// ratio when both photon numbers are requested. Failed points are marked and
/// the sweep continues.
RunSummary run_sweep(const SweepConfig& cfg, const RunOptions& opts);

/// G1 kernel plus S(w,t), I(w,t), long-time spectrum, input-spectrum
/// reference and a plot script.
RunSummary run_spectra_job(const ScenarioConfig& cfg, const RunOptions& opts);

/// Machine-readable invariant suite (conservation, factor-2 law, flux
/// integral, G1 diagonal consistency, intensity identity, dt-convergence).
VerifyReport run_verify(const RunOptions& opts, const VerifyOptions& vopts = {});

/// Writes verify_report.json under opts.out_dir; returns its path.
std::string write_verify_report(const VerifyReport& report, const RunOptions& opts);

}  // namespace waveqed::run
