#include "waveqed/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "waveqed/analytic.hpp"
#include "waveqed/csv.hpp"
#include "waveqed/mps.hpp"
#include "waveqed/parallel.hpp"
#include "waveqed/spectra.hpp"

namespace waveqed::run {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                         start)
            .count();
    }
};

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw EngineError("cannot create output directory " + dir + ": " + ec.message());
}

std::string join(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

void write_manifest(const std::string& out_dir, const std::string& command,
                    const json& resolved_config, const std::map<std::string, double>& residuals,
                    const std::vector<std::string>& files, double wall_ms, RunSummary& summary) {
    json m;
    m["tool"] = {{"name", "waveqed"}, {"version", kVersion}};
    m["command"] = command;
    m["engine_versions"] = {{"analytic", 1}, {"mps", 1}};
    m["config"] = resolved_config;
    m["wall_time_ms"] = wall_ms;
    m["residuals"] = residuals;
    m["outputs"] = json::array();
    for (const auto& f : files)
        m["outputs"].push_back({{"file", fs::path(f).filename().string()},
                                {"fnv1a64", hash_file(f)}});
    const std::string path = join(out_dir, "run_manifest.json");
    std::ofstream os(path, std::ios::binary);
    os << m.dump(2) << "\n";
    if (!os) throw EngineError("cannot write " + path);
    summary.manifest_path = path;
    summary.files = files;
    summary.residuals = residuals;
}

EmissionRecord mps_record(const ScenarioConfig& cfg, const TimeGrid& grid,
                          mps::EvolveStats* stats = nullptr, double dt_override = 0.0) {
    TimeGrid g = grid;
    if (dt_override > 0.0) {
        ScenarioConfig alt = cfg;
        alt.gamma_dt = dt_override;
        g = alt.grid();
    }
    const auto params = cfg.emitter();
    const int channels = params.gamma_L > 0.0 ? 2 : 1;
    const auto pulse = cfg.pulse();
    auto state = cfg.photons == 1 ? mps::build_input_1photon(pulse, g, channels)
                                  : mps::build_input_2photon(pulse, g, channels);
    return mps::evolve(state, params, g, cfg.mps_policy, stats);
}

void append_record_csvs(const std::string& out_dir, const std::string& engine,
                        const EmissionRecord& rec, const OutputSelection& outputs,
                        std::vector<std::string>& files) {
    const auto times = rec.n_tls.grid.times();
    if (outputs.population) {
        CsvWriter w({"gamma_t", "n_tls"});
        for (std::size_t k = 0; k < times.size(); ++k) w.add_row({times[k], rec.n_tls[k]});
        const auto path = join(out_dir, "population_" + engine + ".csv");
        w.write(path);
        files.push_back(path);
    }
    if (outputs.flux) {
        CsvWriter w({"gamma_t", "flux_r", "flux_l", "n_r_cum", "n_l_cum", "input_remaining"});
        for (std::size_t k = 0; k < times.size(); ++k)
            w.add_row({times[k], rec.flux_R[k], rec.flux_L[k], rec.N_R[k], rec.N_L[k],
                       rec.input_remaining[k]});
        const auto path = join(out_dir, "flux_" + engine + ".csv");
        w.write(path);
        files.push_back(path);
    }
}

struct DiffStats {
    double max_abs = 0.0;
    double rms = 0.0;
};

DiffStats diff_series(const std::vector<double>& a, const std::vector<double>& b) {
    DiffStats d;
    if (a.size() != b.size())
        throw EngineError("cross-engine diff: series length mismatch");
    double ss = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double e = std::abs(a[i] - b[i]);
        d.max_abs = std::max(d.max_abs, e);
        ss += e * e;
    }
    d.rms = a.empty() ? 0.0 : std::sqrt(ss / static_cast<double>(a.size()));
    return d;
}

double conservation_residual(const EmissionRecord& rec) {
    const std::size_t last = rec.n_tls.size() - 1;
    return std::abs(rec.N_R[last] + rec.N_L[last] + rec.n_tls[last] +
                    rec.input_remaining[last] - rec.photons);
}

double conservation_pointwise(const EmissionRecord& rec) {
    double worst = 0.0;
    for (std::size_t k = 0; k < rec.n_tls.size(); ++k)
        worst = std::max(worst, std::abs(rec.N_R[k] + rec.N_L[k] + rec.n_tls[k] +
                                         rec.input_remaining[k] - rec.photons));
    return worst;
}

void apply_engine_override(ScenarioConfig& cfg, const std::string& override_sel) {
    if (override_sel.empty()) return;
    if (override_sel == "analytic") {
        cfg.engine_analytic = true;
        cfg.engine_mps = false;
    } else if (override_sel == "mps") {
        cfg.engine_analytic = false;
        cfg.engine_mps = true;
    } else if (override_sel == "both") {
        cfg.engine_analytic = true;
        cfg.engine_mps = true;
    } else {
        throw ConfigError("--engine must be analytic, mps or both");
    }
    cfg.validate();
}

// Population-drive sign mutation used by the verify self-test: integrates the
// level-1 equations with the population source flipped and packages the
// result as a record. The invariant checks must flag it.
EmissionRecord mutated_record_1photon_rect(Coupling kind, double t_p, const TimeGrid& grid) {
    const auto params = EmitterParams::preset(kind);
    const double c = std::sqrt(params.gamma_R);
    EmissionRecord rec;
    rec.photons = 1;
    rec.n_tls = TimeSeries(grid, "n_tls");
    rec.flux_R = TimeSeries(grid, "flux_R");
    rec.flux_L = TimeSeries(grid, "flux_L");
    rec.N_R = TimeSeries(grid, "N_R");
    rec.N_L = TimeSeries(grid, "N_L");
    rec.input_remaining = TimeSeries(grid, "input_remaining");

    const auto f = [t_p](double t) { return (t > 0 && t <= t_p) ? 1.0 / std::sqrt(t_p) : 0.0; };
    double y[4] = {0, 0, 0, 0};  // n, s, N_R, N_L
    auto rhs = [&](const double* v, double fv, double* dv) {
        dv[0] = -v[0] + 2.0 * c * fv * v[1];  // flipped drive sign
        dv[1] = -0.5 * v[1] - c * fv;
        dv[2] = fv * fv + 2.0 * c * fv * v[1] + params.gamma_R * v[0];
        dv[3] = params.gamma_L * v[0];
    };
    const double dt = grid.dt, eta = dt * 1e-7;
    double arrived = 0.0;
    for (std::size_t k = 0; k < grid.n_steps; ++k) {
        const double t0 = static_cast<double>(k) * dt;
        const double fl = f(t0 + eta), fm = f(t0 + dt / 2), fh = f(t0 + dt - eta);
        double k1[4], k2[4], k3[4], k4[4], tmp[4];
        rhs(y, fl, k1);
        for (int i = 0; i < 4; ++i) tmp[i] = y[i] + 0.5 * dt * k1[i];
        rhs(tmp, fm, k2);
        for (int i = 0; i < 4; ++i) tmp[i] = y[i] + 0.5 * dt * k2[i];
        rhs(tmp, fm, k3);
        for (int i = 0; i < 4; ++i) tmp[i] = y[i] + dt * k3[i];
        rhs(tmp, fh, k4);
        for (int i = 0; i < 4; ++i) y[i] += dt / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
        arrived += fm * fm * dt;
        const double fv = f(grid.t(k));
        rec.n_tls[k] = y[0];
        rec.flux_R[k] = fv * fv + 2.0 * c * fv * y[1] + params.gamma_R * y[0];
        rec.flux_L[k] = params.gamma_L * y[0];
        rec.N_R[k] = y[2];
        rec.N_L[k] = y[3];
        rec.input_remaining[k] = std::max(0.0, 1.0 - arrived);
    }
    return rec;
}

}  // namespace

RunSummary run_simulate(const ScenarioConfig& cfg_in, const RunOptions& opts) {
    Timer timer;
    ScenarioConfig cfg = cfg_in;
    apply_engine_override(cfg, opts.engine_override);
    ensure_dir(opts.out_dir);

    const auto grid = cfg.grid();
    std::vector<std::string> files;
    std::map<std::string, double> residuals;

    EmissionRecord rec_analytic, rec_mps;
    if (cfg.engine_analytic) {
        rec_analytic = analytic::flux_general(cfg.emitter(), cfg.pulse(), grid);
        append_record_csvs(opts.out_dir, "analytic", rec_analytic, cfg.outputs, files);
        residuals["conservation_analytic"] = conservation_residual(rec_analytic);
    }
    if (cfg.engine_mps) {
        mps::EvolveStats stats;
        rec_mps = mps_record(cfg, grid, &stats);
        append_record_csvs(opts.out_dir, "mps", rec_mps, cfg.outputs, files);
        residuals["conservation_mps"] = conservation_residual(rec_mps);
        residuals["mps_norm_defect"] = std::abs(1.0 - stats.final_norm);
        residuals["mps_max_bond"] = stats.max_bond;
    }
    if (cfg.engine_analytic && cfg.engine_mps) {
        CsvWriter w({"observable", "max_abs_err", "rms"});
        const auto add = [&](const std::string& name, const std::vector<double>& a,
                             const std::vector<double>& b) {
            const auto d = diff_series(a, b);
            w.add_raw_row({name, CsvWriter::format(d.max_abs), CsvWriter::format(d.rms)});
            residuals["diff_max_" + name] = d.max_abs;
        };
        // fluxes are compared as per-bin averages (differenced cumulative
        // counts): the MPS reading is a bin integral, not a point sample
        const auto bin_avg = [grid](const TimeSeries& cum) {
            std::vector<double> out(cum.size());
            double prev = 0.0;
            for (std::size_t k = 0; k < cum.size(); ++k) {
                out[k] = (cum[k] - prev) / grid.dt;
                prev = cum[k];
            }
            return out;
        };
        add("n_tls", rec_analytic.n_tls.values, rec_mps.n_tls.values);
        add("flux_r", bin_avg(rec_analytic.N_R), bin_avg(rec_mps.N_R));
        add("flux_l", bin_avg(rec_analytic.N_L), bin_avg(rec_mps.N_L));
        const auto path = join(opts.out_dir, "diff_summary.csv");
        w.write(path);
        files.push_back(path);
    }

    RunSummary summary;
    write_manifest(opts.out_dir, "simulate", json::parse(scenario_to_json(cfg)), residuals,
                   files, timer.ms(), summary);
    return summary;
}

RunSummary run_sweep(const SweepConfig& cfg, const RunOptions& opts) {
    Timer timer;
    cfg.validate();
    ensure_dir(opts.out_dir);

    const bool want1 = std::count(cfg.photon_numbers.begin(), cfg.photon_numbers.end(), 1) > 0;
    const bool want2 = std::count(cfg.photon_numbers.begin(), cfg.photon_numbers.end(), 2) > 0;

    struct Row {
        double tp;
        double peak1 = std::nan("");
        double peak2 = std::nan("");
        double r21 = std::nan("");
        std::string status = "ok";
    };
    std::vector<Row> rows(cfg.tp_list.size());

    parallel_for(cfg.tp_list.size(), opts.threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            Row& row = rows[i];
            row.tp = cfg.tp_list[i];
            try {
                auto peak_for = [&](int photons) {
                    const auto pulse = PulseSpec::rect(row.tp, photons);
                    const auto grid = default_grid(pulse, cfg.gamma_dt);
                    if (grid.n_steps > 2'000'000)
                        throw EngineError("sweep point needs " +
                                          std::to_string(grid.n_steps) +
                                          " steps; raise gamma_dt or shorten the pulse");
                    const auto params = EmitterParams::preset(cfg.kind);
                    std::vector<double> n;
                    if (cfg.engine == "analytic") {
                        n = analytic::hierarchy_integrate(params, pulse, grid)
                                .top_population();
                    } else {
                        const int channels = params.gamma_L > 0.0 ? 2 : 1;
                        auto state = photons == 1
                                         ? mps::build_input_1photon(pulse, grid, channels)
                                         : mps::build_input_2photon(pulse, grid, channels);
                        n = mps::evolve(state, params, grid, mps::TruncationPolicy{})
                                .n_tls.values;
                    }
                    double peak = 0.0;
                    for (double v : n) peak = std::max(peak, v);
                    return peak;
                };
                if (want1) row.peak1 = peak_for(1);
                if (want2) row.peak2 = peak_for(2);
                if (want1 && want2) row.r21 = row.peak2 / row.peak1;
            } catch (const std::exception& e) {
                row.status = std::string("error: ") + e.what();
            }
        }
    });

    CsvWriter w({"gamma_tp", "peak_n1", "peak_n2", "r21", "status"});
    for (const auto& r : rows)
        w.add_raw_row({CsvWriter::format(r.tp), CsvWriter::format(r.peak1),
                       CsvWriter::format(r.peak2), CsvWriter::format(r.r21), r.status});
    const auto path = join(opts.out_dir, "sweep_peak_population.csv");
    w.write(path);

    std::map<std::string, double> residuals;
    std::size_t failed = 0;
    for (const auto& r : rows)
        if (r.status != "ok") ++failed;
    residuals["failed_points"] = static_cast<double>(failed);

    RunSummary summary;
    write_manifest(opts.out_dir, "sweep", json::parse(sweep_to_json(cfg)), residuals, {path},
                   timer.ms(), summary);
    if (failed == cfg.tp_list.size())
        throw EngineError("sweep: every point failed; see sweep_peak_population.csv");
    return summary;
}

namespace {

void write_spectrogram_csv(const std::string& path, const spectra::SpectrogramGrid& sg,
                           const char* value_col, std::vector<std::string>& files) {
    CsvWriter w({"gamma_t", "omega_minus_wp_over_gamma", value_col});
    for (std::size_t it = 0; it < sg.n_times(); ++it)
        for (std::size_t iw = 0; iw < sg.n_omegas(); ++iw)
            w.add_row({sg.times[it], sg.omegas[iw], sg.at(it, iw)});
    w.write(path);
    files.push_back(path);
}

void write_plot_script(const std::string& out_dir, std::vector<std::string>& files) {
    const char* script = R"(#!/usr/bin/env python3
"""Plot the CSV outputs of a waveqed spectra job (generated file)."""
import csv
import os
import sys

try:
    import matplotlib.pyplot as plt
    import numpy as np
except ImportError as exc:
    sys.exit(f"plotting requires numpy and matplotlib: {exc}")

HERE = os.path.dirname(os.path.abspath(__file__))


def load(name):
    path = os.path.join(HERE, name)
    if not os.path.exists(path):
        return None
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, data = rows[0], rows[1:]
    cols = {h: np.array([float(r[i]) if r[i] not in ("", "nan") else np.nan
                         for r in data]) for i, h in enumerate(header)}
    return cols


def spectrogram(ax, cols, label):
    t = np.unique(cols["gamma_t"])
    w = np.unique(cols["omega_minus_wp_over_gamma"])
    z = cols[label].reshape(len(t), len(w))
    pc = ax.pcolormesh(w, t, z, shading="auto")
    ax.set_xlabel(r"$(\omega-\omega_p)/\gamma$")
    ax.set_ylabel(r"$\gamma t$")
    return pc


fig_count = 0
spec = load("spectrum_S.csv")
inten = load("intensity_I.csv")
stat = load("stationary.csv")
pop = load("population_analytic.csv") or load("population_mps.csv")

n_panels = sum(x is not None for x in (spec, inten, stat, pop))
if n_panels == 0:
    sys.exit("no CSV outputs found next to this script")
fig, axes = plt.subplots(1, n_panels, figsize=(4.2 * n_panels, 3.4))
if n_panels == 1:
    axes = [axes]
k = 0
if pop is not None:
    axes[k].plot(pop["gamma_t"], pop["n_tls"])
    axes[k].set_xlabel(r"$\gamma t$")
    axes[k].set_ylabel(r"$n_{TLS}$")
    k += 1
if spec is not None:
    fig.colorbar(spectrogram(axes[k], spec, "s_value"), ax=axes[k], label=r"$S(\omega,t)$")
    k += 1
if inten is not None:
    fig.colorbar(spectrogram(axes[k], inten, "i_value"), ax=axes[k], label=r"$I(\omega,t)$")
    k += 1
if stat is not None:
    axes[k].plot(stat["omega_minus_wp_over_gamma"], stat["s_stationary"], label="S")
    axes[k].plot(stat["omega_minus_wp_over_gamma"], stat["input_spectrum_ref"], "--",
                 label="input")
    axes[k].set_xlabel(r"$(\omega-\omega_p)/\gamma$")
    axes[k].legend()
    k += 1
fig.tight_layout()
out = os.path.join(HERE, "spectra.png")
fig.savefig(out, dpi=160)
print(f"wrote {out}")
)";
    const std::string path = join(out_dir, "plot_spectra.py");
    std::ofstream os(path, std::ios::binary);
    os << script;
    if (!os) throw EngineError("cannot write " + path);
    files.push_back(path);
}

}  // namespace

RunSummary run_spectra_job(const ScenarioConfig& cfg_in, const RunOptions& opts) {
    Timer timer;
    ScenarioConfig cfg = cfg_in;
    apply_engine_override(cfg, opts.engine_override);
    ensure_dir(opts.out_dir);

    const auto grid = cfg.grid();
    const auto pulse = cfg.pulse();
    const auto params = cfg.emitter();
    std::vector<std::string> files;
    std::map<std::string, double> residuals;

    std::string engine = cfg.engine_mps ? "mps" : "analytic";
    G1Matrix g1;
    if (cfg.no_tls) {
        g1 = analytic::g1_input_only(pulse, grid);
        engine = "reference";
    } else if (cfg.engine_mps) {
        const int channels = params.gamma_L > 0.0 ? 2 : 1;
        auto state = cfg.photons == 1 ? mps::build_input_1photon(pulse, grid, channels)
                                      : mps::build_input_2photon(pulse, grid, channels);
        EmissionRecord rec = mps::evolve(state, params, grid, cfg.mps_policy);
        append_record_csvs(opts.out_dir, "mps", rec, cfg.outputs, files);
        g1 = mps::correlator_matrix(state, opts.threads);
        residuals["conservation_mps"] = conservation_residual(rec);
        if (cfg.save_mps) {
            const auto path = join(opts.out_dir, "scattered_state.mps");
            mps::save_checkpoint(state, path);
            files.push_back(path);
        }
    } else {
        EmissionRecord rec = analytic::flux_general(params, pulse, grid);
        append_record_csvs(opts.out_dir, "analytic", rec, cfg.outputs, files);
        g1 = analytic::g1_qrt(params, pulse, grid);
        residuals["conservation_analytic"] = conservation_residual(rec);
    }

    auto omegas = spectra::default_omegas(cfg.omega_half_width, cfg.omega_points);

    if (cfg.outputs.g1) {
        const std::size_t n = g1.n_rows();
        std::size_t stride = cfg.g1_csv_stride;
        if (stride == 0)
            stride = std::max<std::size_t>(1, n / 500);
        CsvWriter w({"gamma_t", "gamma_tau", "g1_re", "g1_im"});
        for (std::size_t i = 0; i < n; i += stride)
            for (std::size_t j = 0; j < g1.row_length(i); j += stride)
                w.add_row({grid.t(i), static_cast<double>(j) * grid.dt, g1.at(i, j).real(),
                           g1.at(i, j).imag()});
        const auto path = join(opts.out_dir, "g1_" + engine + ".csv");
        w.write(path);
        files.push_back(path);
    }

    spectra::SpectrogramGrid S;
    if (cfg.outputs.spectrum || cfg.outputs.stationary) {
        S = spectra::time_dependent_spectrum(g1, omegas, cfg.spectrum_stride, opts.threads);
        if (cfg.outputs.spectrum)
            write_spectrogram_csv(join(opts.out_dir, "spectrum_S.csv"), S, "s_value", files);
    }
    if (cfg.outputs.intensity) {
        auto I = spectra::spectral_intensity(g1, omegas, cfg.spectrum_stride, opts.threads);
        write_spectrogram_csv(join(opts.out_dir, "intensity_I.csv"), I, "i_value", files);
    }
    if (cfg.outputs.stationary) {
        const std::size_t last = S.n_times() - 1;
        CsvWriter w({"omega_minus_wp_over_gamma", "s_stationary", "input_spectrum_ref",
                     "s_closed_form"});
        for (std::size_t iw = 0; iw < omegas.size(); ++iw) {
            const double closed =
                cfg.photons == 1 && !cfg.no_tls
                    ? analytic::stationary_spectrum(params, pulse, omegas[iw])
                    : std::nan("");
            w.add_row({omegas[iw], S.at(last, iw), envelope_spectrum(pulse, omegas[iw]),
                       closed});
        }
        const auto path = join(opts.out_dir, "stationary.csv");
        w.write(path);
        files.push_back(path);

        // residuals: intensity identity and, for 1-photon chiral, input match
        const auto stride = spectra::identity_safe_stride(grid, cfg.omega_half_width);
        const auto I_int = spectra::integrate_intensity(g1, omegas, stride, opts.threads);
        double num = 0.0, den = 0.0;
        for (std::size_t iw = 0; iw < omegas.size(); ++iw) {
            const double d = I_int[iw] - S.at(last, iw);
            num += d * d;
            den += S.at(last, iw) * S.at(last, iw);
        }
        residuals["intensity_identity_rms"] = den > 0 ? std::sqrt(num / den) : 0.0;
        if (cfg.photons == 1 && cfg.kind == Coupling::chiral && !cfg.no_tls) {
            double n2 = 0.0, d2 = 0.0;
            for (std::size_t iw = 0; iw < omegas.size(); ++iw) {
                const double ref = envelope_spectrum(pulse, omegas[iw]);
                const double d = S.at(last, iw) - ref;
                n2 += d * d;
                d2 += ref * ref;
            }
            residuals["stationary_vs_input_rms"] = d2 > 0 ? std::sqrt(n2 / d2) : 0.0;
        }
    }
    write_plot_script(opts.out_dir, files);

    RunSummary summary;
    write_manifest(opts.out_dir, "spectra", json::parse(scenario_to_json(cfg)), residuals,
                   files, timer.ms(), summary);
    return summary;
}

namespace {

void add_check(VerifyReport& report, const std::string& name, double value, double threshold,
               const std::string& detail = "") {
    report.checks.push_back({name, value <= threshold, value, threshold, detail});
}

}  // namespace

VerifyReport run_verify(const RunOptions& opts, const VerifyOptions& vopts) {
    VerifyReport report;
    const int threads = vopts.threads > 0 ? vopts.threads : opts.threads;

    if (vopts.flip_drive_sign) {
        // self-test: a miswired population drive must trip the invariants
        const auto pulse = PulseSpec::rect(2.0, 1);
        const auto grid = default_grid(pulse, 0.005);
        for (auto kind : {Coupling::chiral, Coupling::symmetric}) {
            const auto rec = mutated_record_1photon_rect(kind, 2.0, grid);
            const char* tag = kind == Coupling::chiral ? "chiral" : "symmetric";
            add_check(report, std::string("mutated_conservation_") + tag,
                      conservation_pointwise(rec), 1e-3, "expected to fail");
        }
        const auto rec_sym = mutated_record_1photon_rect(Coupling::symmetric, 2.0, grid);
        double worst = 0.0;
        for (std::size_t k = 0; k < grid.n_steps; ++k)
            worst = std::max(worst,
                             std::abs(rec_sym.n_tls[k] -
                                      0.5 * analytic::pop_1photon_rect(Coupling::chiral, 2.0,
                                                                       grid.t(k))));
        add_check(report, "mutated_factor2", worst, 2e-3, "expected to fail");
        return report;
    }

    const double dt = 0.005;

    // factor-2 law, analytic (exact) and MPS
    {
        const auto pulse = PulseSpec::rect(2.0, 1);
        const auto grid = default_grid(pulse, dt);
        const auto sym =
            analytic::hierarchy_integrate(EmitterParams::symmetric(), pulse, grid);
        double worst = 0.0;
        for (std::size_t k = 0; k < grid.n_steps; ++k)
            worst = std::max(
                worst, std::abs(sym.top_population()[k] -
                                0.5 * analytic::pop_1photon_rect(Coupling::chiral, 2.0,
                                                                 grid.t(k))));
        add_check(report, "factor2_analytic", worst, 1e-9);

        if (!vopts.quick) {
            auto state = mps::build_input_1photon(pulse, grid, 2);
            const auto rec =
                mps::evolve(state, EmitterParams::symmetric(), grid, mps::TruncationPolicy{});
            double worst_mps = 0.0;
            for (std::size_t k = 0; k < grid.n_steps; ++k)
                worst_mps = std::max(
                    worst_mps, std::abs(rec.n_tls[k] -
                                        0.5 * analytic::pop_1photon_rect(Coupling::chiral, 2.0,
                                                                         grid.t(k))));
            add_check(report, "factor2_mps", worst_mps, 2e-3);
        }
    }

    // flux closed form and photon-number integral (chiral rect)
    {
        const auto pulse = PulseSpec::rect(2.0, 1);
        const auto grid = default_grid(pulse, dt);
        const auto rec = analytic::flux_general(EmitterParams::chiral(), pulse, grid);
        double worst = 0.0;
        for (std::size_t k = 0; k < grid.n_steps; ++k)
            worst = std::max(worst,
                             std::abs(rec.flux_R[k] - analytic::flux_chiral_rect(2.0, grid.t(k))));
        add_check(report, "flux_closed_form", worst, 1e-6);
        const std::size_t last = grid.n_steps - 1;
        add_check(report, "flux_integral",
                  std::abs(rec.N_R[last] + rec.n_tls[last] - 1.0), 1e-6);
    }

    // G1 diagonal equals the flux
    {
        const auto pulse = PulseSpec::rect(2.0, 1);
        const auto grid = default_grid(pulse, vopts.quick ? 0.02 : dt);
        const auto rec = analytic::flux_general(EmitterParams::chiral(), pulse, grid);
        const auto g1 = analytic::g1_qrt(EmitterParams::chiral(), pulse, grid);
        double worst = 0.0;
        for (std::size_t k = 0; k < grid.n_steps; ++k)
            worst = std::max(worst, std::abs(g1.at(k, 0).real() - rec.flux_R[k]));
        add_check(report, "g1_diagonal_analytic", worst, 1e-9);

        if (!vopts.quick) {
            auto state = mps::build_input_1photon(pulse, grid, 1);
            const auto mrec =
                mps::evolve(state, EmitterParams::chiral(), grid, mps::TruncationPolicy{});
            const auto mg1 = mps::correlator_matrix(state, threads);
            double worst_diag = 0.0;
            for (std::size_t k = 0; k < grid.n_steps; ++k)
                worst_diag =
                    std::max(worst_diag, std::abs(mg1.at(k, 0).real() - mrec.flux_R[k]));
            add_check(report, "g1_diagonal_mps", worst_diag, 1e-9);
        }
    }

    // intensity identity
    {
        const auto pulse = PulseSpec::rect(2.0, 1);
        const auto grid = default_grid(pulse, vopts.quick ? 0.02 : 0.01);
        const auto g1 = analytic::g1_qrt(EmitterParams::chiral(), pulse, grid);
        const auto omegas = spectra::default_omegas();
        const auto S = spectra::stationary_spectrum_numeric(g1, omegas, threads);
        const auto I_int = spectra::integrate_intensity(
            g1, omegas, spectra::identity_safe_stride(grid, 10.0), threads);
        double num = 0.0, den = 0.0;
        for (std::size_t iw = 0; iw < omegas.size(); ++iw) {
            num += (I_int[iw] - S[iw]) * (I_int[iw] - S[iw]);
            den += S[iw] * S[iw];
        }
        add_check(report, "intensity_identity", std::sqrt(num / den), 0.02);
    }

    // conservation across engines and scenarios
    {
        struct Scen {
            Coupling kind;
            int photons;
            bool gaussian;
        };
        std::vector<Scen> scens;
        for (auto kind : {Coupling::chiral, Coupling::symmetric})
            for (int ph : {1, 2})
                for (bool gauss : {false, true}) {
                    if (vopts.quick && (gauss || ph == 2)) continue;
                    scens.push_back({kind, ph, gauss});
                }
        for (const auto& sc : scens) {
            const auto pulse = sc.gaussian ? PulseSpec::gaussian(3.0, 1.0, sc.photons)
                                           : PulseSpec::rect(2.0, sc.photons);
            const auto grid = default_grid(pulse, dt);
            const auto params = EmitterParams::preset(sc.kind);
            std::string tag = std::string(sc.kind == Coupling::chiral ? "chiral" : "symmetric") +
                              "_n" + std::to_string(sc.photons) +
                              (sc.gaussian ? "_gauss" : "_rect");
            const auto rec = analytic::flux_general(params, pulse, grid);
            add_check(report, "conservation_analytic_" + tag, conservation_residual(rec),
                      1e-3);
            if (!vopts.quick) {
                const int channels = params.gamma_L > 0.0 ? 2 : 1;
                auto state = sc.photons == 1 ? mps::build_input_1photon(pulse, grid, channels)
                                             : mps::build_input_2photon(pulse, grid, channels);
                const auto mrec = mps::evolve(state, params, grid, mps::TruncationPolicy{});
                add_check(report, "conservation_mps_" + tag, conservation_pointwise(mrec),
                          1e-3);
            }
        }
    }

    // first-order collision-model convergence: halving dt halves the error
    if (!vopts.quick) {
        const auto pulse = PulseSpec::rect(2.0, 1);
        auto err_at = [&](double step) {
            const auto grid = default_grid(pulse, step);
            auto state = mps::build_input_1photon(pulse, grid, 1);
            const auto rec =
                mps::evolve(state, EmitterParams::chiral(), grid, mps::TruncationPolicy{});
            double worst = 0.0;
            for (std::size_t k = 0; k < grid.n_steps; ++k)
                worst = std::max(worst,
                                 std::abs(rec.n_tls[k] - analytic::pop_1photon_rect(
                                                             Coupling::chiral, 2.0, grid.t(k))));
            return worst;
        };
        const double ratio = err_at(0.01) / err_at(0.005);
        const double dev = std::abs(ratio - 2.0);
        add_check(report, "mps_convergence_order", dev, 0.6,
                  "error ratio dt=0.01 vs dt=0.005 within 2 +/- 0.6");
    }

    return report;
}

std::string write_verify_report(const VerifyReport& report, const RunOptions& opts) {
    ensure_dir(opts.out_dir);
    json j;
    j["tool"] = {{"name", "waveqed"}, {"version", kVersion}};
    j["all_passed"] = report.all_passed();
    j["checks"] = json::array();
    for (const auto& c : report.checks)
        j["checks"].push_back({{"name", c.name},
                               {"passed", c.passed},
                               {"value", c.value},
                               {"threshold", c.threshold},
                               {"detail", c.detail}});
    std::string path = join(opts.out_dir, "verify_report.json");
    std::ofstream os(path, std::ios::binary);
    os << j.dump(2) << "\n";
    if (!os) throw EngineError("cannot write " + path);
    return path;
}

}  // namespace waveqed::run
