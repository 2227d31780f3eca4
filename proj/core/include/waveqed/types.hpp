#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace waveqed {

using cd = std::complex<double>;

/// Coupling layout of the emitter relative to the waveguide channels.
enum class Coupling { chiral, symmetric };

/// Emitter decay rates into the right/left channels plus detuning,
/// in units where the total decay rate gamma = gamma_R + gamma_L = 1
/// and v_g = 1. delta = omega_a - omega_p.
struct EmitterParams {
    double gamma_R = 1.0;
    double gamma_L = 0.0;
    double delta = 0.0;

    EmitterParams() = default;
    EmitterParams(double gr, double gl, double d) : gamma_R(gr), gamma_L(gl), delta(d) {
        validate();
    }

    static EmitterParams chiral(double gamma = 1.0, double delta = 0.0) {
        return {gamma, 0.0, delta};
    }
    static EmitterParams symmetric(double gamma = 1.0, double delta = 0.0) {
        return {gamma / 2.0, gamma / 2.0, delta};
    }
    static EmitterParams preset(Coupling kind, double gamma = 1.0, double delta = 0.0) {
        return kind == Coupling::chiral ? chiral(gamma, delta) : symmetric(gamma, delta);
    }

    double gamma() const { return gamma_R + gamma_L; }

    void validate() const {
        if (gamma_R < 0 || gamma_L < 0)
            throw std::invalid_argument("EmitterParams: decay rates must be nonnegative");
        if (gamma_R + gamma_L <= 0)
            throw std::invalid_argument("EmitterParams: total decay rate must be positive");
    }
};

/// Uniform time discretization. Bin k covers (k*dt, (k+1)*dt]; observables
/// are stamped at the bin's right edge t(k) = (k+1)*dt.
struct TimeGrid {
    double dt = 0.0;
    std::size_t n_steps = 0;

    TimeGrid() = default;
    TimeGrid(double step, std::size_t n) : dt(step), n_steps(n) {
        if (!(dt > 0)) throw std::invalid_argument("TimeGrid: dt must be positive");
        if (n_steps < 1) throw std::invalid_argument("TimeGrid: n_steps must be >= 1");
    }

    double t(std::size_t k) const { return static_cast<double>(k + 1) * dt; }
    double t_end() const { return t(n_steps - 1); }

    std::vector<double> times() const {
        std::vector<double> out(n_steps);
        for (std::size_t k = 0; k < n_steps; ++k) out[k] = t(k);
        return out;
    }

    bool operator==(const TimeGrid& o) const {
        return dt == o.dt && n_steps == o.n_steps;
    }
};

/// Scalar observable sampled on a TimeGrid.
struct TimeSeries {
    TimeGrid grid;
    std::string label;
    std::vector<double> values;

    TimeSeries() = default;
    TimeSeries(TimeGrid g, std::string name)
        : grid(g), label(std::move(name)), values(g.n_steps, 0.0) {}

    std::size_t size() const { return values.size(); }
    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
};

/// Emitter population, channel fluxes and their cumulative integrals for one
/// scattering run. `input_remaining` tracks the part of the input pulse that
/// has not yet reached the emitter, so that
/// N_R + N_L + n_tls + input_remaining = photons holds pointwise.
struct EmissionRecord {
    int photons = 1;
    TimeSeries n_tls;
    TimeSeries flux_R;
    TimeSeries flux_L;
    TimeSeries N_R;
    TimeSeries N_L;
    TimeSeries input_remaining;
};

/// Two-time correlation v_g <a_R^dag(t_i) a_R(t_i + tau_j)> on the triangular
/// grid tau_j = j*dt, j in [0, n_steps - i). Only the tau >= 0 triangle is
/// stored; the full kernel extends by K(t', t) = conj(K(t, t')).
class G1Matrix {
  public:
    G1Matrix() = default;
    explicit G1Matrix(TimeGrid g) : grid_(g), offsets_(g.n_steps + 1, 0) {
        const std::size_t n = g.n_steps;
        for (std::size_t i = 0; i < n; ++i) offsets_[i + 1] = offsets_[i] + (n - i);
        data_.assign(offsets_[n], cd{0.0, 0.0});
    }

    const TimeGrid& grid() const { return grid_; }
    std::size_t n_rows() const { return grid_.n_steps; }
    std::size_t row_length(std::size_t i) const { return grid_.n_steps - i; }

    cd& at(std::size_t i, std::size_t j) { return data_[offsets_[i] + j]; }
    cd at(std::size_t i, std::size_t j) const { return data_[offsets_[i] + j]; }

    std::span<cd> row(std::size_t i) { return {data_.data() + offsets_[i], row_length(i)}; }
    std::span<const cd> row(std::size_t i) const {
        return {data_.data() + offsets_[i], row_length(i)};
    }

    std::size_t n_cells() const { return data_.size(); }

  private:
    TimeGrid grid_;
    std::vector<std::size_t> offsets_;
    std::vector<cd> data_;
};

inline constexpr const char* kVersion = "0.1.0";

}  // namespace waveqed
