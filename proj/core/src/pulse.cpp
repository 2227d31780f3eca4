#include "waveqed/pulse.hpp"

#include <cmath>
#include <numbers>

namespace waveqed {

namespace {

double sinc(double x) {
    if (std::abs(x) < 1e-8) return 1.0 - x * x / 6.0;
    return std::sin(x) / x;
}

}  // namespace

PulseSpec::PulseSpec(PulseShape s, int photons) : shape_(std::move(s)), photons_(photons) {
    if (photons_ != 1 && photons_ != 2)
        throw std::invalid_argument("PulseSpec: photon number must be 1 or 2");
}

PulseSpec PulseSpec::rect(double t_p, int photons) {
    if (!(t_p > 0)) throw std::invalid_argument("PulseSpec: rect t_p must be positive");
    return PulseSpec(RectShape{t_p}, photons);
}

PulseSpec PulseSpec::gaussian(double t_c, double t_p, int photons) {
    if (!(t_p > 0)) throw std::invalid_argument("PulseSpec: gaussian t_p must be positive");
    return PulseSpec(GaussianShape{t_c, t_p}, photons);
}

PulseSpec PulseSpec::sampled(TimeGrid grid, std::vector<double> values, int photons) {
    if (values.size() != grid.n_steps)
        throw std::invalid_argument("PulseSpec: sampled values must match the grid");
    double norm2 = 0.0;
    for (double v : values) norm2 += v * v;
    norm2 *= grid.dt;
    if (!(norm2 > 0))
        throw std::invalid_argument("PulseSpec: sampled envelope has zero norm");
    const double scale = 1.0 / std::sqrt(norm2);
    for (double& v : values) v *= scale;
    return PulseSpec(SampledShape{grid, std::move(values)}, photons);
}

double PulseSpec::support_end() const {
    return std::visit(
        [](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, RectShape>) return s.t_p;
            if constexpr (std::is_same_v<T, GaussianShape>) return s.t_c + 8.0 * s.t_p;
            if constexpr (std::is_same_v<T, SampledShape>) return s.grid.t_end();
        },
        shape_);
}

double envelope(const PulseSpec& pulse, double t) {
    return std::visit(
        [t](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, RectShape>) {
                return (t > 0.0 && t <= s.t_p) ? 1.0 / std::sqrt(s.t_p) : 0.0;
            }
            if constexpr (std::is_same_v<T, GaussianShape>) {
                const double amp = std::pow(std::numbers::pi * s.t_p * s.t_p, -0.25);
                const double x = (t - s.t_c) / s.t_p;
                return amp * std::exp(-0.5 * x * x);
            }
            if constexpr (std::is_same_v<T, SampledShape>) {
                if (t <= 0.0 || t > s.grid.t_end()) return 0.0;
                // bin k covers (k dt, (k+1) dt]; nudge against roundoff so
                // right-edge samples land in their own bin
                double idx = std::ceil(t / s.grid.dt - 1e-9);
                if (idx < 1.0) idx = 1.0;
                auto k = static_cast<std::size_t>(idx) - 1;
                if (k >= s.values.size()) k = s.values.size() - 1;
                return s.values[k];
            }
        },
        pulse.shape());
}

double envelope_spectrum(const PulseSpec& pulse, double omega) {
    return std::visit(
        [omega](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, RectShape>) {
                const double x = omega * s.t_p / 2.0;
                const double sc = sinc(x);
                return s.t_p / (2.0 * std::numbers::pi) * sc * sc;
            }
            if constexpr (std::is_same_v<T, GaussianShape>) {
                // |f(w)|^2 = (t_p/sqrt(pi)) exp(-w^2 t_p^2)
                return s.t_p / std::sqrt(std::numbers::pi) *
                       std::exp(-omega * omega * s.t_p * s.t_p);
            }
            if constexpr (std::is_same_v<T, SampledShape>) {
                // exact transform of the piecewise-constant envelope
                const double dt = s.grid.dt;
                cd acc{0.0, 0.0};
                for (std::size_t k = 0; k < s.values.size(); ++k) {
                    const double tm = (static_cast<double>(k) + 0.5) * dt;
                    acc += s.values[k] * std::polar(dt * sinc(omega * dt / 2.0), omega * tm);
                }
                const double mod = std::abs(acc);
                return mod * mod / (2.0 * std::numbers::pi);
            }
        },
        pulse.shape());
}

std::vector<double> sample_bin_amplitudes(const PulseSpec& pulse, const TimeGrid& grid,
                                          double max_defect) {
    std::vector<double> c(grid.n_steps);
    double norm2 = 0.0;
    const double sq = std::sqrt(grid.dt);
    for (std::size_t k = 0; k < grid.n_steps; ++k) {
        // midpoint of bin k = (k dt, (k+1) dt]: the leading-order L2
        // projection of the envelope onto the bin mode
        c[k] = envelope(pulse, (static_cast<double>(k) + 0.5) * grid.dt) * sq;
        norm2 += c[k] * c[k];
    }
    if (!(norm2 > 0))
        throw std::invalid_argument("sample_bin_amplitudes: envelope vanishes on the grid");
    if (std::abs(norm2 - 1.0) > max_defect)
        throw std::invalid_argument(
            "sample_bin_amplitudes: sampled norm defect exceeds tolerance; "
            "grid does not resolve or cover the pulse");
    const double scale = 1.0 / std::sqrt(norm2);
    for (double& v : c) v *= scale;
    return c;
}

TimeGrid default_grid(const PulseSpec& pulse, double dt, double tail) {
    const double support = pulse.support_end();
    double step = dt;
    if (pulse.is_rect()) {
        // land the pulse edge exactly on a step boundary
        const double t_p = std::get<RectShape>(pulse.shape()).t_p;
        const auto m = static_cast<std::size_t>(std::max(1.0, std::round(t_p / dt)));
        step = t_p / static_cast<double>(m);
    }
    const auto n = static_cast<std::size_t>(std::ceil((support + tail) / step));
    return TimeGrid(step, n);
}

}  // namespace waveqed
