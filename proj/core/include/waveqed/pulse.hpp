#pragma once

#include <variant>
#include <vector>

#include "waveqed/types.hpp"

namespace waveqed {

/// Rectangular envelope 1/sqrt(t_p) on (0, t_p].
struct RectShape {
    double t_p;
};

/// Gaussian envelope of width t_p centered at t_c, normalized so that the
/// squared envelope integrates to one over the real line.
struct GaussianShape {
    double t_c;
    double t_p;
};

/// Piecewise-constant envelope given by samples on a TimeGrid (value k holds
/// on bin k). Renormalized at construction.
struct SampledShape {
    TimeGrid grid;
    std::vector<double> values;
};

using PulseShape = std::variant<RectShape, GaussianShape, SampledShape>;

/// Temporal envelope f(t) of an n-photon Fock-state pulse, n in {1, 2},
/// with the normalization integral |f(t)|^2 dt = 1.
class PulseSpec {
  public:
    static PulseSpec rect(double t_p, int photons = 1);
    static PulseSpec gaussian(double t_c, double t_p, int photons = 1);
    static PulseSpec sampled(TimeGrid grid, std::vector<double> values, int photons = 1);

    const PulseShape& shape() const { return shape_; }
    int photons() const { return photons_; }

    bool is_rect() const { return std::holds_alternative<RectShape>(shape_); }

    /// End of compact support; for the Gaussian, the point past which the
    /// envelope is negligible (t_c + 8 t_p).
    double support_end() const;

  private:
    PulseSpec(PulseShape s, int photons);
    PulseShape shape_;
    int photons_;
};

/// f(t); zero outside support. Total function of t.
double envelope(const PulseSpec& pulse, double t);

/// |f(omega)|^2 under the unitary convention
/// f(omega) = (2*pi)^{-1/2} integral f(t) e^{i omega t} dt,
/// so that integral |f(omega)|^2 d omega = 1.
double envelope_spectrum(const PulseSpec& pulse, double omega);

/// Bin amplitudes c_k = f(t(k)) * sqrt(dt), renormalized so that
/// sum |c_k|^2 = 1 exactly. Throws if the raw sampled norm deviates from one
/// by more than `max_defect` (grid too short or too coarse) or is zero.
std::vector<double> sample_bin_amplitudes(const PulseSpec& pulse, const TimeGrid& grid,
                                          double max_defect = 1e-2);

/// Default simulation grid: pulse support plus a decay tail, with dt snapped
/// so rectangular pulse edges land on step boundaries.
TimeGrid default_grid(const PulseSpec& pulse, double dt = 0.005, double tail = 15.0);

}  // namespace waveqed
