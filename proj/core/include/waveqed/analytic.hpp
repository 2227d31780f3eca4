#pragma once

#include <cstdint>

#include "waveqed/pulse.hpp"
#include "waveqed/types.hpp"

namespace waveqed::analytic {

// ---------------------------------------------------------------------------
// Closed forms for a rectangular 1-photon pulse on resonance (gamma = 1).
// ---------------------------------------------------------------------------

/// Emitter population <sigma^+ sigma^->(t). The symmetric value is exactly
/// half the chiral one at every time.
double pop_1photon_rect(Coupling kind, double t_p, double t);

/// Coherence <0,g|sigma^-(t)|1,g>. Real and nonpositive; continued past t_p
/// by free decay at rate gamma/2.
double coherence_1photon_rect(Coupling kind, double t_p, double t);

/// Transmitted flux v_g <a_R^dag(t) a_R(t)> for a chiral emitter.
double flux_chiral_rect(double t_p, double t);

/// Two-time correlation G1(t, t+tau) for the chiral emitter, as the sum of
/// the four decomposition terms (input-input, two cross terms, emitter).
double g1_chiral_rect(double t_p, double t, double tau);

/// 2-photon emitter population, computed by the ODE hierarchy (the printed
/// closed forms live only in a test fixture).
double pop_2photon_rect(Coupling kind, double t_p, double t);

/// Stationary (long-time) transmitted spectrum. Chiral: identical to the
/// input spectrum. Symmetric: input spectrum times a Lorentzian dip at the
/// detuning.
double stationary_spectrum(const EmitterParams& params, const PulseSpec& pulse, double omega);

// ---------------------------------------------------------------------------
// ODE hierarchy over photon-number sectors (resonant case).
// ---------------------------------------------------------------------------

/// Populations n_k = <k,g|sigma^+ sigma^-|k,g> and coherences
/// s_k = <k-1,g|sigma^-|k,g> for k = 1..photons, integrated with fixed-step
/// RK4 on the grid. The drive coefficient for level k is sqrt(k * gamma_R)
/// with the input pulse in the right channel.
struct HierarchyResult {
    TimeGrid grid;
    int photons = 1;
    // [level][step], level index k-1
    std::vector<std::vector<double>> populations;
    std::vector<std::vector<cd>> coherences;

    const std::vector<double>& top_population() const { return populations.back(); }
};

HierarchyResult hierarchy_integrate(const EmitterParams& params, const PulseSpec& pulse,
                                    const TimeGrid& grid);

/// Transmitted and reflected flux plus cumulative photon numbers for an
/// arbitrary normalized envelope. Cumulative integrals are carried as RK4
/// quadrature channels so that conservation holds to integrator accuracy.
EmissionRecord flux_general(const EmitterParams& params, const PulseSpec& pulse,
                            const TimeGrid& grid);

// ---------------------------------------------------------------------------
// Two-time correlations via the quantum regression of the sigma^- equation.
// ---------------------------------------------------------------------------

/// Term selection for the four-part G1 decomposition.
enum G1Terms : std::uint32_t {
    kC1 = 1u << 0,  // f*(t) f(t+tau)
    kC2 = 1u << 1,  // sqrt(gamma_R) f*(t) s(t+tau)
    kC3 = 1u << 2,  // sqrt(gamma_R) f(t+tau) s*(t)
    kC4 = 1u << 3,  // gamma_R s*(t) s(t+tau)
    kAllTerms = kC1 | kC2 | kC3 | kC4,
};

/// Full (t, tau) triangle of v_g <a_R^dag(t) a_R(t+tau)> for a 1-photon
/// pulse. The tau evolution of sigma^- decays at gamma/2, so the emitter term
/// is gamma_R s*(t) s(t+tau) with s the level-1 coherence; its tau = 0 value
/// is the population initial condition gamma_R n_tls(t).
G1Matrix g1_qrt(const EmitterParams& params, const PulseSpec& pulse, const TimeGrid& grid,
                std::uint32_t terms = kAllTerms);

/// Free-propagation kernel photons * f*(t) f(t+tau): the correlation of the
/// bare pulse with no emitter in the waveguide.
G1Matrix g1_input_only(const PulseSpec& pulse, const TimeGrid& grid);

}  // namespace waveqed::analytic
