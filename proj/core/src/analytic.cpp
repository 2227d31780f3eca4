#include "waveqed/analytic.hpp"

#include <algorithm>
#include <cmath>

namespace waveqed::analytic {

namespace {

void require_tp(double t_p) {
    if (!(t_p > 0)) throw std::invalid_argument("rect closed form: t_p must be positive");
}

// Hierarchy state for n photon levels plus two quadrature channels:
//   y = [n_1..n_n, Re s_1, Im s_1, .., N_R, N_L]
struct HierarchyOde {
    const EmitterParams& params;
    int n;

    std::size_t dim() const { return 3 * static_cast<std::size_t>(n) + 2; }

    void rhs(const std::vector<double>& y, double f, std::vector<double>& dy) const {
        const double gamma = params.gamma();
        const int nn = n;
        for (int k = 1; k <= nn; ++k) {
            const double c = std::sqrt(static_cast<double>(k) * params.gamma_R);
            const double nk = y[k - 1];
            const double sre = y[nn + 2 * (k - 1)];
            const double sim = y[nn + 2 * (k - 1) + 1];
            const double nprev = (k >= 2) ? y[k - 2] : 0.0;
            dy[k - 1] = -gamma * nk - 2.0 * c * f * sre;
            dy[nn + 2 * (k - 1)] = -0.5 * gamma * sre - c * f * (1.0 - 2.0 * nprev);
            dy[nn + 2 * (k - 1) + 1] = -0.5 * gamma * sim;
        }
        // transmitted flux for the top level; reflected flux sourced by the emitter
        const double c_top = std::sqrt(static_cast<double>(nn) * params.gamma_R);
        const double n_top = y[nn - 1];
        const double s_top_re = y[nn + 2 * (nn - 1)];
        const double flux_R =
            nn * f * f + 2.0 * c_top * f * s_top_re + params.gamma_R * n_top;
        dy[3 * nn] = flux_R;
        dy[3 * nn + 1] = params.gamma_L * n_top;
    }
};

// RK4 step over [t, t+dt] with one-sided envelope sampling at the interval
// ends, so that grid-aligned envelope discontinuities do not degrade the
// order of the method.
void rk4_step(const HierarchyOde& ode, double t, double dt, double f_lo, double f_mid,
              double f_hi, std::vector<double>& y, std::vector<double>& k1,
              std::vector<double>& k2, std::vector<double>& k3, std::vector<double>& k4,
              std::vector<double>& tmp) {
    (void)t;
    const std::size_t m = y.size();
    ode.rhs(y, f_lo, k1);
    for (std::size_t i = 0; i < m; ++i) tmp[i] = y[i] + 0.5 * dt * k1[i];
    ode.rhs(tmp, f_mid, k2);
    for (std::size_t i = 0; i < m; ++i) tmp[i] = y[i] + 0.5 * dt * k2[i];
    ode.rhs(tmp, f_mid, k3);
    for (std::size_t i = 0; i < m; ++i) tmp[i] = y[i] + dt * k3[i];
    ode.rhs(tmp, f_hi, k4);
    for (std::size_t i = 0; i < m; ++i)
        y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

struct HierarchyRun {
    HierarchyResult levels;
    EmissionRecord record;
};

HierarchyRun integrate_impl(const EmitterParams& params, const PulseSpec& pulse,
                            const TimeGrid& grid) {
    if (params.delta != 0.0)
        throw std::invalid_argument("hierarchy_integrate: only the resonant case is supported");
    const int n = pulse.photons();
    HierarchyOde ode{params, n};

    HierarchyRun out;
    out.levels.grid = grid;
    out.levels.photons = n;
    out.levels.populations.assign(n, std::vector<double>(grid.n_steps, 0.0));
    out.levels.coherences.assign(n, std::vector<cd>(grid.n_steps, cd{0, 0}));

    auto& rec = out.record;
    rec.photons = n;
    rec.n_tls = TimeSeries(grid, "n_tls");
    rec.flux_R = TimeSeries(grid, "flux_R");
    rec.flux_L = TimeSeries(grid, "flux_L");
    rec.N_R = TimeSeries(grid, "N_R");
    rec.N_L = TimeSeries(grid, "N_L");
    rec.input_remaining = TimeSeries(grid, "input_remaining");

    std::vector<double> y(ode.dim(), 0.0), k1(ode.dim()), k2(ode.dim()), k3(ode.dim()),
        k4(ode.dim()), tmp(ode.dim());
    const double dt = grid.dt;
    const double eta = dt * 1e-7;

    double arrived = 0.0;  // integral of |f|^2 up to t (midpoint per step)
    for (std::size_t step = 0; step < grid.n_steps; ++step) {
        const double t0 = static_cast<double>(step) * dt;
        const double f_lo = envelope(pulse, t0 + eta);
        const double f_mid = envelope(pulse, t0 + 0.5 * dt);
        const double f_hi = envelope(pulse, t0 + dt - eta);
        rk4_step(ode, t0, dt, f_lo, f_mid, f_hi, y, k1, k2, k3, k4, tmp);

        for (int k = 1; k <= n; ++k) {
            out.levels.populations[k - 1][step] = y[k - 1];
            out.levels.coherences[k - 1][step] =
                cd{y[n + 2 * (k - 1)], y[n + 2 * (k - 1) + 1]};
        }
        const double f_here = envelope(pulse, grid.t(step));
        const double c_top = std::sqrt(static_cast<double>(n) * params.gamma_R);
        const double s_top = y[n + 2 * (n - 1)];
        rec.n_tls[step] = y[n - 1];
        rec.flux_R[step] =
            n * f_here * f_here + 2.0 * c_top * f_here * s_top + params.gamma_R * y[n - 1];
        rec.flux_L[step] = params.gamma_L * y[n - 1];
        rec.N_R[step] = y[3 * n];
        rec.N_L[step] = y[3 * n + 1];
        arrived += f_mid * f_mid * dt;
        rec.input_remaining[step] = n * std::max(0.0, 1.0 - arrived);
    }
    return out;
}

}  // namespace

double pop_1photon_rect(Coupling kind, double t_p, double t) {
    require_tp(t_p);
    if (t < 0) return 0.0;
    double chiral;
    if (t <= t_p) {
        const double x = std::exp(-0.5 * t) - 1.0;
        chiral = 4.0 / t_p * x * x;
    } else {
        const double x = std::exp(0.5 * t_p) - 1.0;
        chiral = 4.0 / t_p * x * x * std::exp(-t);
    }
    return kind == Coupling::chiral ? chiral : 0.5 * chiral;
}

double coherence_1photon_rect(Coupling kind, double t_p, double t) {
    require_tp(t_p);
    if (t <= 0) return 0.0;
    const double pref = (kind == Coupling::chiral) ? 2.0 / std::sqrt(t_p)
                                                   : std::sqrt(2.0 / t_p);
    if (t <= t_p) return pref * (std::exp(-0.5 * t) - 1.0);
    return pref * (std::exp(-0.5 * t_p) - 1.0) * std::exp(-0.5 * (t - t_p));
}

double flux_chiral_rect(double t_p, double t) {
    require_tp(t_p);
    if (t < 0) return 0.0;
    if (t <= t_p) {
        const double x = std::exp(-0.5 * t) - 1.0;
        return 1.0 / t_p + 4.0 / t_p * x + 4.0 / t_p * x * x;
    }
    const double x = std::exp(0.5 * t_p) - 1.0;
    return 4.0 / t_p * x * x * std::exp(-t);
}

double g1_chiral_rect(double t_p, double t, double tau) {
    require_tp(t_p);
    if (tau < 0) throw std::invalid_argument("g1_chiral_rect: tau must be nonnegative");
    // G1 = (f(t) + s(t)) (f(t') + s(t')) with t' = t + tau; all factors real.
    const auto f = [t_p](double x) { return (x > 0 && x <= t_p) ? 1.0 / std::sqrt(t_p) : 0.0; };
    const auto s = [t_p](double x) { return coherence_1photon_rect(Coupling::chiral, t_p, x); };
    const double tp2 = t + tau;
    return (f(t) + s(t)) * (f(tp2) + s(tp2));
}

double pop_2photon_rect(Coupling kind, double t_p, double t) {
    require_tp(t_p);
    if (t <= 0) return 0.0;
    const double t_in = std::min(t, t_p);
    // land t_in on a node; post-pulse continuation is pure exponential decay
    const double dt_target = 0.002;
    const auto n = static_cast<std::size_t>(std::max(4.0, std::ceil(t_in / dt_target)));
    TimeGrid grid(t_in / static_cast<double>(n), n);
    auto pulse = PulseSpec::rect(t_p, 2);
    auto res = hierarchy_integrate(EmitterParams::preset(kind), pulse, grid);
    const double n_at = res.top_population().back();
    return (t <= t_p) ? n_at : n_at * std::exp(-(t - t_p));
}

double stationary_spectrum(const EmitterParams& params, const PulseSpec& pulse, double omega) {
    if (pulse.photons() != 1)
        throw std::invalid_argument("stationary_spectrum: closed form exists for 1 photon only");
    const double fw2 = envelope_spectrum(pulse, omega);
    if (params.gamma_L == 0.0) return fw2;  // chiral: identical to the input spectrum
    if (params.gamma_R != params.gamma_L)
        throw std::invalid_argument(
            "stationary_spectrum: closed form printed for chiral or symmetric coupling");
    const double g = params.gamma();
    const double x = omega - params.delta;
    return fw2 * (1.0 - (g * g / 4.0) / (x * x + g * g / 4.0));
}

HierarchyResult hierarchy_integrate(const EmitterParams& params, const PulseSpec& pulse,
                                    const TimeGrid& grid) {
    return integrate_impl(params, pulse, grid).levels;
}

EmissionRecord flux_general(const EmitterParams& params, const PulseSpec& pulse,
                            const TimeGrid& grid) {
    return integrate_impl(params, pulse, grid).record;
}

G1Matrix g1_qrt(const EmitterParams& params, const PulseSpec& pulse, const TimeGrid& grid,
                std::uint32_t terms) {
    if (pulse.photons() != 1)
        throw std::invalid_argument("g1_qrt: 2-photon correlations require the MPS engine");
    auto levels = hierarchy_integrate(params, pulse, grid);

    const std::size_t n = grid.n_steps;
    std::vector<double> f(n), s(n);
    for (std::size_t k = 0; k < n; ++k) {
        f[k] = envelope(pulse, grid.t(k));
        s[k] = levels.coherences[0][k].real();
    }
    const double root_gr = std::sqrt(params.gamma_R);

    G1Matrix g1(grid);
    for (std::size_t i = 0; i < n; ++i) {
        auto row = g1.row(i);
        const double fi = f[i];
        const double si = s[i];
        for (std::size_t j = 0; j < row.size(); ++j) {
            const double fj = f[i + j];
            const double sj = s[i + j];
            double v = 0.0;
            if (terms & kC1) v += fi * fj;
            if (terms & kC2) v += root_gr * fi * sj;
            if (terms & kC3) v += root_gr * fj * si;
            if (terms & kC4) v += params.gamma_R * si * sj;
            row[j] = cd{v, 0.0};
        }
    }
    return g1;
}

G1Matrix g1_input_only(const PulseSpec& pulse, const TimeGrid& grid) {
    const std::size_t n = grid.n_steps;
    std::vector<double> f(n);
    for (std::size_t k = 0; k < n; ++k) f[k] = envelope(pulse, grid.t(k));
    const double nf = pulse.photons();
    G1Matrix g1(grid);
    for (std::size_t i = 0; i < n; ++i) {
        auto row = g1.row(i);
        for (std::size_t j = 0; j < row.size(); ++j) row[j] = cd{nf * f[i] * f[i + j], 0.0};
    }
    return g1;
}

}  // namespace waveqed::analytic
