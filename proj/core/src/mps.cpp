#include "waveqed/mps.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>

#include "waveqed/parallel.hpp"

namespace waveqed::mps {

namespace {

MatrixXcd left_matrix(const Tensor3& t) {  // (dl*d) x dr
    MatrixXcd m(t.dl * t.d, t.dr);
    for (int l = 0; l < t.dl; ++l)
        for (int p = 0; p < t.d; ++p)
            for (int r = 0; r < t.dr; ++r) m(l * t.d + p, r) = t.at(l, p, r);
    return m;
}

MatrixXcd right_matrix(const Tensor3& t) {  // dl x (d*dr)
    MatrixXcd m(t.dl, t.d * t.dr);
    for (int l = 0; l < t.dl; ++l)
        for (int p = 0; p < t.d; ++p)
            for (int r = 0; r < t.dr; ++r) m(l, p * t.dr + r) = t.at(l, p, r);
    return m;
}

Tensor3 from_left_matrix(const MatrixXcd& m, int dl, int d) {
    Tensor3 t(dl, d, static_cast<int>(m.cols()));
    for (int l = 0; l < dl; ++l)
        for (int p = 0; p < d; ++p)
            for (int r = 0; r < t.dr; ++r) t.at(l, p, r) = m(l * d + p, r);
    return t;
}

Tensor3 from_right_matrix(const MatrixXcd& m, int d, int dr) {
    Tensor3 t(static_cast<int>(m.rows()), d, dr);
    for (int l = 0; l < t.dl; ++l)
        for (int p = 0; p < d; ++p)
            for (int r = 0; r < dr; ++r) t.at(l, p, r) = m(l, p * dr + r);
    return t;
}

SvdResult full_svd(const MatrixXcd& A) {
    TruncationPolicy keep_all{0.0, static_cast<int>(std::min(A.rows(), A.cols()))};
    return svd_truncate(A, keep_all);
}

// Push the orthogonality center one site to the left: site becomes
// right-isometric, the released factor is absorbed into its left neighbor.
void move_oc_left(TimeBinMPS& s, int site) {
    auto& t = s.sites[site];
    auto svd = full_svd(right_matrix(t));
    s.sites[site] = from_right_matrix(svd.Vh, t.d, t.dr);
    MatrixXcd carry = svd.U * svd.s.asDiagonal();
    auto& prev = s.sites[site - 1];
    MatrixXcd merged = left_matrix(prev) * carry;
    s.sites[site - 1] = from_left_matrix(merged, prev.dl, prev.d);
    s.oc = site - 1;
}

// Push the orthogonality center one site to the right.
void move_oc_right(TimeBinMPS& s, int site) {
    auto& t = s.sites[site];
    auto svd = full_svd(left_matrix(t));
    s.sites[site] = from_left_matrix(svd.U, t.dl, t.d);
    MatrixXcd carry = svd.s.asDiagonal() * svd.Vh;
    auto& next = s.sites[site + 1];
    MatrixXcd merged = carry * right_matrix(next);
    s.sites[site + 1] = from_right_matrix(merged, next.d, next.dr);
    s.oc = site + 1;
}

void canonicalize_oc_to(TimeBinMPS& s, int target) {
    while (s.oc > target) move_oc_left(s, s.oc);
    while (s.oc < target) move_oc_right(s, s.oc);
}

// Occupation of physical index p in the fused (right x left) basis.
int occ_right(int p, int d_ch, int channels) { return channels == 1 ? p : p / d_ch; }
int occ_left(int p, int d_ch, int channels) { return channels == 1 ? 0 : p % d_ch; }

Tensor3 ground_emitter() {
    Tensor3 e(1, 2, 1);
    e.at(0, 0, 0) = 1.0;
    return e;
}

// Photon-chain tensors for up to two placed excitations. The bond index
// counts photons already placed; placing i at a bin multiplies by
// alpha (0->1), beta (1->2) or delta (0->2).
TimeBinMPS build_photon_chain(const PulseSpec& pulse, const TimeGrid& grid, int channels,
                              int photons) {
    auto c = sample_bin_amplitudes(pulse, grid);
    const int d_ch = photons + 1;
    const int bond = photons + 1;
    const int d_bin = channels == 1 ? d_ch : d_ch * d_ch;
    const auto n = grid.n_steps;

    TimeBinMPS s;
    s.channels = channels;
    s.d_ch = d_ch;
    s.photons = photons;
    s.grid = grid;
    s.input_weight.resize(n);
    for (std::size_t k = 0; k < n; ++k) s.input_weight[k] = c[k] * c[k];

    // fused physical index for i_R photons in the right channel, none left
    auto phys = [&](int i_R) { return channels == 1 ? i_R : i_R * d_ch; };

    s.sites.reserve(n + 1);
    s.sites.push_back(ground_emitter());
    for (std::size_t k = 0; k < n; ++k) {
        const int dl = (k == 0) ? 1 : bond;
        const int dr = (k == n - 1) ? 1 : bond;
        Tensor3 t(dl, d_bin, dr);
        const double ck = c[k];
        auto set = [&](int placed_before, int put, cd amp) {
            const int placed_after = placed_before + put;
            if (placed_after > photons) return;
            const int l = (k == 0) ? 0 : placed_before;
            const int r = (k == n - 1) ? 0 : placed_after;
            if (k == 0 && placed_before != 0) return;
            if (k == n - 1 && placed_after != photons) return;
            t.at(l, phys(put), r) = amp;
        };
        for (int placed = 0; placed <= photons; ++placed) set(placed, 0, 1.0);
        if (photons >= 1) {
            const double alpha = (photons == 2) ? std::numbers::sqrt2 * ck : ck;
            set(0, 1, alpha);
        }
        if (photons == 2) {
            set(1, 1, ck);       // second photon placed singly
            set(0, 2, ck * ck);  // both photons in one bin
        }
        s.sites.push_back(std::move(t));
    }
    s.emitter_pos = 0;
    s.oc = static_cast<int>(n);  // treat the raw chain as if the OC were rightmost
    canonicalize_oc_to(s, 0);
    return s;
}

struct Environments {
    std::vector<MatrixXcd> right;  // right[k] closes sites k..end; right[n_sites] = 1
};

Environments right_environments(const TimeBinMPS& s) {
    const int n_sites = static_cast<int>(s.sites.size());
    Environments env;
    env.right.resize(n_sites + 1);
    env.right[n_sites] = MatrixXcd::Ones(1, 1);
    for (int k = n_sites - 1; k >= 0; --k) {
        const auto& t = s.sites[k];
        const auto& rn = env.right[k + 1];
        MatrixXcd out = MatrixXcd::Zero(t.dl, t.dl);
        for (int p = 0; p < t.d; ++p)
            for (int r = 0; r < t.dr; ++r)
                for (int rp = 0; rp < t.dr; ++rp) {
                    const cd w = rn(r, rp);
                    if (w == cd{0.0, 0.0}) continue;
                    for (int l = 0; l < t.dl; ++l)
                        for (int lp = 0; lp < t.dl; ++lp)
                            out(l, lp) += t.at(l, p, r) * std::conj(t.at(lp, p, rp)) * w;
                }
        env.right[k] = std::move(out);
    }
    return env;
}

// E'[r,r'] = sum T[a,p,r] conj(T[a',p,r']) E[a,a']
MatrixXcd transfer(const MatrixXcd& E, const Tensor3& t) {
    MatrixXcd out = MatrixXcd::Zero(t.dr, t.dr);
    for (int a = 0; a < t.dl; ++a)
        for (int ap = 0; ap < t.dl; ++ap) {
            const cd e = E(a, ap);
            if (e == cd{0.0, 0.0}) continue;
            for (int p = 0; p < t.d; ++p)
                for (int r = 0; r < t.dr; ++r)
                    for (int rp = 0; rp < t.dr; ++rp)
                        out(r, rp) += e * t.at(a, p, r) * std::conj(t.at(ap, p, rp));
        }
    return out;
}

// As transfer(), with a one-site operator O[p_bra, p_ket] inserted.
MatrixXcd transfer_op(const MatrixXcd& E, const Tensor3& t, const MatrixXcd& op) {
    MatrixXcd out = MatrixXcd::Zero(t.dr, t.dr);
    for (int a = 0; a < t.dl; ++a)
        for (int ap = 0; ap < t.dl; ++ap) {
            const cd e = E(a, ap);
            if (e == cd{0.0, 0.0}) continue;
            for (int pk = 0; pk < t.d; ++pk)
                for (int pb = 0; pb < t.d; ++pb) {
                    const cd o = op(pb, pk);
                    if (o == cd{0.0, 0.0}) continue;
                    for (int r = 0; r < t.dr; ++r)
                        for (int rp = 0; rp < t.dr; ++rp)
                            out(r, rp) += e * o * t.at(a, pk, r) * std::conj(t.at(ap, pb, rp));
                }
        }
    return out;
}

MatrixXcd bin_annihilator(int d_ch, int channels) {
    const int d = channels == 1 ? d_ch : d_ch * d_ch;
    MatrixXcd b = MatrixXcd::Zero(d, d);
    if (channels == 1) {
        for (int p = 1; p < d_ch; ++p) b(p - 1, p) = std::sqrt(double(p));
    } else {
        for (int iR = 1; iR < d_ch; ++iR)
            for (int iL = 0; iL < d_ch; ++iL)
                b((iR - 1) * d_ch + iL, iR * d_ch + iL) = std::sqrt(double(iR));
    }
    return b;
}

}  // namespace

SvdResult svd_truncate(const MatrixXcd& A, const TruncationPolicy& policy) {
    if (!A.allFinite()) throw std::invalid_argument("svd_truncate: non-finite input");
    Eigen::JacobiSVD<MatrixXcd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success)
        throw std::runtime_error("svd_truncate: SVD iteration failed to converge");
    const Eigen::VectorXd& sv = svd.singularValues();
    const int full = static_cast<int>(sv.size());

    int by_cutoff = 0;
    const double smax = full > 0 ? sv(0) : 0.0;
    for (int i = 0; i < full; ++i)
        if (sv(i) >= policy.svd_cutoff * smax && sv(i) > 0.0) ++by_cutoff;
    if (by_cutoff == 0) by_cutoff = 1;

    const int rank = std::min(by_cutoff, std::max(1, policy.max_bond));
    double discarded = 0.0;
    for (int i = rank; i < full; ++i) discarded += sv(i) * sv(i);

    SvdResult out;
    out.U = svd.matrixU().leftCols(rank);
    out.s = sv.head(rank);
    out.Vh = svd.matrixV().leftCols(rank).adjoint();
    out.discarded_weight = discarded;
    out.rank_by_cutoff = by_cutoff;
    return out;
}

double TimeBinMPS::norm() const {
    MatrixXcd e = MatrixXcd::Ones(1, 1);
    for (const auto& t : sites) e = transfer(e, t);
    return std::sqrt(std::abs(e(0, 0)));
}

double TimeBinMPS::total_excitation() const {
    auto env = right_environments(*this);
    const int n_sites = static_cast<int>(sites.size());
    MatrixXcd left = MatrixXcd::Ones(1, 1);
    double total = 0.0;
    for (int k = 0; k < n_sites; ++k) {
        const auto& t = sites[k];
        MatrixXcd op = MatrixXcd::Zero(t.d, t.d);
        if (k == emitter_pos) {
            op(1, 1) = 1.0;
        } else {
            for (int p = 0; p < t.d; ++p)
                op(p, p) = occ_right(p, d_ch, channels) + occ_left(p, d_ch, channels);
        }
        MatrixXcd mid = transfer_op(left, t, op);
        total += (mid.cwiseProduct(env.right[k + 1])).sum().real();
        left = transfer(left, t);
    }
    return total;
}

std::vector<int> TimeBinMPS::bond_dims() const {
    std::vector<int> out;
    out.reserve(sites.size() > 1 ? sites.size() - 1 : 0);
    for (std::size_t k = 0; k + 1 < sites.size(); ++k) out.push_back(sites[k].dr);
    return out;
}

void move_orthogonality_center(TimeBinMPS& state, int site) {
    if (site < 0 || site >= static_cast<int>(state.sites.size()))
        throw std::out_of_range("move_orthogonality_center: site out of range");
    canonicalize_oc_to(state, site);
}

std::vector<double> bin_occupations(const TimeBinMPS& state) {
    auto env = right_environments(state);
    const int n_sites = static_cast<int>(state.sites.size());
    MatrixXcd left = MatrixXcd::Ones(1, 1);
    std::vector<double> out;
    out.reserve(state.grid.n_steps);
    for (int k = 0; k < n_sites; ++k) {
        const auto& t = state.sites[k];
        if (k != state.emitter_pos) {
            MatrixXcd op = MatrixXcd::Zero(t.d, t.d);
            for (int p = 0; p < t.d; ++p)
                op(p, p) = occ_right(p, state.d_ch, state.channels) +
                           occ_left(p, state.d_ch, state.channels);
            MatrixXcd mid = transfer_op(left, t, op);
            out.push_back((mid.cwiseProduct(env.right[k + 1])).sum().real());
        }
        left = transfer(left, t);
    }
    return out;
}

TimeBinMPS build_input_1photon(const PulseSpec& pulse, const TimeGrid& grid, int channels) {
    if (channels != 1 && channels != 2)
        throw std::invalid_argument("build_input: channels must be 1 or 2");
    return build_photon_chain(pulse, grid, channels, 1);
}

TimeBinMPS build_input_2photon(const PulseSpec& pulse, const TimeGrid& grid, int channels) {
    if (channels != 1 && channels != 2)
        throw std::invalid_argument("build_input: channels must be 1 or 2");
    return build_photon_chain(pulse, grid, channels, 2);
}

TimeBinMPS vacuum_state(const TimeGrid& grid, int channels, int photon_capacity) {
    const int d_ch = photon_capacity + 1;
    const int d_bin = channels == 1 ? d_ch : d_ch * d_ch;
    TimeBinMPS s;
    s.channels = channels;
    s.d_ch = d_ch;
    s.photons = 0;
    s.grid = grid;
    s.input_weight.assign(grid.n_steps, 0.0);
    s.sites.push_back(ground_emitter());
    for (std::size_t k = 0; k < grid.n_steps; ++k) {
        Tensor3 t(1, d_bin, 1);
        t.at(0, 0, 0) = 1.0;
        s.sites.push_back(std::move(t));
    }
    s.emitter_pos = 0;
    s.oc = 0;
    return s;
}

MatrixXcd pair_unitary(const EmitterParams& params, double dt, int d_ch, int channels) {
    const int d_bin = channels == 1 ? d_ch : d_ch * d_ch;
    const int dim = 2 * d_bin;
    const MatrixXcd b = bin_annihilator(d_ch, channels);
    MatrixXcd bL;
    if (channels == 2) {
        bL = MatrixXcd::Zero(d_bin, d_bin);
        for (int iR = 0; iR < d_ch; ++iR)
            for (int iL = 1; iL < d_ch; ++iL)
                bL(iR * d_ch + iL - 1, iR * d_ch + iL) = std::sqrt(double(iL));
    }

    // pair index = e * d_bin + p
    MatrixXcd h = MatrixXcd::Zero(dim, dim);
    auto add_channel = [&](const MatrixXcd& bc, double rate) {
        if (rate == 0.0) return;
        const double g = std::sqrt(rate * dt);
        const cd i_unit{0.0, 1.0};
        for (int p = 0; p < d_bin; ++p)
            for (int q = 0; q < d_bin; ++q) {
                if (bc(p, q) != cd{0.0, 0.0}) {
                    // i * sqrt(rate dt) * sigma^+ b : |e,p><g,q|
                    h(d_bin + p, q) += i_unit * g * bc(p, q);
                    // -i * sqrt(rate dt) * sigma^- b^dag : |g,q><e,p|
                    h(q, d_bin + p) += -i_unit * g * std::conj(bc(p, q));
                }
            }
    };
    add_channel(b, params.gamma_R);
    if (channels == 2) add_channel(bL, params.gamma_L);
    for (int p = 0; p < d_bin; ++p) h(d_bin + p, d_bin + p) += params.delta * dt;

    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(h);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("pair_unitary: eigensolver failed");
    const auto& V = es.eigenvectors();
    Eigen::VectorXcd phases(dim);
    for (int i = 0; i < dim; ++i)
        phases(i) = std::exp(cd{0.0, -es.eigenvalues()(i)});
    return V * phases.asDiagonal() * V.adjoint();
}

EmissionRecord evolve(TimeBinMPS& state, const EmitterParams& params, const TimeGrid& grid,
                      const TruncationPolicy& policy, EvolveStats* stats) {
    if (!(state.grid == grid))
        throw std::invalid_argument("evolve: grid does not match the state");
    if (state.emitter_pos != 0)
        throw std::invalid_argument("evolve: state has already been scattered");
    policy.validate(state.photons);
    if (params.gamma_L > 0.0 && state.channels != 2)
        throw std::invalid_argument("evolve: gamma_L > 0 requires a two-channel state");

    const int n = state.n_bins();
    const int d_bin = state.bin_dim();
    const MatrixXcd U = pair_unitary(params, grid.dt, state.d_ch, state.channels);

    EmissionRecord rec;
    rec.photons = state.photons;
    rec.n_tls = TimeSeries(grid, "n_tls");
    rec.flux_R = TimeSeries(grid, "flux_R");
    rec.flux_L = TimeSeries(grid, "flux_L");
    rec.N_R = TimeSeries(grid, "N_R");
    rec.N_L = TimeSeries(grid, "N_L");
    rec.input_remaining = TimeSeries(grid, "input_remaining");

    double in_suffix = 0.0;
    for (double w : state.input_weight) in_suffix += w;

    EvolveStats local;
    canonicalize_oc_to(state, 0);

    double cum_R = 0.0, cum_L = 0.0;
    std::vector<cd> theta;
    for (int k = 0; k < n; ++k) {
        const Tensor3& E = state.sites[k];
        const Tensor3& B = state.sites[k + 1];
        const int dl = E.dl, dm = E.dr, dr = B.dr;
        if (B.dl != dm) throw std::runtime_error("evolve: inconsistent bond dimensions");

        // theta[l, e, p, r]
        theta.assign(static_cast<std::size_t>(dl) * 2 * d_bin * dr, cd{0, 0});
        auto th = [&](int l, int e, int p, int r) -> cd& {
            return theta[((static_cast<std::size_t>(l) * 2 + e) * d_bin + p) * dr + r];
        };
        for (int l = 0; l < dl; ++l)
            for (int e = 0; e < 2; ++e)
                for (int m = 0; m < dm; ++m) {
                    const cd w = E.at(l, e, m);
                    if (w == cd{0.0, 0.0}) continue;
                    for (int p = 0; p < d_bin; ++p)
                        for (int r = 0; r < dr; ++r) th(l, e, p, r) += w * B.at(m, p, r);
                }

        // apply the pair unitary over (e, p), then reshape to (l p) x (e r)
        MatrixXcd M(dl * d_bin, 2 * dr);
        for (int l = 0; l < dl; ++l)
            for (int r = 0; r < dr; ++r)
                for (int ep = 0; ep < 2; ++ep)
                    for (int pp = 0; pp < d_bin; ++pp) {
                        cd acc{0.0, 0.0};
                        for (int e = 0; e < 2; ++e)
                            for (int p = 0; p < d_bin; ++p) {
                                const cd u = U(ep * d_bin + pp, e * d_bin + p);
                                if (u != cd{0.0, 0.0}) acc += u * th(l, e, p, r);
                            }
                        M(l * d_bin + pp, ep * dr + r) = acc;
                    }

        auto svd = svd_truncate(M, policy);
        if (svd.rank_by_cutoff > policy.max_bond)
            throw BondOverflowError("evolve: required bond dimension " +
                                    std::to_string(svd.rank_by_cutoff) + " exceeds max_bond " +
                                    std::to_string(policy.max_bond) + " at step " +
                                    std::to_string(k));
        const double total2 = M.squaredNorm();
        const double rel_discarded = total2 > 0 ? svd.discarded_weight / total2 : 0.0;
        if (rel_discarded > policy.svd_cutoff * 1e3)
            throw TruncationBudgetError("evolve: step discarded weight " +
                                        std::to_string(rel_discarded) +
                                        " exceeds the truncation budget at step " +
                                        std::to_string(k));
        local.total_discarded += rel_discarded;
        local.max_step_discarded = std::max(local.max_step_discarded, rel_discarded);
        local.max_bond = std::max(local.max_bond, static_cast<int>(svd.s.size()));

        state.sites[k] = from_left_matrix(svd.U, dl, d_bin);            // scattered bin
        MatrixXcd carry = svd.s.asDiagonal() * svd.Vh;                  // OC rides the emitter
        const int rank = static_cast<int>(svd.s.size());
        Tensor3 Em(rank, 2, dr);
        for (int m = 0; m < rank; ++m)
            for (int e = 0; e < 2; ++e)
                for (int r = 0; r < dr; ++r) Em.at(m, e, r) = carry(m, e * dr + r);
        state.sites[k + 1] = std::move(Em);
        state.emitter_pos = k + 1;
        state.oc = k + 1;

        // observables: left prefix is left-normalized, future bins right-normalized
        const Tensor3& Bn = state.sites[k];
        const Tensor3& En = state.sites[k + 1];
        double ntls = 0.0;
        for (int m = 0; m < En.dl; ++m)
            for (int r = 0; r < En.dr; ++r) ntls += std::norm(En.at(m, 1, r));

        MatrixXcd rhoR = MatrixXcd::Zero(En.dl, En.dl);
        for (int m = 0; m < En.dl; ++m)
            for (int mp = 0; mp < En.dl; ++mp) {
                cd acc{0.0, 0.0};
                for (int e = 0; e < 2; ++e)
                    for (int r = 0; r < En.dr; ++r)
                        acc += En.at(m, e, r) * std::conj(En.at(mp, e, r));
                rhoR(m, mp) = acc;
            }
        double occR = 0.0, occL = 0.0;
        for (int m = 0; m < Bn.dr; ++m)
            for (int mp = 0; mp < Bn.dr; ++mp) {
                cd wR{0.0, 0.0}, wL{0.0, 0.0};
                for (int l = 0; l < Bn.dl; ++l)
                    for (int p = 0; p < d_bin; ++p) {
                        const cd prod = Bn.at(l, p, m) * std::conj(Bn.at(l, p, mp));
                        wR += static_cast<double>(occ_right(p, state.d_ch, state.channels)) * prod;
                        wL += static_cast<double>(occ_left(p, state.d_ch, state.channels)) * prod;
                    }
                occR += (wR * rhoR(m, mp)).real();
                occL += (wL * rhoR(m, mp)).real();
            }

        cum_R += occR;
        cum_L += occL;
        in_suffix -= state.input_weight[k];
        rec.n_tls[k] = ntls;
        rec.flux_R[k] = occR / grid.dt;
        rec.flux_L[k] = occL / grid.dt;
        rec.N_R[k] = cum_R;
        rec.N_L[k] = cum_L;
        rec.input_remaining[k] = state.photons * std::max(0.0, in_suffix);
    }
    local.final_norm = state.norm();
    if (stats) *stats = local;
    return rec;
}

cd two_bin_correlator(const TimeBinMPS& state, std::size_t i, std::size_t j) {
    const auto n = static_cast<std::size_t>(state.n_bins());
    if (i > j || j >= n) throw std::out_of_range("two_bin_correlator: index out of range");
    if (state.emitter_pos != state.n_bins())
        throw std::invalid_argument("two_bin_correlator: state is not fully scattered");

    TimeBinMPS work = state;
    canonicalize_oc_to(work, static_cast<int>(work.sites.size()) - 1);

    auto env = right_environments(work);
    const MatrixXcd b = bin_annihilator(work.d_ch, work.channels);
    const MatrixXcd bdag = b.adjoint();
    MatrixXcd E = MatrixXcd::Identity(work.sites[i].dl, work.sites[i].dl);
    if (i == j) {
        E = transfer_op(E, work.sites[i], bdag * b);
    } else {
        E = transfer_op(E, work.sites[i], bdag);
        for (std::size_t k = i + 1; k < j; ++k) E = transfer(E, work.sites[k]);
        E = transfer_op(E, work.sites[j], b);
    }
    const cd val = (E.cwiseProduct(env.right[j + 1])).sum();
    return val / work.grid.dt;
}

G1Matrix correlator_matrix(const TimeBinMPS& state, int n_threads) {
    if (state.emitter_pos != state.n_bins())
        throw std::invalid_argument("correlator_matrix: state is not fully scattered");
    TimeBinMPS work = state;
    canonicalize_oc_to(work, static_cast<int>(work.sites.size()) - 1);

    auto env = right_environments(work);
    const MatrixXcd b = bin_annihilator(work.d_ch, work.channels);
    const MatrixXcd bdag = b.adjoint();
    const MatrixXcd num = bdag * b;
    const auto n = static_cast<std::size_t>(work.n_bins());

    G1Matrix g1(work.grid);
    parallel_for(n, n_threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            auto row = g1.row(i);
            MatrixXcd E = MatrixXcd::Identity(work.sites[i].dl, work.sites[i].dl);
            {
                MatrixXcd diag = transfer_op(E, work.sites[i], num);
                row[0] = (diag.cwiseProduct(env.right[i + 1])).sum() / work.grid.dt;
            }
            E = transfer_op(E, work.sites[i], bdag);
            for (std::size_t j = i + 1; j < n; ++j) {
                MatrixXcd closed = transfer_op(E, work.sites[j], b);
                row[j - i] = (closed.cwiseProduct(env.right[j + 1])).sum() / work.grid.dt;
                E = transfer(E, work.sites[j]);
            }
        }
    });
    return g1;
}

namespace {

template <typename T>
void write_pod(std::ofstream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& is) {
    T v;
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw std::runtime_error("checkpoint: truncated file");
    return v;
}

constexpr char kMagic[8] = {'W', 'Q', 'E', 'D', 'M', 'P', 'S', '1'};

}  // namespace

void save_checkpoint(const TimeBinMPS& state, const std::string& path) {
    static_assert(std::endian::native == std::endian::little,
                  "checkpoint format is little-endian");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("checkpoint: cannot open " + path + " for writing");
    os.write(kMagic, sizeof(kMagic));
    write_pod<std::uint32_t>(os, 1);  // format version
    write_pod<std::uint64_t>(os, state.sites.size());
    write_pod<std::int64_t>(os, state.oc);
    write_pod<std::int64_t>(os, state.emitter_pos);
    write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(state.channels));
    write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(state.d_ch));
    write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(state.photons));
    write_pod<double>(os, state.grid.dt);
    write_pod<std::uint64_t>(os, state.grid.n_steps);
    write_pod<std::uint64_t>(os, state.input_weight.size());
    os.write(reinterpret_cast<const char*>(state.input_weight.data()),
             static_cast<std::streamsize>(state.input_weight.size() * sizeof(double)));
    for (const auto& t : state.sites) {
        write_pod<std::uint64_t>(os, static_cast<std::uint64_t>(t.dl));
        write_pod<std::uint64_t>(os, static_cast<std::uint64_t>(t.d));
        write_pod<std::uint64_t>(os, static_cast<std::uint64_t>(t.dr));
        os.write(reinterpret_cast<const char*>(t.a.data()),
                 static_cast<std::streamsize>(t.a.size() * sizeof(cd)));
    }
    if (!os) throw std::runtime_error("checkpoint: write failed for " + path);
}

TimeBinMPS load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("checkpoint: cannot open " + path);
    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("checkpoint: bad magic in " + path);
    const auto version = read_pod<std::uint32_t>(is);
    if (version != 1) throw std::runtime_error("checkpoint: unsupported version");

    TimeBinMPS s;
    const auto n_sites = read_pod<std::uint64_t>(is);
    s.oc = static_cast<int>(read_pod<std::int64_t>(is));
    s.emitter_pos = static_cast<int>(read_pod<std::int64_t>(is));
    s.channels = static_cast<int>(read_pod<std::uint32_t>(is));
    s.d_ch = static_cast<int>(read_pod<std::uint32_t>(is));
    s.photons = static_cast<int>(read_pod<std::uint32_t>(is));
    const double dt = read_pod<double>(is);
    const auto n_steps = read_pod<std::uint64_t>(is);
    s.grid = TimeGrid(dt, n_steps);
    const auto n_w = read_pod<std::uint64_t>(is);
    s.input_weight.resize(n_w);
    is.read(reinterpret_cast<char*>(s.input_weight.data()),
            static_cast<std::streamsize>(n_w * sizeof(double)));
    s.sites.reserve(n_sites);
    for (std::uint64_t k = 0; k < n_sites; ++k) {
        const auto dl = read_pod<std::uint64_t>(is);
        const auto d = read_pod<std::uint64_t>(is);
        const auto dr = read_pod<std::uint64_t>(is);
        Tensor3 t(static_cast<int>(dl), static_cast<int>(d), static_cast<int>(dr));
        is.read(reinterpret_cast<char*>(t.a.data()),
                static_cast<std::streamsize>(t.a.size() * sizeof(cd)));
        if (!is) throw std::runtime_error("checkpoint: truncated tensor payload");
        s.sites.push_back(std::move(t));
    }
    return s;
}

}  // namespace waveqed::mps
