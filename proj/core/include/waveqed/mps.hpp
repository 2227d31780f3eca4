#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "waveqed/pulse.hpp"
#include "waveqed/types.hpp"

namespace waveqed::mps {

using MatrixXcd = Eigen::Matrix<cd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Rank-3 tensor with (left bond, physical, right bond) indices, row-major.
struct Tensor3 {
    int dl = 1, d = 1, dr = 1;
    std::vector<cd> a;

    Tensor3() = default;
    Tensor3(int l, int p, int r) : dl(l), d(p), dr(r), a(static_cast<std::size_t>(l) * p * r) {}

    cd& at(int l, int p, int r) { return a[(static_cast<std::size_t>(l) * d + p) * dr + r]; }
    cd at(int l, int p, int r) const {
        return a[(static_cast<std::size_t>(l) * d + p) * dr + r];
    }
};

struct TruncationPolicy {
    double svd_cutoff = 1e-12;  // relative singular-value threshold
    int max_bond = 64;

    void validate(int photons) const {
        if (!(svd_cutoff >= 0.0 && svd_cutoff < 1.0))
            throw std::invalid_argument("TruncationPolicy: cutoff must lie in [0, 1)");
        if (max_bond < photons + 1)
            throw std::invalid_argument("TruncationPolicy: max_bond must be >= photons + 1");
    }
};

struct SvdResult {
    MatrixXcd U;            // m x rank
    Eigen::VectorXd s;      // rank, descending
    MatrixXcd Vh;           // rank x n; A ~= U * diag(s) * Vh
    double discarded_weight = 0.0;  // sum of squared dropped singular values
    int rank_by_cutoff = 0;         // rank the cutoff alone would keep
};

/// Schmidt decomposition with relative-cutoff and max-bond truncation.
SvdResult svd_truncate(const MatrixXcd& A, const TruncationPolicy& policy);

struct BondOverflowError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct TruncationBudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Tensor chain of photon time bins plus one emitter bin (physical dim 2).
/// Freshly built states carry the emitter at site 0 followed by the bins;
/// evolve() moves the emitter rightward past each consumed bin, ending with
/// bins at sites [0, n_bins) and the emitter last.
struct TimeBinMPS {
    std::vector<Tensor3> sites;
    int oc = 0;           // orthogonality center
    int emitter_pos = 0;  // index of the emitter tensor
    int channels = 1;     // 1 = right only, 2 = fused right (x) left
    int d_ch = 2;         // per-channel physical dimension (photons + 1)
    int photons = 1;
    TimeGrid grid;
    std::vector<double> input_weight;  // |c_k|^2 of the input wavepacket

    int n_bins() const { return static_cast<int>(sites.size()) - 1; }
    int bin_dim() const { return channels == 1 ? d_ch : d_ch * d_ch; }

    double norm() const;
    double total_excitation() const;
    std::vector<int> bond_dims() const;
};

/// Per-bin photon occupation (right plus left channel), full contraction.
std::vector<double> bin_occupations(const TimeBinMPS& state);

/// Sweep the orthogonality center to `site` with exact (untruncated) SVD
/// gauge moves; observables are invariant under this.
void move_orthogonality_center(TimeBinMPS& state, int site);

/// Bond-dimension-2 MPS for sum_k c_k b_k^dag |0..0>, right channel only,
/// emitter appended in the ground state; right-canonicalized with the
/// orthogonality center on the emitter.
TimeBinMPS build_input_1photon(const PulseSpec& pulse, const TimeGrid& grid, int channels);

/// Bond-dimension-3 MPS for the normalized two-photon wavepacket
/// (1/sqrt(2)) (sum_k c_k b_k^dag)^2 |0..0>.
TimeBinMPS build_input_2photon(const PulseSpec& pulse, const TimeGrid& grid, int channels);

/// Vacuum field with the emitter in the ground state (used as a reference).
TimeBinMPS vacuum_state(const TimeGrid& grid, int channels, int photon_capacity);

struct EvolveStats {
    double total_discarded = 0.0;
    double max_step_discarded = 0.0;
    int max_bond = 0;
    double final_norm = 0.0;
};

/// Collision-model sweep: for each bin, apply the exact two-site interaction
/// unitary on the (emitter, bin) pair, split with a truncated SVD so the
/// emitter swaps past the bin, and read out the population and bin flux.
EmissionRecord evolve(TimeBinMPS& state, const EmitterParams& params, const TimeGrid& grid,
                      const TruncationPolicy& policy, EvolveStats* stats = nullptr);

/// Exact exponential of the two-site collision generator on the
/// (emitter x bin) pair space.
MatrixXcd pair_unitary(const EmitterParams& params, double dt, int d_ch, int channels);

/// <b_{R,i}^dag b_{R,j}> / dt for i <= j on a fully scattered state.
cd two_bin_correlator(const TimeBinMPS& state, std::size_t i, std::size_t j);

/// Full triangular correlation matrix; rows fan out over threads.
G1Matrix correlator_matrix(const TimeBinMPS& state, int n_threads = 1);

/// Binary checkpoint (versioned header, dimension triples, row-major
/// complex-double payload, little-endian).
void save_checkpoint(const TimeBinMPS& state, const std::string& path);
TimeBinMPS load_checkpoint(const std::string& path);

}  // namespace waveqed::mps
