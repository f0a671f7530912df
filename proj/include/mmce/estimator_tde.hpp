// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "mmce/beam_design.hpp"
#include "mmce/config.hpp"
#include "mmce/sounding.hpp"
#include "mmce/types.hpp"

namespace mmce {

struct EspritOptions {
    /// Relative eigenvalue gap under which the measurement covariance is
    /// flagged as rank-deficient for the requested path count.
    double rank_gap_threshold = 1e-10;
};

struct EspritResult {
    std::vector<double> angles;        ///< sines, sorted ascending
    std::vector<Complex> eigenvalues;  ///< invariance eigenvalues, same order
    bool rank_warning = false;
};

/// Shift-invariance angle recovery from two equally shaped measurement blocks
/// related by a diagonal rotation. Stacks [r1; r2], forms the sample
/// covariance B = R R^H, extracts the dominant `num_paths`-dimensional
/// subspace, solves the invariance equation between its two halves and reads
/// the angle sines off the eigenvalue phases. Throws std::invalid_argument on
/// shape mismatch or num_paths exceeding the block row count.
EspritResult esprit_shift_invariance(const MatC& r1, const MatC& r2, int num_paths,
                                     const EspritOptions& opts = {});

/// AoA of one user from its stage-1/stage-2 measurements at k = 0.
EspritResult estimate_aoa(const MeasurementSet& meas, int user, int num_paths,
                          const EspritOptions& opts = {});

/// AoD of one user from its stage-1/stage-3 measurements at k = 0 (TDE role
/// swap: the conjugate-transposed blocks feed the same machinery with T1 and
/// T3 exchanging places).
EspritResult estimate_aod_tde(const MeasurementSet& meas, int user, int num_paths,
                              const EspritOptions& opts = {});

struct AngleEstimates {
    std::vector<double> aoa_sins;
    std::vector<double> aod_sins;
    bool paired = false;
    bool rank_warning = false;
    /// Set when two estimated angles on either side are closer than 1e-6;
    /// the estimate is still produced but accuracy guarantees are void.
    bool degenerate = false;
    /// EMS only: two estimated AoDs landed inside one mainlobe width (4/M_A).
    bool mainlobe_collision = false;
};

/// Cross-coupling gain matrix for pairing: the LS fit of the k = 0 stage-1
/// measurement onto the outer products of the unpaired steering estimates.
/// With unpaired inputs it has one dominant entry per row and column.
MatC coupling_matrix(const MatC& stage1_k0, const MatC& combiner_stage, const MatC& precoder_stage,
                     const MatC& rx_steering, const MatC& tx_steering, double normalization);

/// Greedy row-wise association: for each row take the largest remaining
/// |entry|, remove its column. Returns the paired estimates with the AoD list
/// permuted so index i of both lists refers to the same path.
AngleEstimates pair_angles(const std::vector<double>& aoa_sins, const std::vector<double>& aod_sins,
                           const MatC& coupling);

/// Per-subcarrier path gain LS. Solves
///   vec(R_k) ~ gamma * [(F^T kron W)(conj(A_T) khatri-rao A_R)] v_k
/// for every k without materializing the Kronecker product. Throws
/// std::runtime_error naming the user if the system loses column rank.
std::vector<VecC> estimate_gains(const std::vector<MatC>& stage1_all_k, const MatC& combiner_stage,
                                 const MatC& precoder_stage, const MatC& rx_steering,
                                 const MatC& tx_steering, double normalization, int user);

struct ChannelEstimate {
    AngleEstimates angles;
    std::vector<VecC> gains;    ///< [k], length L
    std::vector<MatC> channels; ///< [k], N_A x M_A
};

/// Rank-L synthesis H_k = gamma * A_R diag(v_k) A_T^H from paired angles.
ChannelEstimate reconstruct(const AngleEstimates& angles, const std::vector<VecC>& gains,
                            int num_bs_antennas, int num_user_antennas, double normalization);

/// Full three-stage pipeline for every user: ESPRIT AoA, ESPRIT AoD,
/// pairing, gain LS, reconstruction.
std::vector<ChannelEstimate> estimate_tde(const MeasurementSet& meas, const SoundingDesign& design,
                                          const SystemConfig& cfg, const EspritOptions& opts = {});

} // namespace mmce
