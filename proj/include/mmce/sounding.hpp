// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "mmce/beam_design.hpp"
#include "mmce/channel.hpp"
#include "mmce/config.hpp"
#include "mmce/rng.hpp"
#include "mmce/types.hpp"

namespace mmce {

/// Pilot stage identifiers. Stage masks (which single antenna is off):
///   Stage1: BS last antenna off,  user last antenna off
///   Stage2: BS first antenna off, user last antenna off
///   Stage3: BS last antenna off,  user first antenna off
/// In EMS mode only Stage1/Stage2 exist and the user side is unmasked.
enum class Stage { One, Two, Three };

enum class SoundingMode { Tde, Ems };

struct StageMatrices {
    MatC combiner; ///< T3 x N_A
    MatC precoder; ///< M_A x T1
};

StageMatrices stage_matrices(const SoundingDesign& design, Stage stage, SoundingMode mode);

/// Stacked received pilot matrices. Stage 1 carries every subcarrier; stages
/// 2 and 3 carry only k = 0. `stage3` is empty in EMS mode.
struct MeasurementSet {
    SoundingMode mode = SoundingMode::Tde;
    std::vector<std::vector<MatC>> stage1; ///< [user][k], T3 x T1
    std::vector<MatC> stage2;              ///< [user], k = 0
    std::vector<MatC> stage3;              ///< [user], k = 0
    double noise_variance = 0.0;
    double snr_db = 0.0;
    std::uint64_t rng_seed = 0;
};

/// Simulate one stage for the requested subcarriers of every user:
/// R = W_stage * H_u^k * F_stage + Ntilde, where Ntilde stacks W-block
/// combinations of fresh per-slot antenna noise with entries CN(0, sigma2).
/// Returns [user][subcarrier index] matrices of size T3 x T1.
std::vector<std::vector<MatC>> simulate_stage(const SoundingDesign& design,
                                              const ChannelRealization& realization,
                                              Stage stage, SoundingMode mode,
                                              const std::vector<int>& subcarriers,
                                              double noise_variance, Rng& rng);

/// Run the full pilot protocol for one mode (all stages, stage-1 on all K
/// subcarriers, later stages on k = 0 only).
MeasurementSet simulate_measurements(const SoundingDesign& design,
                                     const ChannelRealization& realization, SoundingMode mode,
                                     double noise_variance, Rng& rng);

/// Unitary DFT pilot set; column u is user u's pilot sequence.
MatC dft_pilots(int num_users);

/// Despread a received N_R x U pilot-slot matrix with one user's pilot
/// sequence. Throws std::invalid_argument if the pilot is not unit norm.
VecC despread(const MatC& received, const VecC& pilot);

/// Protocol-level simulation of one stage: every user transmits its pilot
/// sequence simultaneously and the per-user measurements are recovered by
/// despreading. Noise-free this equals simulate_stage exactly; it exists to
/// verify the multiuser pilot bookkeeping.
std::vector<std::vector<MatC>> simulate_stage_multiuser(const SoundingDesign& design,
                                                        const ChannelRealization& realization,
                                                        Stage stage, SoundingMode mode,
                                                        const std::vector<int>& subcarriers,
                                                        double noise_variance, Rng& rng);

/// Noise variance realizing a target SNR for one realization, with
///   SNR = E||W H F||_F^2 / E||W N||_F^2
/// averaged over the stage-1 measurements of all users and subcarriers.
double noise_variance_for_snr(const SoundingDesign& design, const ChannelRealization& realization,
                              SoundingMode mode, double snr_db);

/// Pilot-slot accounting: (K+2)*U*T1*T2 for TDE, (K+1)*U*T1*T2 for EMS.
long long pilot_slots(const SystemConfig& cfg, SoundingMode mode);

} // namespace mmce
