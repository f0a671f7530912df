// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "mmce/estimator_tde.hpp"
#include "mmce/sounding.hpp"
#include "mmce/types.hpp"

namespace mmce {

/// On-grid beamspace dictionary for greedy sparse recovery. The effective
/// atom for grid pair (r, t) is (F^T conj(alpha_t)) kron (W alpha_r); the two
/// factor banks are stored separately and atoms are normalized on the fly.
struct BeamspaceDictionary {
    int grid_rx = 0;
    int grid_tx = 0;
    std::vector<double> rx_angles; ///< uniform over [-1, 1)
    std::vector<double> tx_angles;
    MatC rx_bank; ///< W_stage1 * alpha(N_A, theta_g), T3 x G_r
    MatC tx_bank; ///< F_stage1^T * conj(alpha(M_A, phi_g)), T1 x G_t
};

BeamspaceDictionary build_dictionary(const SoundingDesign& design, const SystemConfig& cfg,
                                     int grid_rx, int grid_tx);

/// Greedy on-grid estimate from the same stage-1 measurements the EMS scheme
/// uses: L rounds of max-correlation atom selection with an LS refit on the
/// k = 0 measurement, then per-subcarrier gain LS on the selected grid angles
/// and rank-L reconstruction. Throws std::invalid_argument if num_paths
/// exceeds the dictionary or measurement rank.
std::vector<ChannelEstimate> omp_estimate(const MeasurementSet& meas,
                                          const BeamspaceDictionary& dict,
                                          const SoundingDesign& design, const SystemConfig& cfg,
                                          int num_paths);

} // namespace mmce
