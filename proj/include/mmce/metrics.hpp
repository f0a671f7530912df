// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "mmce/channel.hpp"
#include "mmce/estimator_tde.hpp"
#include "mmce/types.hpp"

namespace mmce {

/// Total squared estimation error over all users and subcarriers, normalized
/// by the total channel energy. Throws std::invalid_argument on shape
/// mismatch.
double nmse(const std::vector<ChannelEstimate>& estimates, const ChannelRealization& truth);

/// Sum-rate proxy: per user and subcarrier, take the top min(N_R, L) singular
/// vectors of the estimated channel as transmit/receive beamformers, apply
/// them to the true channel and accumulate the equal-power log-det rate at
/// the given SNR. Averaged over subcarriers, summed over users (bits/s/Hz).
double spectral_efficiency(const std::vector<ChannelEstimate>& estimates,
                           const ChannelRealization& truth, const SystemConfig& cfg,
                           double snr_linear);

} // namespace mmce
