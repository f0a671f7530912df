// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "mmce/config.hpp"
#include "mmce/rng.hpp"
#include "mmce/types.hpp"

namespace mmce {

/// ULA array response for a half-wavelength element spacing. `angle_sin` is
/// the sine of the physical angle; element m equals exp(j*pi*angle_sin*m).
/// The vector is scaled by 1/sqrt(n_antennas) and therefore has unit norm.
VecC steering_vector(int n_antennas, double angle_sin);

/// Steering matrix with one column per angle.
MatC steering_matrix(int n_antennas, const std::vector<double>& angle_sins);

/// Time-domain raised-cosine pulse. Equals 1 at t = 0, vanishes at nonzero
/// integer multiples of the sample interval, and evaluates the removable
/// singularity at |t| = T_s/(2*rolloff) by its limit.
double raised_cosine(double t, double sample_interval, double rolloff);

struct ChannelPath {
    Complex gain;   ///< g, drawn CN(0, 1)
    double delay;   ///< tau, seconds
    double aoa_sin; ///< sine of the angle of arrival, in [-1, 1)
    double aod_sin; ///< sine of the angle of departure, in [-1, 1)
};

/// Ground-truth frequency-selective channel for all users.
///
/// The per-tap matrices and the per-subcarrier matrices are two views of the
/// same geometry: H_u^k = sum_d H_{u,d} exp(-j 2 pi k d / K), and equally
/// H_u^k = gamma * A_R * diag(gain_diagonals[u][k]) * A_T^H.
struct ChannelRealization {
    std::vector<std::vector<ChannelPath>> paths;        ///< [user][path]
    std::vector<std::vector<MatC>> tap_matrices;        ///< [user][tap], N_A x M_A
    std::vector<std::vector<MatC>> subcarrier_matrices; ///< [user][k], N_A x M_A
    std::vector<std::vector<VecC>> gain_diagonals;      ///< [user][k], length L
    double normalization = 0.0;                         ///< gamma = sqrt(N_A*M_A/L)

    int num_users() const { return static_cast<int>(paths.size()); }

    std::vector<double> aoa_sins(int user) const;
    std::vector<double> aod_sins(int user) const;
    /// N_A x L matrix of receive steering vectors for one user.
    MatC receive_steering(int user, int n_antennas) const;
    /// M_A x L matrix of transmit steering vectors for one user.
    MatC transmit_steering(int user, int n_antennas) const;
};

/// Draw a fresh realization: path gains CN(0,1), delays uniform on
/// [0, max_delay_spread], angle sines uniform on [-1, 1).
ChannelRealization generate_realization(const SystemConfig& cfg, Rng& rng);

/// Per-subcarrier synthesis H^k = sum_d taps[d] * exp(-j 2 pi k d / K).
/// Throws std::invalid_argument on empty or inconsistently shaped taps.
std::vector<MatC> subcarrier_from_taps(const std::vector<MatC>& taps, int num_subcarriers);

} // namespace mmce
