// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mmce {

/// Scenario constants for the multi-user uplink. Defaults follow the
/// evaluation setup used throughout the test suite: a 64-antenna BS with 4 RF
/// chains serving 4 users, each with 16 antennas and a single RF chain.
struct SystemConfig {
    int num_bs_antennas = 64;   ///< N_A
    int num_user_antennas = 16; ///< M_A
    int num_bs_rf = 4;          ///< N_R
    int num_user_rf = 1;        ///< M_R
    int num_users = 4;          ///< U
    int num_subcarriers = 16;   ///< K
    int num_taps = 4;           ///< D
    int num_paths = 3;          ///< L, per user
    int t1 = 12;                ///< number of precoder settings per stage
    int t2 = 8;                 ///< number of combiner settings per stage
    double noise_variance = 0.0;
    double sample_interval = 1.0;  ///< T_s, seconds
    double max_delay_spread = 5.0; ///< seconds; path delays are uniform on [0, this]
    double pulse_rolloff = 0.8;    ///< raised-cosine roll-off in [0, 1]
    std::uint64_t rng_seed = 1;

    /// Number of stacked combiner rows per stage. Derived, never stored.
    int t3() const { return t2 * num_bs_rf; }

    /// Throws std::invalid_argument on any violated constraint.
    void validate() const;
};

inline void SystemConfig::validate() const {
    auto fail = [](const std::string& msg) { throw std::invalid_argument("SystemConfig: " + msg); };
    if (num_bs_antennas < 1 || num_user_antennas < 1) fail("antenna counts must be positive");
    if (num_bs_rf < 1 || num_user_rf < 1) fail("RF chain counts must be positive");
    if (num_users < 1) fail("num_users must be positive");
    if (num_subcarriers < 1) fail("num_subcarriers must be positive");
    if (num_taps < 1) fail("num_taps must be positive");
    if (num_taps > num_subcarriers) fail("num_taps must not exceed num_subcarriers");
    if (num_paths < 1) fail("num_paths must be positive");
    if (t1 < 1 || t2 < 1) fail("t1 and t2 must be positive");
    if (num_bs_rf >= num_bs_antennas) fail("num_bs_rf must be smaller than num_bs_antennas");
    if (num_user_rf >= num_user_antennas) fail("num_user_rf must be smaller than num_user_antennas");
    if (t3() < num_paths) fail("t2 * num_bs_rf must be at least num_paths");
    if (t1 < num_paths) fail("t1 must be at least num_paths");
    if (noise_variance < 0.0) fail("noise_variance must be nonnegative");
    if (sample_interval <= 0.0) fail("sample_interval must be positive");
    if (max_delay_spread < 0.0) fail("max_delay_spread must be nonnegative");
    if (pulse_rolloff < 0.0 || pulse_rolloff > 1.0) fail("pulse_rolloff must be in [0, 1]");
}

} // namespace mmce
