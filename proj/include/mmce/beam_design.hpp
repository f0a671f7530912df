// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <utility>
#include <vector>

#include "mmce/config.hpp"
#include "mmce/types.hpp"

namespace mmce {

/// Half-open sector [lo, hi) assigned to row `sector` (1-based) when [-1, 1)
/// is tiled by `n_sectors` equal parts.
std::pair<double, double> sector_interval(int sector, int n_sectors);

/// Closed-form sector weight vector: the limit, as the angular sampling grid
/// becomes dense, of the LS fit of a flat response sqrt(xi)*exp(-j*a*theta)
/// over the sector, with xi = 1. Element m (0-based) is
///   (sqrt(n_antennas)/2) * (exp(j(m*pi - a)*hi) - exp(j(m*pi - a)*lo)) / (j(m*pi - a)),
/// with the entry at m*pi == a evaluated by its limit (hi - lo)*sqrt(n_antennas)/2.
VecC row_closed_form(int sector, double phase_slope, int n_antennas, int n_sectors);

/// Gram matrix of steering vectors over one sector:
/// X[m,l] = integral over the sector of alpha(theta) alpha(theta)^H d theta.
MatC sector_gram(int sector, int n_antennas, int n_sectors);

/// Fraction of the sector row's beam power that falls inside its own sector,
///   S(a) = (w^H X w) / ((2/n_antennas) * ||w||^2),  in [0, 1].
/// The ratio is invariant to the row's scale and to the sector index.
double power_ratio(double phase_slope, int sector, int n_antennas, int n_sectors);

/// Grid search for the phase slope maximizing the power ratio. Samples
///   a_n = (N-1)pi/2 + ((N-1)pi/2 + n_sectors*pi) * (n-1)/n_samples
/// for n = 1..n_samples (N = n_antennas) and returns the argmax, ties broken
/// by the smallest index.
double search_phase_slope(int n_antennas, int n_sectors, int n_samples);

/// Frequency-flat sounding matrices plus the antenna-masked stage variants.
///
/// `combiner` stacks the T3 sector rows (row n is w_n^H); `precoder` holds
/// the T1 sector columns over the user array. Both are scaled to unit
/// Frobenius norm. The masked forms zero exactly one antenna: the *_mask_last
/// matrices apply the reduced matrix to the first N-1 antennas, the
/// *_mask_first matrices apply the same reduced matrix shifted onto the last
/// N-1 antennas.
struct SoundingDesign {
    MatC combiner; ///< W, T3 x N_A, ||W||_F = 1
    MatC precoder; ///< F, M_A x T1, ||F||_F = 1
    int num_bs_rf = 1; ///< N_R; the combiner stacks T2 blocks of this many rows
    double combiner_phase_slope = 0.0;
    double precoder_phase_slope = 0.0;

    MatC combiner_mask_last;  ///< [W_r, 0], last BS antenna off
    MatC combiner_mask_first; ///< [0, W_r], first BS antenna off
    MatC precoder_mask_last;  ///< [F_r; 0^T], last user antenna off
    MatC precoder_mask_first; ///< [0^T; F_r], first user antenna off

    /// Reduced combiner W_r = first N_A - 1 columns of W.
    MatC reduced_combiner() const { return combiner.leftCols(combiner.cols() - 1); }
    /// Reduced precoder F_r = first M_A - 1 rows of F.
    MatC reduced_precoder() const { return precoder.topRows(precoder.rows() - 1); }
};

struct BeamDesignOptions {
    int search_samples = 1000;
};

/// Build the combiner/precoder pair for a configuration. Throws
/// std::runtime_error if a masked matrix loses full row (combiner) or column
/// (precoder) rank, which signals a degenerate configuration.
SoundingDesign build_designs(const SystemConfig& cfg, const BeamDesignOptions& opts = {});

/// Beamspace gain statistics of a codebook over a uniform angle grid:
/// g(theta) = ||M * alpha(theta)||^2 with M = combiner (rows) or precoder^H.
struct FlatnessReport {
    double min_gain = 0.0;
    double max_gain = 0.0;
    double mean_gain = 0.0;
    int grid_points = 0;
};

FlatnessReport flatness_report(const MatC& rows_matrix, int n_antennas, int grid_points = 512);

} // namespace mmce
