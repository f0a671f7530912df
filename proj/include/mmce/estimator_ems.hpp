// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "mmce/estimator_tde.hpp"
#include "mmce/sounding.hpp"
#include "mmce/types.hpp"

namespace mmce {

/// LS estimate of the path-domain matrix D = Lambda^0 A_T^H F from the
/// stage-1 measurement: D_hat = (1/gamma) * pinv(W_r * A_R_active) * R1.
/// `combiner_active` is the reduced combiner (active BS antennas only) and
/// `rx_steering_active` the matching rows of the receive steering estimate.
/// Throws std::runtime_error if the combined matrix loses column rank.
MatC ls_path_matrix(const MatC& stage1_k0, const MatC& combiner_active,
                    const MatC& rx_steering_active, double normalization);

/// Orthonormal basis of the orthogonal complement of one vector
/// (n x (n-1), columns pairwise orthogonal and orthogonal to d).
MatC null_space_basis(const VecC& d);

/// Projection objective for one path's AoD search.
struct AodObjective {
    MatC basis;    ///< U_i, T1 x (T1-1)
    MatC precoder; ///< F used in stage 1 (full user array in EMS mode)
};

/// P(phi) = || U^H F^H alpha(M_A, phi) ||^2, nonnegative, zero at the path's
/// AoD in the noise-free case.
double aod_objective(double phi, const AodObjective& obj);

struct CoarseResult {
    int sector = 0; ///< 1-based index of the minimizing grid point
    double lo = 0.0;
    double hi = 0.0;
};

/// Sample the objective at m_antennas equally spaced points and return the
/// mainlobe interval around the minimizer (width 4/M_A). Near the domain
/// edge the interval runs past +-1: the steering response is 2-periodic in
/// the sine, so the objective wraps and the refined result is mapped back
/// with wrap_to_domain.
CoarseResult coarse_minimum(const AodObjective& obj, int m_antennas);

/// Map a sine-domain angle into [-1, 1) modulo the 2-periodicity.
double wrap_to_domain(double angle_sin);

struct RefineResult {
    double phi = 0.0;
    int iterations = 0;
};

/// Shrink [lo, hi] by derivative-sign bisection (central finite difference;
/// a three-point sectioning step takes over whenever the difference falls
/// under 1e-12) until the bracket is at most 2*eps wide, then place the
/// result by parabolic interpolation through the bracket. Assuming the
/// objective is unimodal on the interval, |phi - argmin| <= eps.
RefineResult refine_minimum(const AodObjective& obj, double lo, double hi, double eps);

struct EmsOptions {
    double epsilon = 1e-3; ///< bisection tolerance on the AoD sine
    bool repair_pass = false; ///< re-run the greedy pairing as a consistency pass
    EspritOptions esprit;
};

/// Two-stage pipeline: ESPRIT AoA, per-path AoD by null-space projection
/// minimum search (AoD index i inherits AoA index i, so pairing is implicit),
/// then gain LS and reconstruction shared with the three-stage estimator.
std::vector<ChannelEstimate> estimate_ems(const MeasurementSet& meas, const SoundingDesign& design,
                                          const SystemConfig& cfg, const EmsOptions& opts = {});

} // namespace mmce
