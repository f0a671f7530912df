// SPDX-License-Identifier: Apache-2.0
#include "mmce/estimator_tde.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "mmce/channel.hpp"

namespace mmce {

EspritResult esprit_shift_invariance(const MatC& r1, const MatC& r2, int num_paths,
                                     const EspritOptions& opts) {
    if (r1.rows() != r2.rows() || r1.cols() != r2.cols())
        throw std::invalid_argument("esprit: the two measurement blocks must share a shape");
    if (num_paths < 1) throw std::invalid_argument("esprit: num_paths must be positive");
    const int rows = static_cast<int>(r1.rows());
    if (num_paths > rows)
        throw std::invalid_argument("esprit: num_paths exceeds the block row count");

    MatC stacked(2 * rows, r1.cols());
    stacked.topRows(rows) = r1;
    stacked.bottomRows(rows) = r2;

    MatC cov = stacked * stacked.adjoint();
    Eigen::SelfAdjointEigenSolver<MatC> eig(cov);
    if (eig.info() != Eigen::Success)
        throw std::runtime_error("esprit: covariance eigendecomposition failed");

    // Eigenvalues come out ascending; the signal subspace sits in the last
    // num_paths columns.
    const auto& vals = eig.eigenvalues();
    const int n = static_cast<int>(vals.size());
    EspritResult out;
    double top = vals(n - 1);
    out.rank_warning = !(top > 0.0) || vals(n - num_paths) < opts.rank_gap_threshold * top;

    MatC sig = eig.eigenvectors().rightCols(num_paths);
    MatC upper = sig.topRows(rows);
    MatC lower = sig.bottomRows(rows);
    MatC psi = upper.colPivHouseholderQr().solve(lower);

    Eigen::ComplexEigenSolver<MatC> ces(psi);
    if (ces.info() != Eigen::Success)
        throw std::runtime_error("esprit: invariance eigendecomposition failed");

    std::vector<std::pair<double, Complex>> pairs(num_paths);
    for (int i = 0; i < num_paths; ++i) {
        Complex ev = ces.eigenvalues()(i);
        pairs[i] = {std::arg(ev) / kPi, ev};
    }
    std::sort(pairs.begin(), pairs.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    out.angles.resize(num_paths);
    out.eigenvalues.resize(num_paths);
    for (int i = 0; i < num_paths; ++i) {
        out.angles[i] = pairs[i].first;
        out.eigenvalues[i] = pairs[i].second;
    }
    return out;
}

EspritResult estimate_aoa(const MeasurementSet& meas, int user, int num_paths,
                          const EspritOptions& opts) {
    return esprit_shift_invariance(meas.stage1.at(user).at(0), meas.stage2.at(user), num_paths,
                                   opts);
}

EspritResult estimate_aod_tde(const MeasurementSet& meas, int user, int num_paths,
                              const EspritOptions& opts) {
    if (meas.stage3.empty())
        throw std::invalid_argument("estimate_aod_tde: measurement set has no third stage");
    return esprit_shift_invariance(meas.stage1.at(user).at(0).adjoint(),
                                   meas.stage3.at(user).adjoint(), num_paths, opts);
}

MatC coupling_matrix(const MatC& stage1_k0, const MatC& combiner_stage, const MatC& precoder_stage,
                     const MatC& rx_steering, const MatC& tx_steering, double normalization) {
    MatC lhs = combiner_stage * rx_steering;            // T3 x L
    MatC rhs = tx_steering.adjoint() * precoder_stage;  // L x T1
    MatC mid = lhs.completeOrthogonalDecomposition().solve(stage1_k0);
    MatC rhs_pinv = rhs.completeOrthogonalDecomposition().pseudoInverse();
    return (mid * rhs_pinv) / normalization;
}

namespace {

double min_separation(const std::vector<double>& v) {
    double best = 2.0;
    for (std::size_t i = 0; i < v.size(); ++i)
        for (std::size_t j = i + 1; j < v.size(); ++j)
            best = std::min(best, std::abs(v[i] - v[j]));
    return best;
}

} // namespace

AngleEstimates pair_angles(const std::vector<double>& aoa_sins, const std::vector<double>& aod_sins,
                           const MatC& coupling) {
    const int L = static_cast<int>(aoa_sins.size());
    if (static_cast<int>(aod_sins.size()) != L || coupling.rows() != L || coupling.cols() != L)
        throw std::invalid_argument("pair_angles: size mismatch");

    std::vector<bool> taken(L, false);
    AngleEstimates out;
    out.aoa_sins = aoa_sins;
    out.aod_sins.resize(L);
    for (int i = 0; i < L; ++i) {
        int best = -1;
        double best_mag = -1.0;
        for (int d = 0; d < L; ++d) {
            if (taken[d]) continue;
            double mag = std::abs(coupling(i, d));
            if (mag > best_mag) {
                best_mag = mag;
                best = d;
            }
        }
        taken[best] = true;
        out.aod_sins[i] = aod_sins[best];
    }
    out.paired = true;
    out.degenerate = min_separation(aoa_sins) < 1e-6 || min_separation(aod_sins) < 1e-6;
    return out;
}

std::vector<VecC> estimate_gains(const std::vector<MatC>& stage1_all_k, const MatC& combiner_stage,
                                 const MatC& precoder_stage, const MatC& rx_steering,
                                 const MatC& tx_steering, double normalization, int user) {
    const int L = static_cast<int>(rx_steering.cols());
    const int t3 = static_cast<int>(combiner_stage.rows());
    const int t1 = static_cast<int>(precoder_stage.cols());

    // Column i is vec(W a_R,i a_T,i^H F); the Kronecker-Khatri-Rao system is
    // never materialized beyond these L columns.
    MatC system(t3 * t1, L);
    for (int i = 0; i < L; ++i) {
        MatC outer = (combiner_stage * rx_steering.col(i)) *
                     (tx_steering.col(i).adjoint() * precoder_stage);
        system.col(i) = Eigen::Map<VecC>(outer.data(), t3 * t1);
    }

    auto cod = system.completeOrthogonalDecomposition();
    if (cod.rank() < L)
        throw std::runtime_error("estimate_gains: rank-deficient system for user " +
                                 std::to_string(user));
    // Solve through a truncated pseudo-inverse: near-parallel atoms (two
    // estimated paths collapsing onto one) would otherwise amplify fitting
    // noise without bound; truncation at 1e-2 caps the amplification at 100x
    // and returns the min-norm fit over the usable directions.
    cod.setThreshold(1e-2);

    std::vector<VecC> gains;
    gains.reserve(stage1_all_k.size());
    for (const auto& r : stage1_all_k) {
        MatC rc = r;
        VecC v = cod.solve(Eigen::Map<VecC>(rc.data(), t3 * t1));
        gains.push_back(v / normalization);
    }
    return gains;
}

ChannelEstimate reconstruct(const AngleEstimates& angles, const std::vector<VecC>& gains,
                            int num_bs_antennas, int num_user_antennas, double normalization) {
    ChannelEstimate est;
    est.angles = angles;
    est.gains = gains;
    MatC a_r = steering_matrix(num_bs_antennas, angles.aoa_sins);
    MatC a_t = steering_matrix(num_user_antennas, angles.aod_sins);
    est.channels.reserve(gains.size());
    for (const auto& v : gains)
        est.channels.push_back(normalization * a_r * v.asDiagonal() * a_t.adjoint());
    return est;
}

std::vector<ChannelEstimate> estimate_tde(const MeasurementSet& meas, const SoundingDesign& design,
                                          const SystemConfig& cfg, const EspritOptions& opts) {
    if (meas.mode != SoundingMode::Tde)
        throw std::invalid_argument("estimate_tde: needs a TDE-mode measurement set");
    const int L = cfg.num_paths;
    const double gamma =
        std::sqrt(static_cast<double>(cfg.num_bs_antennas) * cfg.num_user_antennas / L);
    auto [w1, f1] = stage_matrices(design, Stage::One, SoundingMode::Tde);

    std::vector<ChannelEstimate> out;
    out.reserve(meas.stage1.size());
    for (int u = 0; u < static_cast<int>(meas.stage1.size()); ++u) {
        EspritResult aoa = estimate_aoa(meas, u, L, opts);
        EspritResult aod = estimate_aod_tde(meas, u, L, opts);

        MatC coupling = coupling_matrix(meas.stage1[u][0], w1, f1,
                                        steering_matrix(cfg.num_bs_antennas, aoa.angles),
                                        steering_matrix(cfg.num_user_antennas, aod.angles), gamma);
        AngleEstimates paired = pair_angles(aoa.angles, aod.angles, coupling);
        paired.rank_warning = aoa.rank_warning || aod.rank_warning;

        MatC a_r = steering_matrix(cfg.num_bs_antennas, paired.aoa_sins);
        MatC a_t = steering_matrix(cfg.num_user_antennas, paired.aod_sins);
        auto gains = estimate_gains(meas.stage1[u], w1, f1, a_r, a_t, gamma, u);
        out.push_back(reconstruct(paired, gains, cfg.num_bs_antennas, cfg.num_user_antennas,
                                  gamma));
    }
    return out;
}

} // namespace mmce
