// SPDX-License-Identifier: Apache-2.0
#include "mmce/baselines.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

#include "mmce/channel.hpp"

namespace mmce {

BeamspaceDictionary build_dictionary(const SoundingDesign& design, const SystemConfig& cfg,
                                     int grid_rx, int grid_tx) {
    if (grid_rx < 1 || grid_tx < 1)
        throw std::invalid_argument("build_dictionary: grid sizes must be positive");
    BeamspaceDictionary dict;
    dict.grid_rx = grid_rx;
    dict.grid_tx = grid_tx;
    dict.rx_angles.resize(grid_rx);
    dict.tx_angles.resize(grid_tx);
    for (int g = 0; g < grid_rx; ++g) dict.rx_angles[g] = -1.0 + 2.0 * g / grid_rx;
    for (int g = 0; g < grid_tx; ++g) dict.tx_angles[g] = -1.0 + 2.0 * g / grid_tx;

    auto [w1, f1] = stage_matrices(design, Stage::One, SoundingMode::Ems);
    dict.rx_bank = w1 * steering_matrix(cfg.num_bs_antennas, dict.rx_angles);
    dict.tx_bank =
        f1.transpose() * steering_matrix(cfg.num_user_antennas, dict.tx_angles).conjugate();
    return dict;
}

std::vector<ChannelEstimate> omp_estimate(const MeasurementSet& meas,
                                          const BeamspaceDictionary& dict,
                                          const SoundingDesign& design, const SystemConfig& cfg,
                                          int num_paths) {
    if (meas.mode != SoundingMode::Ems)
        throw std::invalid_argument("omp_estimate: runs on the EMS-mode stage-1 measurements");
    const int t3 = static_cast<int>(dict.rx_bank.rows());
    const int t1 = static_cast<int>(dict.tx_bank.rows());
    if (num_paths > t3 * t1 ||
        num_paths > static_cast<long long>(dict.grid_rx) * dict.grid_tx)
        throw std::invalid_argument("omp_estimate: num_paths exceeds the dictionary rank");

    VecR rx_norms(dict.grid_rx), tx_norms(dict.grid_tx);
    for (int g = 0; g < dict.grid_rx; ++g) rx_norms(g) = dict.rx_bank.col(g).norm();
    for (int g = 0; g < dict.grid_tx; ++g) tx_norms(g) = dict.tx_bank.col(g).norm();

    auto [w1, f1] = stage_matrices(design, Stage::One, SoundingMode::Ems);
    const double gamma = std::sqrt(
        static_cast<double>(cfg.num_bs_antennas) * cfg.num_user_antennas / cfg.num_paths);

    std::vector<ChannelEstimate> out;
    out.reserve(meas.stage1.size());
    for (int u = 0; u < static_cast<int>(meas.stage1.size()); ++u) {
        const MatC& r0 = meas.stage1[u][0];
        MatC residual = r0;
        std::vector<std::pair<int, int>> selected; // (rx grid, tx grid)
        std::set<std::pair<int, int>> used;
        MatC atoms(t3 * t1, num_paths);

        for (int it = 0; it < num_paths; ++it) {
            MatC corr = dict.rx_bank.adjoint() * residual * dict.tx_bank.conjugate();
            int best_r = -1, best_t = -1;
            double best = -1.0;
            for (int r = 0; r < dict.grid_rx; ++r)
                for (int t = 0; t < dict.grid_tx; ++t) {
                    if (used.count({r, t})) continue;
                    double score = std::abs(corr(r, t)) / (rx_norms(r) * tx_norms(t));
                    if (score > best) {
                        best = score;
                        best_r = r;
                        best_t = t;
                    }
                }
            used.insert({best_r, best_t});
            selected.emplace_back(best_r, best_t);

            MatC outer = dict.rx_bank.col(best_r) * dict.tx_bank.col(best_t).transpose();
            atoms.col(it) = Eigen::Map<VecC>(outer.data(), t3 * t1);

            MatC r0c = r0;
            VecC coef = atoms.leftCols(it + 1).completeOrthogonalDecomposition().solve(
                Eigen::Map<VecC>(r0c.data(), t3 * t1));
            VecC resid_vec =
                Eigen::Map<VecC>(r0c.data(), t3 * t1) - atoms.leftCols(it + 1) * coef;
            residual = Eigen::Map<MatC>(resid_vec.data(), t3, t1);
        }

        AngleEstimates angles;
        angles.paired = true;
        for (auto [r, t] : selected) {
            angles.aoa_sins.push_back(dict.rx_angles[r]);
            angles.aod_sins.push_back(dict.tx_angles[t]);
        }
        MatC a_r = steering_matrix(cfg.num_bs_antennas, angles.aoa_sins);
        MatC a_t = steering_matrix(cfg.num_user_antennas, angles.aod_sins);
        auto gains = estimate_gains(meas.stage1[u], w1, f1, a_r, a_t, gamma, u);
        out.push_back(
            reconstruct(angles, gains, cfg.num_bs_antennas, cfg.num_user_antennas, gamma));
    }
    return out;
}

} // namespace mmce
