// SPDX-License-Identifier: Apache-2.0
#include "mmce/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace mmce {

double nmse(const std::vector<ChannelEstimate>& estimates, const ChannelRealization& truth) {
    if (static_cast<int>(estimates.size()) != truth.num_users())
        throw std::invalid_argument("nmse: user count mismatch");
    double err = 0.0;
    double energy = 0.0;
    for (int u = 0; u < truth.num_users(); ++u) {
        const auto& est_k = estimates[u].channels;
        const auto& true_k = truth.subcarrier_matrices[u];
        if (est_k.size() != true_k.size()) throw std::invalid_argument("nmse: subcarrier mismatch");
        for (std::size_t k = 0; k < true_k.size(); ++k) {
            if (est_k[k].rows() != true_k[k].rows() || est_k[k].cols() != true_k[k].cols())
                throw std::invalid_argument("nmse: channel shape mismatch");
            err += (est_k[k] - true_k[k]).squaredNorm();
            energy += true_k[k].squaredNorm();
        }
    }
    return err / energy;
}

double spectral_efficiency(const std::vector<ChannelEstimate>& estimates,
                           const ChannelRealization& truth, const SystemConfig& cfg,
                           double snr_linear) {
    if (static_cast<int>(estimates.size()) != truth.num_users())
        throw std::invalid_argument("spectral_efficiency: user count mismatch");
    const int streams = std::min(cfg.num_bs_rf, cfg.num_paths);
    double total = 0.0;
    for (int u = 0; u < truth.num_users(); ++u) {
        const auto& est_k = estimates[u].channels;
        const auto& true_k = truth.subcarrier_matrices[u];
        double user_rate = 0.0;
        for (std::size_t k = 0; k < true_k.size(); ++k) {
            Eigen::JacobiSVD<MatC> svd(est_k[k], Eigen::ComputeThinU | Eigen::ComputeThinV);
            MatC rx = svd.matrixU().leftCols(streams);
            MatC tx = svd.matrixV().leftCols(streams);
            MatC eff = rx.adjoint() * true_k[k] * tx;
            Eigen::JacobiSVD<MatC> effsvd(eff);
            for (int s = 0; s < streams; ++s) {
                double sv = effsvd.singularValues()(s);
                user_rate += std::log2(1.0 + snr_linear / streams * sv * sv);
            }
        }
        total += user_rate / static_cast<double>(true_k.size());
    }
    return total;
}

} // namespace mmce
