// SPDX-License-Identifier: Apache-2.0
#include "mmce/sounding.hpp"

#include <cmath>
#include <stdexcept>

namespace mmce {

StageMatrices stage_matrices(const SoundingDesign& design, Stage stage, SoundingMode mode) {
    if (mode == SoundingMode::Ems) {
        switch (stage) {
            case Stage::One: return {design.combiner_mask_last, design.precoder};
            case Stage::Two: return {design.combiner_mask_first, design.precoder};
            case Stage::Three:
                throw std::invalid_argument("stage_matrices: EMS mode has no third stage");
        }
    }
    switch (stage) {
        case Stage::One: return {design.combiner_mask_last, design.precoder_mask_last};
        case Stage::Two: return {design.combiner_mask_first, design.precoder_mask_last};
        case Stage::Three: return {design.combiner_mask_last, design.precoder_mask_first};
    }
    throw std::invalid_argument("stage_matrices: bad stage");
}

namespace {

// Every (precoder setting, combiner setting) pair is a fresh pilot slot, so
// each N_R-row block of each column sees independent antenna noise.
void add_stage_noise(MatC& r, const MatC& combiner_stage, int num_bs_rf, double noise_variance,
                     Rng& rng) {
    if (noise_variance <= 0.0) return;
    const int t1 = static_cast<int>(r.cols());
    const int t2 = static_cast<int>(r.rows()) / num_bs_rf;
    const int na = static_cast<int>(combiner_stage.cols());
    VecC raw(na);
    for (int c = 0; c < t1; ++c)
        for (int b = 0; b < t2; ++b) {
            for (int i = 0; i < na; ++i) raw(i) = rng.cgauss(noise_variance);
            r.block(b * num_bs_rf, c, num_bs_rf, 1) +=
                combiner_stage.middleRows(b * num_bs_rf, num_bs_rf) * raw;
        }
}

} // namespace

std::vector<std::vector<MatC>> simulate_stage(const SoundingDesign& design,
                                              const ChannelRealization& realization, Stage stage,
                                              SoundingMode mode,
                                              const std::vector<int>& subcarriers,
                                              double noise_variance, Rng& rng) {
    auto [w, f] = stage_matrices(design, stage, mode);
    std::vector<std::vector<MatC>> out(realization.num_users());
    for (int u = 0; u < realization.num_users(); ++u) {
        out[u].reserve(subcarriers.size());
        for (int k : subcarriers) {
            MatC r = w * realization.subcarrier_matrices[u][k] * f;
            add_stage_noise(r, w, design.num_bs_rf, noise_variance, rng);
            out[u].push_back(std::move(r));
        }
    }
    return out;
}

MeasurementSet simulate_measurements(const SoundingDesign& design,
                                     const ChannelRealization& realization, SoundingMode mode,
                                     double noise_variance, Rng& rng) {
    MeasurementSet ms;
    ms.mode = mode;
    ms.noise_variance = noise_variance;
    const int K = static_cast<int>(realization.subcarrier_matrices.front().size());
    std::vector<int> all_k(K);
    for (int k = 0; k < K; ++k) all_k[k] = k;

    ms.stage1 = simulate_stage(design, realization, Stage::One, mode, all_k, noise_variance, rng);
    auto s2 = simulate_stage(design, realization, Stage::Two, mode, {0}, noise_variance, rng);
    for (auto& v : s2) ms.stage2.push_back(std::move(v.front()));
    if (mode == SoundingMode::Tde) {
        auto s3 =
            simulate_stage(design, realization, Stage::Three, mode, {0}, noise_variance, rng);
        for (auto& v : s3) ms.stage3.push_back(std::move(v.front()));
    }
    return ms;
}

MatC dft_pilots(int num_users) {
    MatC p(num_users, num_users);
    const double scale = 1.0 / std::sqrt(static_cast<double>(num_users));
    for (int m = 0; m < num_users; ++m)
        for (int n = 0; n < num_users; ++n) {
            double phase = -2.0 * kPi * m * n / num_users;
            p(m, n) = scale * Complex(std::cos(phase), std::sin(phase));
        }
    return p;
}

VecC despread(const MatC& received, const VecC& pilot) {
    if (std::abs(pilot.norm() - 1.0) > 1e-9)
        throw std::invalid_argument("despread: pilot sequence must have unit norm");
    if (received.cols() != pilot.size())
        throw std::invalid_argument("despread: pilot length does not match received columns");
    return received * pilot;
}

std::vector<std::vector<MatC>> simulate_stage_multiuser(const SoundingDesign& design,
                                                        const ChannelRealization& realization,
                                                        Stage stage, SoundingMode mode,
                                                        const std::vector<int>& subcarriers,
                                                        double noise_variance, Rng& rng) {
    auto [w, f] = stage_matrices(design, stage, mode);
    const int num_users = realization.num_users();
    const int t1 = static_cast<int>(f.cols());
    const int t3 = static_cast<int>(w.rows());
    const int na = static_cast<int>(w.cols());
    const int nr = design.num_bs_rf;
    const int t2 = t3 / nr;
    MatC pilots = dft_pilots(num_users);

    std::vector<std::vector<MatC>> out(num_users);
    for (int u = 0; u < num_users; ++u) out[u].assign(subcarriers.size(), MatC::Zero(t3, t1));

    MatC raw(na, num_users);
    for (std::size_t ki = 0; ki < subcarriers.size(); ++ki) {
        int k = subcarriers[ki];
        for (int c = 0; c < t1; ++c)
            for (int b = 0; b < t2; ++b) {
                auto w_blk = w.middleRows(b * nr, nr);
                // One slot group: every user transmits pilot column c at once.
                MatC slot = MatC::Zero(nr, num_users);
                for (int u = 0; u < num_users; ++u)
                    slot += (w_blk * realization.subcarrier_matrices[u][k] * f.col(c)) *
                            pilots.col(u).adjoint();
                if (noise_variance > 0.0) {
                    for (int j = 0; j < num_users; ++j)
                        for (int i = 0; i < na; ++i) raw(i, j) = rng.cgauss(noise_variance);
                    slot += w_blk * raw;
                }
                for (int u = 0; u < num_users; ++u)
                    out[u][ki].block(b * nr, c, nr, 1) = despread(slot, pilots.col(u));
            }
    }
    return out;
}

double noise_variance_for_snr(const SoundingDesign& design, const ChannelRealization& realization,
                              SoundingMode mode, double snr_db) {
    auto [w, f] = stage_matrices(design, Stage::One, mode);
    double signal_power = 0.0;
    int count = 0;
    for (int u = 0; u < realization.num_users(); ++u)
        for (const auto& h : realization.subcarrier_matrices[u]) {
            signal_power += (w * h * f).squaredNorm();
            ++count;
        }
    signal_power /= count;
    double snr_lin = std::pow(10.0, snr_db / 10.0);
    return signal_power / (snr_lin * f.cols() * w.squaredNorm());
}

long long pilot_slots(const SystemConfig& cfg, SoundingMode mode) {
    long long per_stage = static_cast<long long>(cfg.num_users) * cfg.t1 * cfg.t2;
    int stages = mode == SoundingMode::Tde ? cfg.num_subcarriers + 2 : cfg.num_subcarriers + 1;
    return per_stage * stages;
}

} // namespace mmce
