// SPDX-License-Identifier: Apache-2.0
#include "mmce/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace mmce {

VecC steering_vector(int n_antennas, double angle_sin) {
    VecC v(n_antennas);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n_antennas));
    for (int m = 0; m < n_antennas; ++m) {
        double phase = kPi * angle_sin * m;
        v(m) = Complex(scale * std::cos(phase), scale * std::sin(phase));
    }
    return v;
}

MatC steering_matrix(int n_antennas, const std::vector<double>& angle_sins) {
    MatC m(n_antennas, static_cast<int>(angle_sins.size()));
    for (int i = 0; i < m.cols(); ++i) m.col(i) = steering_vector(n_antennas, angle_sins[i]);
    return m;
}

double raised_cosine(double t, double sample_interval, double rolloff) {
    const double u = t / sample_interval;
    auto sinc = [](double x) {
        if (std::abs(x) < 1e-12) return 1.0;
        return std::sin(kPi * x) / (kPi * x);
    };
    if (rolloff > 0.0) {
        // Removable singularity where the denominator 1 - (2*rolloff*u)^2 vanishes.
        double crit = 1.0 / (2.0 * rolloff);
        if (std::abs(std::abs(u) - crit) < 1e-9)
            return (kPi / 4.0) * sinc(crit);
    }
    double denom = 1.0 - (2.0 * rolloff * u) * (2.0 * rolloff * u);
    return sinc(u) * std::cos(kPi * rolloff * u) / denom;
}

std::vector<double> ChannelRealization::aoa_sins(int user) const {
    std::vector<double> a;
    a.reserve(paths[user].size());
    for (const auto& p : paths[user]) a.push_back(p.aoa_sin);
    return a;
}

std::vector<double> ChannelRealization::aod_sins(int user) const {
    std::vector<double> a;
    a.reserve(paths[user].size());
    for (const auto& p : paths[user]) a.push_back(p.aod_sin);
    return a;
}

MatC ChannelRealization::receive_steering(int user, int n_antennas) const {
    return steering_matrix(n_antennas, aoa_sins(user));
}

MatC ChannelRealization::transmit_steering(int user, int n_antennas) const {
    return steering_matrix(n_antennas, aod_sins(user));
}

ChannelRealization generate_realization(const SystemConfig& cfg, Rng& rng) {
    cfg.validate();
    const int U = cfg.num_users;
    const int L = cfg.num_paths;
    const int D = cfg.num_taps;
    const int K = cfg.num_subcarriers;

    ChannelRealization out;
    out.normalization =
        std::sqrt(static_cast<double>(cfg.num_bs_antennas) * cfg.num_user_antennas / L);
    out.paths.resize(U);
    out.tap_matrices.resize(U);
    out.subcarrier_matrices.resize(U);
    out.gain_diagonals.resize(U);

    for (int u = 0; u < U; ++u) {
        out.paths[u].reserve(L);
        for (int i = 0; i < L; ++i) {
            ChannelPath p;
            p.gain = rng.cgauss(1.0);
            p.delay = rng.uniform(0.0, cfg.max_delay_spread);
            p.aoa_sin = rng.uniform(-1.0, 1.0);
            p.aod_sin = rng.uniform(-1.0, 1.0);
            out.paths[u].push_back(p);
        }

        MatC a_r = out.receive_steering(u, cfg.num_bs_antennas);
        MatC a_t = out.transmit_steering(u, cfg.num_user_antennas);

        // Per-tap effective gains g * p_rc(d*T_s - tau).
        MatC tap_gains(L, D); // row i, column d
        for (int i = 0; i < L; ++i)
            for (int d = 0; d < D; ++d)
                tap_gains(i, d) =
                    out.paths[u][i].gain *
                    raised_cosine(d * cfg.sample_interval - out.paths[u][i].delay,
                                  cfg.sample_interval, cfg.pulse_rolloff);

        out.tap_matrices[u].reserve(D);
        for (int d = 0; d < D; ++d)
            out.tap_matrices[u].push_back(out.normalization * a_r *
                                          tap_gains.col(d).asDiagonal() * a_t.adjoint());

        out.gain_diagonals[u].resize(K);
        out.subcarrier_matrices[u].reserve(K);
        for (int k = 0; k < K; ++k) {
            VecC lambda = VecC::Zero(L);
            for (int d = 0; d < D; ++d) {
                double phase = -2.0 * kPi * k * d / K;
                lambda += tap_gains.col(d) * Complex(std::cos(phase), std::sin(phase));
            }
            out.gain_diagonals[u][k] = lambda;
            out.subcarrier_matrices[u].push_back(out.normalization * a_r * lambda.asDiagonal() *
                                                 a_t.adjoint());
        }
    }
    return out;
}

std::vector<MatC> subcarrier_from_taps(const std::vector<MatC>& taps, int num_subcarriers) {
    if (taps.empty()) throw std::invalid_argument("subcarrier_from_taps: empty tap list");
    if (static_cast<int>(taps.size()) > num_subcarriers)
        throw std::invalid_argument("subcarrier_from_taps: more taps than subcarriers");
    const auto rows = taps.front().rows();
    const auto cols = taps.front().cols();
    for (const auto& t : taps)
        if (t.rows() != rows || t.cols() != cols)
            throw std::invalid_argument("subcarrier_from_taps: tap shape mismatch");

    std::vector<MatC> out;
    out.reserve(num_subcarriers);
    for (int k = 0; k < num_subcarriers; ++k) {
        MatC h = MatC::Zero(rows, cols);
        for (int d = 0; d < static_cast<int>(taps.size()); ++d) {
            double phase = -2.0 * kPi * k * d / num_subcarriers;
            h += taps[d] * Complex(std::cos(phase), std::sin(phase));
        }
        out.push_back(std::move(h));
    }
    return out;
}

} // namespace mmce
