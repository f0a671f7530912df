// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "mmce/beam_design.hpp"
#include "mmce/sounding.hpp"
#include "test_util.hpp"

using namespace mmce;

namespace {

// Hand-built design with explicit combiner rows / precoder columns; masks are
// derived the same way build_designs derives them.
SoundingDesign design_from_matrices(MatC w, MatC f, int num_bs_rf) {
    SoundingDesign d;
    d.num_bs_rf = num_bs_rf;
    d.combiner = std::move(w);
    d.precoder = std::move(f);
    const auto na = d.combiner.cols();
    const auto ma = d.precoder.rows();
    d.combiner_mask_last = MatC::Zero(d.combiner.rows(), na);
    d.combiner_mask_last.leftCols(na - 1) = d.combiner.leftCols(na - 1);
    d.combiner_mask_first = MatC::Zero(d.combiner.rows(), na);
    d.combiner_mask_first.rightCols(na - 1) = d.combiner.leftCols(na - 1);
    d.precoder_mask_last = MatC::Zero(ma, d.precoder.cols());
    d.precoder_mask_last.topRows(ma - 1) = d.precoder.topRows(ma - 1);
    d.precoder_mask_first = MatC::Zero(ma, d.precoder.cols());
    d.precoder_mask_first.bottomRows(ma - 1) = d.precoder.topRows(ma - 1);
    return d;
}

SystemConfig small_config() {
    SystemConfig cfg;
    cfg.num_bs_antennas = 8;
    cfg.num_user_antennas = 4;
    cfg.num_bs_rf = 2;
    cfg.num_users = 2;
    cfg.num_subcarriers = 4;
    cfg.num_taps = 2;
    cfg.num_paths = 1;
    cfg.t1 = 3;
    cfg.t2 = 2;
    return cfg;
}

} // namespace

TEST_CASE("simulate_stage: identity-row combiner picks channel submatrix") {
    SystemConfig cfg = small_config();
    Rng rng(1);
    ChannelRealization real = generate_realization(cfg, rng);

    // rows of W select antennas 0..t3-1, F's first column is e_0
    MatC w = MatC::Zero(cfg.t3(), cfg.num_bs_antennas);
    for (int i = 0; i < cfg.t3(); ++i) w(i, i) = 1.0;
    MatC f = MatC::Zero(cfg.num_user_antennas, cfg.t1);
    f(0, 0) = 1.0;
    SoundingDesign d = design_from_matrices(w, f, cfg.num_bs_rf);

    // unmasked EMS-style stage uses the matrices as-is on the user side
    auto meas = simulate_stage(d, real, Stage::One, SoundingMode::Ems, {0, 1}, 0.0, rng);
    for (int u = 0; u < cfg.num_users; ++u)
        for (int ki = 0; ki < 2; ++ki) {
            const MatC& h = real.subcarrier_matrices[u][ki];
            // combiner is masked on the last BS antenna, which the identity
            // rows never touch for t3 < num_bs_antennas
            for (int i = 0; i < cfg.t3(); ++i)
                CHECK(std::abs(meas[u][ki](i, 0) - h(i, 0)) < 1e-14);
        }
}

TEST_CASE("simulate_stage: single-path stage-2 is a rotation of stage-1") {
    SystemConfig cfg = small_config();
    SoundingDesign d = build_designs(cfg);
    std::vector<std::vector<ChannelPath>> paths(cfg.num_users);
    Rng rng(2);
    for (auto& pu : paths)
        pu.push_back({rng.cgauss(), rng.uniform(0.0, 2.0), rng.uniform(-1.0, 1.0),
                      rng.uniform(-1.0, 1.0)});
    ChannelRealization real = test::make_realization(cfg, paths);

    auto s1 = simulate_stage(d, real, Stage::One, SoundingMode::Tde, {0}, 0.0, rng);
    auto s2 = simulate_stage(d, real, Stage::Two, SoundingMode::Tde, {0}, 0.0, rng);
    for (int u = 0; u < cfg.num_users; ++u) {
        double theta = paths[u][0].aoa_sin;
        Complex rot(std::cos(kPi * theta), std::sin(kPi * theta));
        CHECK((s2[u][0] - rot * s1[u][0]).norm() < 1e-12 * s1[u][0].norm());
    }
}

TEST_CASE("simulate_stage: noise-free measurements match the factored model") {
    SystemConfig cfg;
    cfg.num_users = 2;
    SoundingDesign d = build_designs(cfg);
    Rng rng(3);
    ChannelRealization real = generate_realization(cfg, rng);
    MeasurementSet ms = simulate_measurements(d, real, SoundingMode::Tde, 0.0, rng);

    const double g = real.normalization;
    for (int u = 0; u < cfg.num_users; ++u) {
        MatC a_r = real.receive_steering(u, cfg.num_bs_antennas);
        MatC a_t = real.transmit_steering(u, cfg.num_user_antennas);
        auto [w1, f1] = stage_matrices(d, Stage::One, SoundingMode::Tde);
        auto [w2, f2] = stage_matrices(d, Stage::Two, SoundingMode::Tde);
        auto [w3, f3] = stage_matrices(d, Stage::Three, SoundingMode::Tde);
        for (int k = 0; k < cfg.num_subcarriers; ++k) {
            MatC model = g * w1 * a_r * real.gain_diagonals[u][k].asDiagonal() * a_t.adjoint() * f1;
            CHECK((ms.stage1[u][k] - model).norm() < 1e-10 * model.norm());
        }
        MatC m2 = g * w2 * a_r * real.gain_diagonals[u][0].asDiagonal() * a_t.adjoint() * f2;
        CHECK((ms.stage2[u] - m2).norm() < 1e-10 * m2.norm());
        MatC m3 = g * w3 * a_r * real.gain_diagonals[u][0].asDiagonal() * a_t.adjoint() * f3;
        CHECK((ms.stage3[u] - m3).norm() < 1e-10 * m3.norm());
    }
}

TEST_CASE("simulate_stage: empirical noise power matches prediction") {
    SystemConfig cfg = small_config();
    SoundingDesign d = build_designs(cfg);
    Rng rng(4);
    ChannelRealization real = generate_realization(cfg, rng);
    const double sigma2 = 0.37;
    auto clean = simulate_stage(d, real, Stage::One, SoundingMode::Tde, {0}, 0.0, rng);
    auto [w1, f1] = stage_matrices(d, Stage::One, SoundingMode::Tde);

    double acc = 0.0;
    long long n = 0;
    for (int trial = 0; trial < 10000; ++trial) {
        auto noisy = simulate_stage(d, real, Stage::One, SoundingMode::Tde, {0}, sigma2, rng);
        acc += (noisy[0][0] - clean[0][0]).squaredNorm();
        n += noisy[0][0].size();
    }
    double predicted = w1.squaredNorm() * sigma2 / cfg.t3();
    CHECK(acc / n == doctest::Approx(predicted).epsilon(0.02));
}

TEST_CASE("despread: orthogonality and error paths") {
    const int num_users = 4;
    MatC pilots = dft_pilots(num_users);
    CHECK((pilots.adjoint() * pilots - MatC::Identity(num_users, num_users)).norm() < 1e-12);

    Rng rng(5);
    MatC y(3, num_users);
    for (int i = 0; i < y.size(); ++i) y(i / num_users, i % num_users) = rng.cgauss();

    SUBCASE("standard basis pilot picks a column") {
        VecC e1 = VecC::Zero(num_users);
        e1(1) = 1.0;
        CHECK((despread(y, e1) - y.col(1)).norm() < 1e-15);
    }
    SUBCASE("non-unit pilot rejected") {
        VecC bad = VecC::Constant(num_users, Complex(1.0, 0.0));
        CHECK_THROWS_AS(despread(y, bad), std::invalid_argument);
    }
}

TEST_CASE("multiuser pilot protocol equals the per-user model noise-free") {
    SystemConfig cfg = small_config();
    SoundingDesign d = build_designs(cfg);
    Rng rng(6);
    ChannelRealization real = generate_realization(cfg, rng);

    auto direct = simulate_stage(d, real, Stage::One, SoundingMode::Tde, {0, 2}, 0.0, rng);
    auto protocol =
        simulate_stage_multiuser(d, real, Stage::One, SoundingMode::Tde, {0, 2}, 0.0, rng);
    for (int u = 0; u < cfg.num_users; ++u)
        for (int ki = 0; ki < 2; ++ki)
            CHECK((direct[u][ki] - protocol[u][ki]).norm() < 1e-12 * direct[u][ki].norm());
}

TEST_CASE("multiuser despread noise keeps its variance") {
    SystemConfig cfg = small_config();
    SoundingDesign d = build_designs(cfg);
    Rng rng(7);
    ChannelRealization real = generate_realization(cfg, rng);
    const double sigma2 = 0.8;
    auto clean = simulate_stage_multiuser(d, real, Stage::One, SoundingMode::Tde, {0}, 0.0, rng);
    auto [w1, f1] = stage_matrices(d, Stage::One, SoundingMode::Tde);

    double acc = 0.0;
    long long n = 0;
    for (int trial = 0; trial < 10000; ++trial) {
        auto noisy =
            simulate_stage_multiuser(d, real, Stage::One, SoundingMode::Tde, {0}, sigma2, rng);
        acc += (noisy[1][0] - clean[1][0]).squaredNorm();
        n += noisy[1][0].size();
    }
    // unit-norm pilots preserve the per-entry post-combining noise power
    double predicted = w1.squaredNorm() * sigma2 / cfg.t3();
    CHECK(acc / n == doctest::Approx(predicted).epsilon(0.02));
}

TEST_CASE("simulate_measurements: deterministic under a fixed seed") {
    SystemConfig cfg = small_config();
    SoundingDesign d = build_designs(cfg);
    Rng rng(8);
    ChannelRealization real = generate_realization(cfg, rng);
    Rng n1(55), n2(55);
    MeasurementSet a = simulate_measurements(d, real, SoundingMode::Tde, 0.2, n1);
    MeasurementSet b = simulate_measurements(d, real, SoundingMode::Tde, 0.2, n2);
    for (int u = 0; u < cfg.num_users; ++u) {
        for (int k = 0; k < cfg.num_subcarriers; ++k)
            CHECK(a.stage1[u][k] == b.stage1[u][k]);
        CHECK(a.stage2[u] == b.stage2[u]);
        CHECK(a.stage3[u] == b.stage3[u]);
    }
}

TEST_CASE("stage matrices: EMS mode keeps the user side unmasked") {
    SystemConfig cfg = small_config();
    SoundingDesign d = build_designs(cfg);
    auto [w1, f1] = stage_matrices(d, Stage::One, SoundingMode::Ems);
    CHECK((f1 - d.precoder).norm() == 0.0);
    CHECK(w1.col(cfg.num_bs_antennas - 1).norm() == 0.0);
    auto [w2, f2] = stage_matrices(d, Stage::Two, SoundingMode::Ems);
    CHECK(w2.col(0).norm() == 0.0);
    CHECK_THROWS_AS(stage_matrices(d, Stage::Three, SoundingMode::Ems), std::invalid_argument);
}

TEST_CASE("noise_variance_for_snr realizes the requested ratio") {
    SystemConfig cfg;
    SoundingDesign d = build_designs(cfg);
    Rng rng(9);
    ChannelRealization real = generate_realization(cfg, rng);
    const double snr_db = 7.0;
    double sigma2 = noise_variance_for_snr(d, real, SoundingMode::Tde, snr_db);

    auto clean = simulate_stage(d, real, Stage::One, SoundingMode::Tde,
                                {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15}, 0.0, rng);
    double sig = 0.0, noi = 0.0;
    for (int rep = 0; rep < 40; ++rep) {
        auto noisy = simulate_stage(d, real, Stage::One, SoundingMode::Tde,
                                    {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15},
                                    sigma2, rng);
        for (int u = 0; u < cfg.num_users; ++u)
            for (int k = 0; k < cfg.num_subcarriers; ++k) {
                sig += clean[u][k].squaredNorm();
                noi += (noisy[u][k] - clean[u][k]).squaredNorm();
            }
    }
    CHECK(10.0 * std::log10(sig / noi) == doctest::Approx(snr_db).epsilon(0.02));
}

TEST_CASE("pilot slot accounting") {
    SystemConfig cfg; // K=16, U=4, T1=12, T2=8
    CHECK(pilot_slots(cfg, SoundingMode::Tde) == 6912);
    CHECK(pilot_slots(cfg, SoundingMode::Ems) == 6528);
    CHECK(pilot_slots(cfg, SoundingMode::Tde) ==
          static_cast<long long>(cfg.num_subcarriers + 2) * cfg.num_users * cfg.t1 * cfg.t2);
    CHECK(pilot_slots(cfg, SoundingMode::Ems) ==
          static_cast<long long>(cfg.num_subcarriers + 1) * cfg.num_users * cfg.t1 * cfg.t2);
}
