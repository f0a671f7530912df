// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mmce/beam_design.hpp"
#include "mmce/estimator_tde.hpp"
#include "mmce/metrics.hpp"
#include "test_util.hpp"

using namespace mmce;

namespace {

MatC random_matrix(int rows, int cols, Rng& rng) {
    MatC m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m(r, c) = rng.cgauss();
    return m;
}

// Synthetic noise-free shift-invariance pair: r1 = W A S, r2 = W A Theta S.
std::pair<MatC, MatC> invariance_pair(const std::vector<double>& angle_sins, int rows, int cols,
                                      Rng& rng) {
    const int L = static_cast<int>(angle_sins.size());
    MatC w = random_matrix(rows, 24, rng);
    MatC a(24, L);
    for (int i = 0; i < L; ++i) a.col(i) = steering_vector(24, angle_sins[i]);
    MatC s = random_matrix(L, cols, rng);
    VecC rot(L);
    for (int i = 0; i < L; ++i)
        rot(i) = Complex(std::cos(kPi * angle_sins[i]), std::sin(kPi * angle_sins[i]));
    return {w * a * s, w * a * rot.asDiagonal() * s};
}

std::vector<double> sorted(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v;
}

// Exhaustive assignment oracle: the column permutation maximizing the sum of
// picked magnitudes.
std::vector<int> brute_force_pairing(const MatC& coupling) {
    const int L = static_cast<int>(coupling.rows());
    std::vector<int> perm(L), best(L);
    std::iota(perm.begin(), perm.end(), 0);
    double best_score = -1.0;
    do {
        double score = 0.0;
        for (int i = 0; i < L; ++i) score += std::abs(coupling(i, perm[i]));
        if (score > best_score) {
            best_score = score;
            best = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

} // namespace

TEST_CASE("esprit: noise-free single path is exact") {
    Rng rng(21);
    auto [r1, r2] = invariance_pair({0.3}, 16, 10, rng);
    EspritResult res = esprit_shift_invariance(r1, r2, 1);
    CHECK(std::abs(res.angles[0] - 0.3) < 1e-9);
    CHECK(!res.rank_warning);
}

TEST_CASE("esprit: noise-free three paths recover the set") {
    Rng rng(22);
    std::vector<double> truth{-0.5, 0.1, 0.62};
    auto [r1, r2] = invariance_pair(truth, 16, 10, rng);
    EspritResult res = esprit_shift_invariance(r1, r2, 3);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(res.angles[i] - truth[i]) < 1e-8);
}

TEST_CASE("esprit: identical blocks give zero rotation") {
    Rng rng(23);
    auto [r1, r2] = invariance_pair({-0.2, 0.4}, 12, 8, rng);
    EspritResult res = esprit_shift_invariance(r1, r1, 2);
    for (double a : res.angles) CHECK(std::abs(a) < 1e-9);
}

TEST_CASE("esprit: eigenvalues are unit modulus in the noise-free case") {
    Rng rng(24);
    auto [r1, r2] = invariance_pair({-0.7, -0.1, 0.33, 0.8}, 20, 12, rng);
    EspritResult res = esprit_shift_invariance(r1, r2, 4);
    for (const Complex& ev : res.eigenvalues) CHECK(std::abs(std::abs(ev) - 1.0) < 1e-8);
}

TEST_CASE("esprit: error and warning paths") {
    Rng rng(25);
    auto [r1, r2] = invariance_pair({0.1}, 6, 5, rng);
    CHECK_THROWS_AS(esprit_shift_invariance(r1, r2, 7), std::invalid_argument);
    CHECK_THROWS_AS(esprit_shift_invariance(r1, r2.topRows(3), 1), std::invalid_argument);
    CHECK_THROWS_AS(esprit_shift_invariance(r1, r2, 0), std::invalid_argument);

    // asking for more paths than the signal supports flags the rank gap
    EspritResult weak = esprit_shift_invariance(r1, r2, 3);
    CHECK(weak.rank_warning);
}

TEST_CASE("esprit: angle set invariant under row/column permutations") {
    Rng rng(26);
    std::vector<double> truth{-0.44, 0.05, 0.52};
    auto [r1, r2] = invariance_pair(truth, 14, 9, rng);
    EspritResult base = esprit_shift_invariance(r1, r2, 3);

    // permuting combiner rows permutes measurement rows of both blocks the
    // same way; permuting precoder columns permutes measurement columns
    Eigen::PermutationMatrix<Eigen::Dynamic> pr(14), pc(9);
    pr.setIdentity();
    pc.setIdentity();
    std::vector<int> ridx{13, 4, 7, 0, 1, 2, 3, 5, 6, 8, 9, 10, 11, 12};
    for (int i = 0; i < 14; ++i) pr.indices()(i) = ridx[i];
    std::vector<int> cidx{2, 0, 1, 8, 7, 6, 5, 4, 3};
    for (int i = 0; i < 9; ++i) pc.indices()(i) = cidx[i];

    EspritResult permuted = esprit_shift_invariance(pr * r1 * pc, pr * r2 * pc, 3);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(base.angles[i] - permuted.angles[i]) < 1e-8);
}

TEST_CASE("estimate_aoa / estimate_aod: noise-free full-scale recovery") {
    SystemConfig cfg;
    SoundingDesign d = build_designs(cfg);
    Rng rng(27);
    ChannelRealization real = test::separated_realization(cfg, rng, 0.05);
    MeasurementSet ms = simulate_measurements(d, real, SoundingMode::Tde, 0.0, rng);

    for (int u = 0; u < cfg.num_users; ++u) {
        auto aoa = estimate_aoa(ms, u, cfg.num_paths);
        auto truth_a = sorted(real.aoa_sins(u));
        for (int i = 0; i < cfg.num_paths; ++i) CHECK(std::abs(aoa.angles[i] - truth_a[i]) < 1e-7);

        auto aod = estimate_aod_tde(ms, u, cfg.num_paths);
        auto truth_d = sorted(real.aod_sins(u));
        for (int i = 0; i < cfg.num_paths; ++i) CHECK(std::abs(aod.angles[i] - truth_d[i]) < 1e-8);
    }
}

TEST_CASE("estimate_aod_tde equals the esprit role swap bit for bit") {
    SystemConfig cfg;
    SoundingDesign d = build_designs(cfg);
    Rng rng(28);
    ChannelRealization real = generate_realization(cfg, rng);
    MeasurementSet ms = simulate_measurements(d, real, SoundingMode::Tde, 0.01, rng);
    auto direct = estimate_aod_tde(ms, 1, cfg.num_paths);
    auto swapped = esprit_shift_invariance(ms.stage1[1][0].adjoint(), ms.stage3[1].adjoint(),
                                           cfg.num_paths);
    for (int i = 0; i < cfg.num_paths; ++i) CHECK(direct.angles[i] == swapped.angles[i]);
}

TEST_CASE("estimate_aoa: single path at zero angle") {
    SystemConfig cfg;
    cfg.num_paths = 1;
    cfg.num_users = 1;
    SoundingDesign d = build_designs(cfg);
    std::vector<std::vector<ChannelPath>> paths{{{Complex(1.0, 0.4), 0.7, 0.0, -0.4}}};
    ChannelRealization real = test::make_realization(cfg, paths);
    Rng rng(29);
    MeasurementSet ms = simulate_measurements(d, real, SoundingMode::Tde, 0.0, rng);
    auto aoa = estimate_aoa(ms, 0, 1);
    CHECK(std::abs(aoa.angles[0]) < 1e-9);
    auto aod = estimate_aod_tde(ms, 0, 1);
    CHECK(std::abs(aod.angles[0] + 0.4) < 1e-9);
}

TEST_CASE("estimate_aoa: error statistics at 10 dB") {
    SystemConfig cfg;
    SoundingDesign d = build_designs(cfg);
    std::vector<double> errs;
    for (int trial = 0; trial < 40; ++trial) {
        Rng rng = Rng::child(31, trial);
        ChannelRealization real = test::separated_realization(cfg, rng, 0.05);
        double sigma2 = noise_variance_for_snr(d, real, SoundingMode::Tde, 10.0);
        MeasurementSet ms = simulate_measurements(d, real, SoundingMode::Tde, sigma2, rng);
        for (int u = 0; u < cfg.num_users; ++u) {
            auto aoa = estimate_aoa(ms, u, cfg.num_paths);
            for (double truth : real.aoa_sins(u)) {
                double best = 2.0;
                for (double est : aoa.angles)
                    best = std::min(best, test::wrap_distance(truth, est));
                errs.push_back(best);
            }
        }
    }
    std::sort(errs.begin(), errs.end());
    double mean_err = std::accumulate(errs.begin(), errs.end(), 0.0) / errs.size();
    double median_err = errs[errs.size() / 2];
    MESSAGE("aoa error at 10 dB: mean ", mean_err, " median ", median_err);
    // The typical path resolves well below the beamspace grid spacing; the
    // mean carries a heavy tail from paths that fade out at k = 0 (late
    // delays under the tap window) and is bounded by a measured envelope.
    CHECK(median_err < 2.0 / cfg.num_bs_antennas);
    CHECK(mean_err < 0.12);
}

TEST_CASE("pair_angles: diagonal coupling gives identity pairing") {
    MatC coupling = MatC::Zero(3, 3);
    coupling(0, 0) = 2.0;
    coupling(1, 1) = Complex(0.0, 1.5);
    coupling(2, 2) = -0.7;
    auto est = pair_angles({0.1, 0.2, 0.3}, {-0.1, -0.2, -0.3}, coupling);
    CHECK(est.paired);
    CHECK(est.aod_sins == std::vector<double>{-0.1, -0.2, -0.3});
}

TEST_CASE("pair_angles: single path") {
    MatC coupling = MatC::Constant(1, 1, Complex(0.3, 0.1));
    auto est = pair_angles({0.5}, {0.7}, coupling);
    CHECK(est.aod_sins == std::vector<double>{0.7});
}

TEST_CASE("pair_angles: greedy equals brute force on permuted diagonals") {
    // 120 random instances across sizes 2..6
    for (int trial = 0; trial < 120; ++trial) {
        Rng rng = Rng::child(33, trial);
        int L = 2 + trial % 5;
        std::vector<int> p(L), q(L);
        std::iota(p.begin(), p.end(), 0);
        std::iota(q.begin(), q.end(), 0);
        for (int i = L - 1; i > 0; --i) {
            std::swap(p[i], p[static_cast<int>(rng.uniform(0.0, i + 1))]);
            std::swap(q[i], q[static_cast<int>(rng.uniform(0.0, i + 1))]);
        }
        // coupling[i,d] nonzero iff the same physical path sits at row i and
        // column d: row i holds path p[i], column d holds path q[d]
        std::vector<int> q_inv(L);
        for (int d = 0; d < L; ++d) q_inv[q[d]] = d;
        MatC coupling = MatC::Zero(L, L);
        for (int i = 0; i < L; ++i) {
            Complex v = rng.cgauss();
            while (std::abs(v) < 0.05) v = rng.cgauss();
            coupling(i, q_inv[p[i]]) = v;
        }

        std::vector<double> aoa(L), aod(L);
        for (int i = 0; i < L; ++i) {
            aoa[i] = rng.uniform(-1.0, 1.0);
            aod[i] = rng.uniform(-1.0, 1.0);
        }
        auto est = pair_angles(aoa, aod, coupling);
        auto oracle = brute_force_pairing(coupling);
        for (int i = 0; i < L; ++i) CHECK(est.aod_sins[i] == aod[oracle[i]]);
    }
}

TEST_CASE("coupling_matrix: noise-free unpaired estimates give a permuted diagonal") {
    SystemConfig cfg;
    cfg.num_users = 1;
    SoundingDesign d = build_designs(cfg);
    Rng rng(35);
    ChannelRealization real = test::separated_realization(cfg, rng, 0.05);
    MeasurementSet ms = simulate_measurements(d, real, SoundingMode::Tde, 0.0, rng);

    auto aoa = estimate_aoa(ms, 0, cfg.num_paths);
    auto aod = estimate_aod_tde(ms, 0, cfg.num_paths);
    auto [w1, f1] = stage_matrices(d, Stage::One, SoundingMode::Tde);
    MatC coupling = coupling_matrix(ms.stage1[0][0], w1, f1,
                                    steering_matrix(cfg.num_bs_antennas, aoa.angles),
                                    steering_matrix(cfg.num_user_antennas, aod.angles),
                                    real.normalization);
    // exactly one dominant entry per row and per column
    for (int i = 0; i < cfg.num_paths; ++i) {
        VecR mags = coupling.row(i).cwiseAbs();
        double top = mags.maxCoeff();
        int top_count = 0;
        for (int j = 0; j < cfg.num_paths; ++j)
            if (mags(j) > 1e-6 * top) ++top_count;
        CHECK(top_count == 1);
    }

    auto paired = pair_angles(aoa.angles, aod.angles, coupling);
    // paired estimates line up with the true path pairs
    for (int i = 0; i < cfg.num_paths; ++i) {
        int truth_idx = 0;
        double best = 3.0;
        for (int j = 0; j < cfg.num_paths; ++j) {
            double dd = test::wrap_distance(paired.aoa_sins[i], real.paths[0][j].aoa_sin);
            if (dd < best) {
                best = dd;
                truth_idx = j;
            }
        }
        CHECK(test::wrap_distance(paired.aod_sins[i], real.paths[0][truth_idx].aod_sin) < 1e-6);
    }
}

TEST_CASE("estimate_gains: noise-free exact angles reproduce the gain diagonal") {
    SystemConfig cfg;
    cfg.num_users = 1;
    SoundingDesign d = build_designs(cfg);
    Rng rng(37);
    ChannelRealization real = test::separated_realization(cfg, rng, 0.05);
    MeasurementSet ms = simulate_measurements(d, real, SoundingMode::Tde, 0.0, rng);
    auto [w1, f1] = stage_matrices(d, Stage::One, SoundingMode::Tde);

    MatC a_r = real.receive_steering(0, cfg.num_bs_antennas);
    MatC a_t = real.transmit_steering(0, cfg.num_user_antennas);
    auto gains = estimate_gains(ms.stage1[0], w1, f1, a_r, a_t, real.normalization, 0);
    REQUIRE(static_cast<int>(gains.size()) == cfg.num_subcarriers);
    for (int k = 0; k < cfg.num_subcarriers; ++k)
        CHECK((gains[k] - real.gain_diagonals[0][k]).norm() < 1e-10);
}

TEST_CASE("estimate_gains: K=1, D=1 recovers tap-0 effective gains") {
    SystemConfig cfg;
    cfg.num_users = 1;
    cfg.num_subcarriers = 1;
    cfg.num_taps = 1;
    SoundingDesign d = build_designs(cfg);
    Rng rng(38);
    ChannelRealization real = test::separated_realization(cfg, rng, 0.05);
    MeasurementSet ms = simulate_measurements(d, real, SoundingMode::Tde, 0.0, rng);
    auto [w1, f1] = stage_matrices(d, Stage::One, SoundingMode::Tde);
    auto gains = estimate_gains(ms.stage1[0], w1, f1,
                                real.receive_steering(0, cfg.num_bs_antennas),
                                real.transmit_steering(0, cfg.num_user_antennas),
                                real.normalization, 0);
    for (int i = 0; i < cfg.num_paths; ++i) {
        Complex expected = real.paths[0][i].gain *
                           raised_cosine(-real.paths[0][i].delay, cfg.sample_interval,
                                         cfg.pulse_rolloff);
        CHECK(std::abs(gains[0](i) - expected) < 1e-10);
    }
}

TEST_CASE("estimate_gains: rank-deficient system names the user") {
    SystemConfig cfg;
    cfg.num_users = 1;
    SoundingDesign d = build_designs(cfg);
    Rng rng(39);
    ChannelRealization real = generate_realization(cfg, rng);
    MeasurementSet ms = simulate_measurements(d, real, SoundingMode::Tde, 0.0, rng);
    auto [w1, f1] = stage_matrices(d, Stage::One, SoundingMode::Tde);

    // duplicated angles make two atoms identical
    MatC a_r = steering_matrix(cfg.num_bs_antennas, {0.2, 0.2, 0.5});
    MatC a_t = steering_matrix(cfg.num_user_antennas, {0.1, 0.1, -0.3});
    try {
        estimate_gains(ms.stage1[0], w1, f1, a_r, a_t, real.normalization, 0);
        FAIL("expected an exception");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("user 0") != std::string::npos);
    }
}

TEST_CASE("estimate_gains: smooth degradation under angle perturbation") {
    SystemConfig cfg;
    cfg.num_users = 1;
    SoundingDesign d = build_designs(cfg);
    Rng rng(40);
    ChannelRealization real = test::separated_realization(cfg, rng, 0.1);
    MeasurementSet ms = simulate_measurements(d, real, SoundingMode::Tde, 0.0, rng);
    auto [w1, f1] = stage_matrices(d, Stage::One, SoundingMode::Tde);

    double previous = 0.0;
    for (double delta : {0.0, 1e-4, 1e-3}) {
        std::vector<double> aoa = real.aoa_sins(0), aod = real.aod_sins(0);
        for (auto& a : aoa) a += delta;
        for (auto& a : aod) a += delta;
        AngleEstimates angles;
        angles.aoa_sins = aoa;
        angles.aod_sins = aod;
        angles.paired = true;
        auto gains = estimate_gains(ms.stage1[0], w1, f1,
                                    steering_matrix(cfg.num_bs_antennas, aoa),
                                    steering_matrix(cfg.num_user_antennas, aod),
                                    real.normalization, 0);
        auto est = reconstruct(angles, gains, cfg.num_bs_antennas, cfg.num_user_antennas,
                               real.normalization);
        double err = nmse({est}, real);
        MESSAGE("perturbation ", delta, " -> nmse ", err);
        CHECK(err >= previous - 1e-14);
        CHECK(err < 0.05); // 1e-3 sin-domain error stays far from breakdown
        previous = err;
    }
}

TEST_CASE("reconstruct: identity round trip and rank bound") {
    SystemConfig cfg;
    cfg.num_users = 1;
    SoundingDesign d = build_designs(cfg);
    Rng rng(41);
    ChannelRealization real = test::separated_realization(cfg, rng, 0.05);

    AngleEstimates angles;
    angles.aoa_sins = real.aoa_sins(0);
    angles.aod_sins = real.aod_sins(0);
    angles.paired = true;
    std::vector<VecC> gains = real.gain_diagonals[0];
    auto est = reconstruct(angles, gains, cfg.num_bs_antennas, cfg.num_user_antennas,
                           real.normalization);
    CHECK(nmse({est}, real) < 1e-18);
    for (const auto& h : est.channels) {
        Eigen::JacobiSVD<MatC> svd(h);
        int rank = 0;
        for (int i = 0; i < svd.singularValues().size(); ++i)
            if (svd.singularValues()(i) > 1e-10 * svd.singularValues()(0)) ++rank;
        CHECK(rank <= cfg.num_paths);
    }
}

TEST_CASE("estimate_tde: end-to-end noise-free pipeline") {
    SystemConfig cfg;
    SoundingDesign d = build_designs(cfg);
    Rng rng(43);
    ChannelRealization real = test::separated_realization(cfg, rng, 0.05);
    MeasurementSet ms = simulate_measurements(d, real, SoundingMode::Tde, 0.0, rng);
    auto est = estimate_tde(ms, d, cfg);
    CHECK(nmse(est, real) < 1e-10);
    for (const auto& e : est) CHECK(e.angles.paired);
}

TEST_CASE("estimate_tde: degenerate coincident angles are flagged, not fatal") {
    SystemConfig cfg;
    cfg.num_users = 1;
    SoundingDesign d = build_designs(cfg);
    Rng rng(44);
    std::vector<std::vector<ChannelPath>> paths{{{Complex(1.0, 0.0), 0.4, 0.3, -0.5},
                                                 {Complex(0.5, 0.5), 1.1, 0.3 + 5e-7, 0.2},
                                                 {Complex(-0.3, 0.8), 2.0, -0.6, 0.7}}};
    ChannelRealization real = test::make_realization(cfg, paths);
    MeasurementSet ms = simulate_measurements(d, real, SoundingMode::Tde, 0.0, rng);
    auto est = estimate_tde(ms, d, cfg);
    CHECK(est[0].angles.degenerate);
}
