// SPDX-License-Identifier: Apache-2.0
#include "mmce/estimator_ems.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "mmce/channel.hpp"

namespace mmce {

MatC ls_path_matrix(const MatC& stage1_k0, const MatC& combiner_active,
                    const MatC& rx_steering_active, double normalization) {
    MatC lhs = combiner_active * rx_steering_active; // T3 x L
    auto cod = lhs.completeOrthogonalDecomposition();
    if (cod.rank() < lhs.cols())
        throw std::runtime_error("ls_path_matrix: combined steering matrix is rank deficient");
    return cod.solve(stage1_k0) / normalization;
}

MatC null_space_basis(const VecC& d) {
    const int n = static_cast<int>(d.size());
    if (n < 2) throw std::invalid_argument("null_space_basis: vector too short");
    if (d.norm() < 1e-300) throw std::invalid_argument("null_space_basis: zero vector");
    Eigen::HouseholderQR<MatC> qr(d);
    MatC q = qr.householderQ() * MatC::Identity(n, n);
    return q.rightCols(n - 1);
}

double aod_objective(double phi, const AodObjective& obj) {
    VecC d = obj.precoder.adjoint() * steering_vector(static_cast<int>(obj.precoder.rows()), phi);
    return (obj.basis.adjoint() * d).squaredNorm();
}

CoarseResult coarse_minimum(const AodObjective& obj, int m_antennas) {
    if (m_antennas < 2) throw std::invalid_argument("coarse_minimum: need at least 2 antennas");
    int best = 1;
    double best_val = aod_objective(-1.0, obj);
    for (int n = 2; n <= m_antennas; ++n) {
        double val = aod_objective(-1.0 + 2.0 * (n - 1) / m_antennas, obj);
        if (val < best_val) {
            best_val = val;
            best = n;
        }
    }
    // The steering response is 2-periodic in the sine, so a mainlobe at the
    // domain edge wraps; the interval is kept unclamped and the refined
    // result is wrapped back into [-1, 1).
    CoarseResult out;
    out.sector = best;
    out.lo = -1.0 + 2.0 * (best - 2) / m_antennas;
    out.hi = -1.0 + 2.0 * best / m_antennas;
    return out;
}

double wrap_to_domain(double angle_sin) {
    double w = std::fmod(angle_sin + 1.0, 2.0);
    if (w < 0.0) w += 2.0;
    return w - 1.0;
}

RefineResult refine_minimum(const AodObjective& obj, double lo, double hi, double eps) {
    if (hi < lo) std::swap(lo, hi);
    if (eps <= 0.0) throw std::invalid_argument("refine_minimum: eps must be positive");

    RefineResult out;
    while (hi - lo > eps) {
        ++out.iterations;
        double mid = 0.5 * (lo + hi);
        double h = std::max(1e-10, (hi - lo) * 1e-4);
        double df = aod_objective(mid + h, obj) - aod_objective(mid - h, obj);
        if (std::abs(df) < 1e-12) {
            // Flat central difference: fall back to three-point sectioning,
            // which also halves the bracket.
            double q1 = lo + 0.25 * (hi - lo);
            double q2 = hi - 0.25 * (hi - lo);
            double p1 = aod_objective(q1, obj);
            double pm = aod_objective(mid, obj);
            double p2 = aod_objective(q2, obj);
            if (pm <= p1 && pm <= p2) {
                lo = q1;
                hi = q2;
            } else if (p1 < p2) {
                hi = mid;
            } else {
                lo = mid;
            }
        } else if (df > 0.0) {
            hi = mid;
        } else {
            lo = mid;
        }
    }

    // Parabolic placement inside the final bracket; the bracket still
    // contains the minimizer, so the clamped vertex stays within eps of it.
    double xm = 0.5 * (lo + hi);
    double fa = aod_objective(lo, obj);
    double fm = aod_objective(xm, obj);
    double fb = aod_objective(hi, obj);
    double num = (xm - lo) * (xm - lo) * (fm - fb) - (xm - hi) * (xm - hi) * (fm - fa);
    double den = (xm - lo) * (fm - fb) - (xm - hi) * (fm - fa);
    double candidate = xm;
    if (std::abs(den) > 1e-300) candidate = xm - 0.5 * num / den;
    if (candidate < lo || candidate > hi || !std::isfinite(candidate)) candidate = xm;
    out.phi = aod_objective(candidate, obj) <= fm ? candidate : xm;
    return out;
}

std::vector<ChannelEstimate> estimate_ems(const MeasurementSet& meas, const SoundingDesign& design,
                                          const SystemConfig& cfg, const EmsOptions& opts) {
    if (meas.mode != SoundingMode::Ems)
        throw std::invalid_argument("estimate_ems: needs an EMS-mode measurement set");
    const int L = cfg.num_paths;
    const int na = cfg.num_bs_antennas;
    const int ma = cfg.num_user_antennas;
    const double gamma = std::sqrt(static_cast<double>(na) * ma / L);
    auto [w1, f1] = stage_matrices(design, Stage::One, SoundingMode::Ems);
    MatC combiner_active = design.reduced_combiner();

    std::vector<ChannelEstimate> out;
    out.reserve(meas.stage1.size());
    for (int u = 0; u < static_cast<int>(meas.stage1.size()); ++u) {
        EspritResult aoa =
            esprit_shift_invariance(meas.stage1[u][0], meas.stage2[u], L, opts.esprit);
        MatC a_r = steering_matrix(na, aoa.angles);
        MatC d_hat = ls_path_matrix(meas.stage1[u][0], combiner_active, a_r.topRows(na - 1),
                                    gamma);

        AngleEstimates angles;
        angles.aoa_sins = aoa.angles;
        angles.rank_warning = aoa.rank_warning;
        angles.aod_sins.resize(L);
        for (int i = 0; i < L; ++i) {
            AodObjective obj{null_space_basis(d_hat.row(i).adjoint()), f1};
            CoarseResult coarse = coarse_minimum(obj, ma);
            angles.aod_sins[i] =
                wrap_to_domain(refine_minimum(obj, coarse.lo, coarse.hi, opts.epsilon).phi);
        }
        angles.paired = true; // each AoD inherits its path's AoA index

        auto wrap_gap = [](double a, double b) {
            double g = std::fmod(std::abs(a - b), 2.0);
            return std::min(g, 2.0 - g);
        };
        for (int i = 0; i < L && !angles.mainlobe_collision; ++i)
            for (int j = i + 1; j < L; ++j)
                if (wrap_gap(angles.aod_sins[i], angles.aod_sins[j]) < 4.0 / ma)
                    angles.mainlobe_collision = true;
        for (int i = 0; i < L && !angles.degenerate; ++i)
            for (int j = i + 1; j < L; ++j)
                if (wrap_gap(angles.aoa_sins[i], angles.aoa_sins[j]) < 1e-6 ||
                    wrap_gap(angles.aod_sins[i], angles.aod_sins[j]) < 1e-6)
                    angles.degenerate = true;

        if (opts.repair_pass) {
            MatC coupling = coupling_matrix(meas.stage1[u][0], w1, f1, steering_matrix(na, angles.aoa_sins),
                                            steering_matrix(ma, angles.aod_sins), gamma);
            AngleEstimates repaired = pair_angles(angles.aoa_sins, angles.aod_sins, coupling);
            repaired.rank_warning = angles.rank_warning;
            repaired.mainlobe_collision = angles.mainlobe_collision;
            angles = repaired;
        }

        MatC a_t = steering_matrix(ma, angles.aod_sins);
        auto gains = estimate_gains(meas.stage1[u], w1, f1, steering_matrix(na, angles.aoa_sins),
                                    a_t, gamma, u);
        out.push_back(reconstruct(angles, gains, na, ma, gamma));
    }
    return out;
}

} // namespace mmce
