// SPDX-License-Identifier: Apache-2.0
#include "mmce/beam_design.hpp"

#include <cmath>
#include <stdexcept>

#include "mmce/channel.hpp"

namespace mmce {

namespace {

// (exp(j*x*hi) - exp(j*x*lo)) / (j*x), stable through x = 0 where it tends
// to hi - lo. Written as exp(j*x*c) * 2*sin(x*h)/x with c the interval center
// and h the half width.
Complex phased_sinc(double x, double lo, double hi) {
    const double c = 0.5 * (lo + hi);
    const double h = 0.5 * (hi - lo);
    double amp = std::abs(x) < 1e-12 ? 2.0 * h : 2.0 * std::sin(x * h) / x;
    return Complex(std::cos(x * c), std::sin(x * c)) * amp;
}

int numeric_rank(const MatC& m) {
    Eigen::JacobiSVD<MatC> svd(m);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0) return 0;
    double tol = sv(0) * std::max(m.rows(), m.cols()) * 1e-12;
    int r = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > tol) ++r;
    return r;
}

} // namespace

std::pair<double, double> sector_interval(int sector, int n_sectors) {
    if (sector < 1 || sector > n_sectors)
        throw std::invalid_argument("sector_interval: sector index out of range");
    double lo = -1.0 + 2.0 * (sector - 1) / n_sectors;
    double hi = -1.0 + 2.0 * sector / n_sectors;
    return {lo, hi};
}

VecC row_closed_form(int sector, double phase_slope, int n_antennas, int n_sectors) {
    auto [lo, hi] = sector_interval(sector, n_sectors);
    const double scale = 0.5 * std::sqrt(static_cast<double>(n_antennas));
    VecC w(n_antennas);
    for (int m = 0; m < n_antennas; ++m) w(m) = scale * phased_sinc(m * kPi - phase_slope, lo, hi);
    return w;
}

MatC sector_gram(int sector, int n_antennas, int n_sectors) {
    auto [lo, hi] = sector_interval(sector, n_sectors);
    MatC x(n_antennas, n_antennas);
    for (int m = 0; m < n_antennas; ++m)
        for (int l = 0; l < n_antennas; ++l)
            x(m, l) = phased_sinc((m - l) * kPi, lo, hi) / static_cast<double>(n_antennas);
    return x;
}

double power_ratio(double phase_slope, int sector, int n_antennas, int n_sectors) {
    VecC w = row_closed_form(sector, phase_slope, n_antennas, n_sectors);
    MatC x = sector_gram(sector, n_antennas, n_sectors);
    double num = std::real(Complex(w.adjoint() * x * w));
    double den = 2.0 / n_antennas * w.squaredNorm();
    return num / den;
}

double search_phase_slope(int n_antennas, int n_sectors, int n_samples) {
    if (n_samples < 2) throw std::invalid_argument("search_phase_slope: need at least 2 samples");
    // The gram matrix is sector-independent up to a phase that cancels in the
    // ratio, so the search is done once on the first sector.
    MatC x = sector_gram(1, n_antennas, n_sectors);
    const double lo_bound = (n_antennas - 1) * kPi / 2.0;
    const double span = lo_bound + n_sectors * kPi;
    double best_a = lo_bound;
    double best_s = -1.0;
    for (int n = 1; n <= n_samples; ++n) {
        double a = lo_bound + span * (n - 1) / n_samples;
        VecC w = row_closed_form(1, a, n_antennas, n_sectors);
        double s = std::real(Complex(w.adjoint() * x * w)) /
                   (2.0 / n_antennas * w.squaredNorm());
        if (s > best_s) {
            best_s = s;
            best_a = a;
        }
    }
    return best_a;
}

SoundingDesign build_designs(const SystemConfig& cfg, const BeamDesignOptions& opts) {
    cfg.validate();
    const int na = cfg.num_bs_antennas;
    const int ma = cfg.num_user_antennas;
    const int t3 = cfg.t3();
    const int t1 = cfg.t1;

    SoundingDesign d;
    d.num_bs_rf = cfg.num_bs_rf;
    d.combiner_phase_slope = search_phase_slope(na, t3, opts.search_samples);
    d.precoder_phase_slope = search_phase_slope(ma, t1, opts.search_samples);

    d.combiner = MatC(t3, na);
    for (int n = 1; n <= t3; ++n) {
        VecC w = row_closed_form(n, d.combiner_phase_slope, na, t3);
        d.combiner.row(n - 1) = (w / (w.norm() * std::sqrt(static_cast<double>(t3)))).adjoint();
    }
    d.combiner /= d.combiner.norm();

    d.precoder = MatC(ma, t1);
    for (int n = 1; n <= t1; ++n) {
        VecC f = row_closed_form(n, d.precoder_phase_slope, ma, t1);
        d.precoder.col(n - 1) = f / (f.norm() * std::sqrt(static_cast<double>(t1)));
    }
    d.precoder /= d.precoder.norm();

    MatC wr = d.combiner.leftCols(na - 1);
    d.combiner_mask_last = MatC::Zero(t3, na);
    d.combiner_mask_last.leftCols(na - 1) = wr;
    d.combiner_mask_first = MatC::Zero(t3, na);
    d.combiner_mask_first.rightCols(na - 1) = wr;

    MatC fr = d.precoder.topRows(ma - 1);
    d.precoder_mask_last = MatC::Zero(ma, t1);
    d.precoder_mask_last.topRows(ma - 1) = fr;
    d.precoder_mask_first = MatC::Zero(ma, t1);
    d.precoder_mask_first.bottomRows(ma - 1) = fr;

    if (numeric_rank(wr) < t3)
        throw std::runtime_error("build_designs: masked combiner lost full row rank");
    if (numeric_rank(fr) < t1)
        throw std::runtime_error("build_designs: masked precoder lost full column rank");
    return d;
}

FlatnessReport flatness_report(const MatC& rows_matrix, int n_antennas, int grid_points) {
    FlatnessReport rep;
    rep.grid_points = grid_points;
    double sum = 0.0;
    for (int g = 0; g < grid_points; ++g) {
        double theta = -1.0 + 2.0 * g / grid_points;
        double gain = (rows_matrix * steering_vector(n_antennas, theta)).squaredNorm();
        if (g == 0) rep.min_gain = rep.max_gain = gain;
        rep.min_gain = std::min(rep.min_gain, gain);
        rep.max_gain = std::max(rep.max_gain, gain);
        sum += gain;
    }
    rep.mean_gain = sum / grid_points;
    return rep;
}

} // namespace mmce
