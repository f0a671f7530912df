// SPDX-License-Identifier: Apache-2.0
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mmce/baselines.hpp"
#include "mmce/beam_design.hpp"
#include "mmce/channel.hpp"
#include "mmce/estimator_ems.hpp"
#include "mmce/estimator_tde.hpp"
#include "mmce/harness.hpp"
#include "mmce/metrics.hpp"
#include "mmce/serialize.hpp"
#include "mmce/sounding.hpp"

namespace py = pybind11;
using namespace mmce;

PYBIND11_MODULE(_mmce, m) {
    m.doc() = "mmWave massive-MIMO OFDM channel simulation and estimation";

    py::class_<SystemConfig>(m, "SystemConfig")
        .def(py::init<>())
        .def_readwrite("num_bs_antennas", &SystemConfig::num_bs_antennas)
        .def_readwrite("num_user_antennas", &SystemConfig::num_user_antennas)
        .def_readwrite("num_bs_rf", &SystemConfig::num_bs_rf)
        .def_readwrite("num_user_rf", &SystemConfig::num_user_rf)
        .def_readwrite("num_users", &SystemConfig::num_users)
        .def_readwrite("num_subcarriers", &SystemConfig::num_subcarriers)
        .def_readwrite("num_taps", &SystemConfig::num_taps)
        .def_readwrite("num_paths", &SystemConfig::num_paths)
        .def_readwrite("t1", &SystemConfig::t1)
        .def_readwrite("t2", &SystemConfig::t2)
        .def_readwrite("noise_variance", &SystemConfig::noise_variance)
        .def_readwrite("sample_interval", &SystemConfig::sample_interval)
        .def_readwrite("max_delay_spread", &SystemConfig::max_delay_spread)
        .def_readwrite("pulse_rolloff", &SystemConfig::pulse_rolloff)
        .def_readwrite("rng_seed", &SystemConfig::rng_seed)
        .def_property_readonly("t3", &SystemConfig::t3)
        .def("validate", &SystemConfig::validate);

    py::class_<ChannelPath>(m, "ChannelPath")
        .def_readonly("gain", &ChannelPath::gain)
        .def_readonly("delay", &ChannelPath::delay)
        .def_readonly("aoa_sin", &ChannelPath::aoa_sin)
        .def_readonly("aod_sin", &ChannelPath::aod_sin);

    py::class_<ChannelRealization>(m, "ChannelRealization")
        .def_readonly("paths", &ChannelRealization::paths)
        .def_readonly("tap_matrices", &ChannelRealization::tap_matrices)
        .def_readonly("subcarrier_matrices", &ChannelRealization::subcarrier_matrices)
        .def_readonly("gain_diagonals", &ChannelRealization::gain_diagonals)
        .def_readonly("normalization", &ChannelRealization::normalization)
        .def_property_readonly("num_users", &ChannelRealization::num_users);

    py::class_<SoundingDesign>(m, "SoundingDesign")
        .def_readonly("combiner", &SoundingDesign::combiner)
        .def_readonly("precoder", &SoundingDesign::precoder)
        .def_readonly("combiner_phase_slope", &SoundingDesign::combiner_phase_slope)
        .def_readonly("precoder_phase_slope", &SoundingDesign::precoder_phase_slope)
        .def_readonly("combiner_mask_last", &SoundingDesign::combiner_mask_last)
        .def_readonly("combiner_mask_first", &SoundingDesign::combiner_mask_first)
        .def_readonly("precoder_mask_last", &SoundingDesign::precoder_mask_last)
        .def_readonly("precoder_mask_first", &SoundingDesign::precoder_mask_first);

    py::enum_<SoundingMode>(m, "SoundingMode")
        .value("TDE", SoundingMode::Tde)
        .value("EMS", SoundingMode::Ems);

    py::class_<MeasurementSet>(m, "MeasurementSet")
        .def_readonly("mode", &MeasurementSet::mode)
        .def_readonly("stage1", &MeasurementSet::stage1)
        .def_readonly("stage2", &MeasurementSet::stage2)
        .def_readonly("stage3", &MeasurementSet::stage3)
        .def_readonly("noise_variance", &MeasurementSet::noise_variance);

    py::class_<AngleEstimates>(m, "AngleEstimates")
        .def_readonly("aoa_sins", &AngleEstimates::aoa_sins)
        .def_readonly("aod_sins", &AngleEstimates::aod_sins)
        .def_readonly("paired", &AngleEstimates::paired)
        .def_readonly("rank_warning", &AngleEstimates::rank_warning)
        .def_readonly("degenerate", &AngleEstimates::degenerate)
        .def_readonly("mainlobe_collision", &AngleEstimates::mainlobe_collision);

    py::class_<ChannelEstimate>(m, "ChannelEstimate")
        .def_readonly("angles", &ChannelEstimate::angles)
        .def_readonly("gains", &ChannelEstimate::gains)
        .def_readonly("channels", &ChannelEstimate::channels);

    m.def("steering_vector", &steering_vector, py::arg("n_antennas"), py::arg("angle_sin"));
    m.def("raised_cosine", &raised_cosine, py::arg("t"), py::arg("sample_interval"),
          py::arg("rolloff"));
    m.def("subcarrier_from_taps", &subcarrier_from_taps, py::arg("taps"),
          py::arg("num_subcarriers"));
    m.def(
        "generate_realization",
        [](const SystemConfig& cfg, std::uint64_t seed) {
            Rng rng(seed);
            return generate_realization(cfg, rng);
        },
        py::arg("config"), py::arg("seed"));

    m.def("row_closed_form", &row_closed_form, py::arg("sector"), py::arg("phase_slope"),
          py::arg("n_antennas"), py::arg("n_sectors"));
    m.def("power_ratio", &power_ratio, py::arg("phase_slope"), py::arg("sector"),
          py::arg("n_antennas"), py::arg("n_sectors"));
    m.def("search_phase_slope", &search_phase_slope, py::arg("n_antennas"), py::arg("n_sectors"),
          py::arg("n_samples") = 1000);
    m.def(
        "build_designs", [](const SystemConfig& cfg) { return build_designs(cfg); },
        py::arg("config"));

    m.def(
        "simulate_measurements",
        [](const SoundingDesign& design, const ChannelRealization& realization, SoundingMode mode,
           double noise_variance, std::uint64_t seed) {
            Rng rng(seed);
            return simulate_measurements(design, realization, mode, noise_variance, rng);
        },
        py::arg("design"), py::arg("realization"), py::arg("mode"), py::arg("noise_variance"),
        py::arg("seed"));
    m.def("noise_variance_for_snr", &noise_variance_for_snr, py::arg("design"),
          py::arg("realization"), py::arg("mode"), py::arg("snr_db"));

    m.def(
        "estimate_tde",
        [](const MeasurementSet& meas, const SoundingDesign& design, const SystemConfig& cfg) {
            return estimate_tde(meas, design, cfg);
        },
        py::arg("measurements"), py::arg("design"), py::arg("config"));
    m.def(
        "estimate_ems",
        [](const MeasurementSet& meas, const SoundingDesign& design, const SystemConfig& cfg,
           double epsilon) {
            EmsOptions opts;
            opts.epsilon = epsilon;
            return estimate_ems(meas, design, cfg, opts);
        },
        py::arg("measurements"), py::arg("design"), py::arg("config"),
        py::arg("epsilon") = 1e-3);
    m.def(
        "omp_estimate",
        [](const MeasurementSet& meas, const SoundingDesign& design, const SystemConfig& cfg,
           int grid_rx, int grid_tx) {
            auto dict = build_dictionary(design, cfg, grid_rx, grid_tx);
            return omp_estimate(meas, dict, design, cfg, cfg.num_paths);
        },
        py::arg("measurements"), py::arg("design"), py::arg("config"), py::arg("grid_rx") = 90,
        py::arg("grid_tx") = 90);

    m.def("nmse", &nmse, py::arg("estimates"), py::arg("truth"));
    m.def("spectral_efficiency", &spectral_efficiency, py::arg("estimates"), py::arg("truth"),
          py::arg("config"), py::arg("snr_linear"));

    m.def(
        "run_experiment_json",
        [](const std::string& spec_json) {
            auto spec = spec_from_json_text(spec_json);
            auto records = run_experiment(spec);
            if (!spec.out.empty()) write_results(records, spec.out);
            return results_json(records);
        },
        py::arg("spec_json"),
        "Run an experiment described by a JSON spec string; returns the result JSON.");
}
