// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "mmce/beam_design.hpp"
#include "mmce/channel.hpp"
#include "mmce/config.hpp"
#include "mmce/harness.hpp"
#include "mmce/sounding.hpp"

namespace mmce {

/// Config / experiment-spec files are flat JSON key-value documents; unknown
/// keys are rejected to catch typos.
SystemConfig config_from_json_text(const std::string& text);
ExperimentSpec spec_from_json_text(const std::string& text);
ExperimentSpec load_spec(const std::string& path);
std::string spec_to_json_text(const ExperimentSpec& spec);

/// Codebook export for inspection: complex entries as re/im pairs.
std::string codebook_csv(const MatC& m);
void export_design(const SoundingDesign& design, const SystemConfig& cfg,
                   const std::string& stem);

/// Measurement dump for estimator-only reruns: configuration, noise level,
/// both sounding modes' measurement sets and the ground-truth subcarrier
/// channels.
struct MeasurementDump {
    SystemConfig config;
    double snr_db = 0.0;
    double noise_variance = 0.0;
    MeasurementSet tde;
    MeasurementSet ems;
    std::vector<std::vector<MatC>> truth; ///< [user][k]
};

void save_measurement_dump(const MeasurementDump& dump, const std::string& path);
MeasurementDump load_measurement_dump(const std::string& path);

} // namespace mmce
