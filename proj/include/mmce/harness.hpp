// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mmce/config.hpp"
#include "mmce/types.hpp"

namespace mmce {

enum class Scheme { Tde, Ems, Omp };

std::string scheme_name(Scheme s);
Scheme scheme_from_name(const std::string& name);

/// Monte-Carlo experiment description. Exactly one of `snr_db_sweep` or
/// `pilot_sweep` must be nonempty; the pilot sweep sets t1 = t2 to each value
/// while holding the SNR at `pilot_sweep_snr_db`.
struct ExperimentSpec {
    SystemConfig config;
    std::vector<double> snr_db_sweep;
    std::vector<int> pilot_sweep;
    double pilot_sweep_snr_db = 10.0;
    std::vector<Scheme> schemes{Scheme::Tde, Scheme::Ems, Scheme::Omp};
    int trials = 200;
    std::uint64_t seed = 1;
    int threads = 1;
    int grid_rx = 90; ///< baseline dictionary grid sizes
    int grid_tx = 90;
    double ems_epsilon = 1e-3;
    std::string out; ///< output path stem, empty = no files

    void validate() const;
};

struct ResultRecord {
    Scheme scheme = Scheme::Tde;
    double sweep_value = 0.0;
    double nmse = 0.0;
    double se = 0.0;
    long long pilot_slots = 0;
    double wall_ms = 0.0; ///< measured; kept out of the deterministic files
    int failed_trials = 0;
};

/// Run the full sweep. Trials are dispatched across `threads` workers with
/// per-trial derived seeds, so results are identical for any thread count.
/// Per-trial estimation errors are counted, not fatal.
std::vector<ResultRecord> run_experiment(const ExperimentSpec& spec);

/// Deterministic result emission: <stem>.csv and <stem>.json carry
/// (scheme, sweep_value, nmse, se, pilot_slots); measured wall times go to
/// <stem>.timing.csv, which is excluded from the determinism contract.
void write_results(const std::vector<ResultRecord>& records, const std::string& stem);

std::string results_csv(const std::vector<ResultRecord>& records);
std::string results_json(const std::vector<ResultRecord>& records);

} // namespace mmce
