// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: run Monte-Carlo sweeps, export sounding codebooks,
// or replay serialized measurements through the estimators.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mmce/baselines.hpp"
#include "mmce/beam_design.hpp"
#include "mmce/channel.hpp"
#include "mmce/estimator_ems.hpp"
#include "mmce/estimator_tde.hpp"
#include "mmce/harness.hpp"
#include "mmce/metrics.hpp"
#include "mmce/serialize.hpp"
#include "mmce/sounding.hpp"

namespace {

mmce::ChannelRealization truth_from_dump(const mmce::MeasurementDump& dump) {
    // Rebuild just enough of a realization for scoring: the stored
    // per-subcarrier matrices.
    mmce::ChannelRealization truth;
    truth.paths.resize(dump.truth.size());
    truth.subcarrier_matrices = dump.truth;
    return truth;
}

int run_command(const std::string& config_path, std::vector<double> snr_override,
                std::vector<std::string> scheme_override, int trials_override,
                std::int64_t seed_override, const std::string& out_override,
                int threads_override, const std::string& dump_path) {
    mmce::ExperimentSpec spec = mmce::load_spec(config_path);
    if (!snr_override.empty()) {
        spec.snr_db_sweep = snr_override;
        spec.pilot_sweep.clear();
    }
    if (!scheme_override.empty()) {
        spec.schemes.clear();
        for (const auto& s : scheme_override) spec.schemes.push_back(mmce::scheme_from_name(s));
    }
    if (trials_override > 0) spec.trials = trials_override;
    if (seed_override >= 0) spec.seed = static_cast<std::uint64_t>(seed_override);
    if (!out_override.empty()) spec.out = out_override;
    if (threads_override > 0) spec.threads = threads_override;
    spec.validate();

    if (!dump_path.empty()) {
        // Serialize the first trial of the first sweep point for replay.
        mmce::SystemConfig cfg = spec.config;
        double snr_db;
        if (!spec.pilot_sweep.empty()) {
            cfg.t1 = cfg.t2 = spec.pilot_sweep.front();
            snr_db = spec.pilot_sweep_snr_db;
        } else {
            snr_db = spec.snr_db_sweep.front();
        }
        mmce::SoundingDesign design = mmce::build_designs(cfg);
        mmce::Rng rng = mmce::Rng::child(spec.seed, 0, 0);
        mmce::ChannelRealization truth = mmce::generate_realization(cfg, rng);
        mmce::MeasurementDump dump;
        dump.config = cfg;
        dump.snr_db = snr_db;
        dump.noise_variance =
            mmce::noise_variance_for_snr(design, truth, mmce::SoundingMode::Tde, snr_db);
        dump.tde = mmce::simulate_measurements(design, truth, mmce::SoundingMode::Tde,
                                               dump.noise_variance, rng);
        double sigma2_ems =
            mmce::noise_variance_for_snr(design, truth, mmce::SoundingMode::Ems, snr_db);
        dump.ems =
            mmce::simulate_measurements(design, truth, mmce::SoundingMode::Ems, sigma2_ems, rng);
        dump.tde.snr_db = dump.ems.snr_db = snr_db;
        dump.truth = truth.subcarrier_matrices;
        mmce::save_measurement_dump(dump, dump_path);
        std::printf("wrote measurement dump to %s\n", dump_path.c_str());
    }

    auto records = mmce::run_experiment(spec);
    std::printf("scheme  sweep      nmse          se       slots   wall_ms  failed\n");
    for (const auto& r : records)
        std::printf("%-6s %7.3g  %12.5g %9.4g %8lld %9.1f %7d\n", mmce::scheme_name(r.scheme).c_str(),
                    r.sweep_value, r.nmse, r.se, r.pilot_slots, r.wall_ms, r.failed_trials);
    if (!spec.out.empty()) {
        mmce::write_results(records, spec.out);
        std::printf("results written to %s.{csv,json} (timing in %s.timing.csv)\n",
                    spec.out.c_str(), spec.out.c_str());
    }
    return 0;
}

int design_command(const std::string& config_path, const std::string& out_stem) {
    mmce::SystemConfig cfg;
    if (!config_path.empty()) {
        std::ifstream f(config_path);
        if (!f) {
            std::fprintf(stderr, "cannot open %s\n", config_path.c_str());
            return 1;
        }
        std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
        // Accept either a bare config or a full experiment spec.
        try {
            cfg = mmce::config_from_json_text(text);
        } catch (const std::exception&) {
            cfg = mmce::spec_from_json_text(text).config;
        }
    }
    mmce::SoundingDesign design = mmce::build_designs(cfg);
    mmce::export_design(design, cfg, out_stem);

    auto wrep = mmce::flatness_report(design.combiner, cfg.num_bs_antennas);
    auto frep = mmce::flatness_report(design.precoder.adjoint(), cfg.num_user_antennas);
    std::printf("combiner: %dx%d  phase slope %.6f  ||W||_F = %.12f\n",
                static_cast<int>(design.combiner.rows()),
                static_cast<int>(design.combiner.cols()), design.combiner_phase_slope,
                design.combiner.norm());
    std::printf("  beam gain over %d-point grid: min %.4e  max %.4e  max/min %.3f\n",
                wrep.grid_points, wrep.min_gain, wrep.max_gain, wrep.max_gain / wrep.min_gain);
    std::printf("precoder: %dx%d  phase slope %.6f  ||F||_F = %.12f\n",
                static_cast<int>(design.precoder.rows()),
                static_cast<int>(design.precoder.cols()), design.precoder_phase_slope,
                design.precoder.norm());
    std::printf("  beam gain over %d-point grid: min %.4e  max %.4e  max/min %.3f\n",
                frep.grid_points, frep.min_gain, frep.max_gain, frep.max_gain / frep.min_gain);
    std::printf("codebooks written to %s_combiner.csv, %s_precoder.csv, %s.json\n",
                out_stem.c_str(), out_stem.c_str(), out_stem.c_str());
    return 0;
}

int estimate_command(const std::string& in_path, std::vector<std::string> scheme_names,
                     const std::string& out_path) {
    mmce::MeasurementDump dump = mmce::load_measurement_dump(in_path);
    mmce::SystemConfig cfg = dump.config;
    mmce::SoundingDesign design = mmce::build_designs(cfg);
    mmce::ChannelRealization truth = truth_from_dump(dump);

    if (scheme_names.empty()) scheme_names = {"tde", "ems", "omp"};
    nlohmann::json out_json;
    for (const auto& name : scheme_names) {
        mmce::Scheme s = mmce::scheme_from_name(name);
        std::vector<mmce::ChannelEstimate> est;
        if (s == mmce::Scheme::Tde) {
            est = mmce::estimate_tde(dump.tde, design, cfg);
        } else if (s == mmce::Scheme::Ems) {
            est = mmce::estimate_ems(dump.ems, design, cfg);
        } else {
            auto dict = mmce::build_dictionary(design, cfg, 90, 90);
            est = mmce::omp_estimate(dump.ems, dict, design, cfg, cfg.num_paths);
        }
        double e = mmce::nmse(est, truth);
        std::printf("%-4s nmse = %.6g\n", name.c_str(), e);
        nlohmann::json per_scheme;
        per_scheme["nmse"] = e;
        nlohmann::json users = nlohmann::json::array();
        for (const auto& ue : est) {
            nlohmann::json ju;
            ju["aoa_sins"] = ue.angles.aoa_sins;
            ju["aod_sins"] = ue.angles.aod_sins;
            ju["rank_warning"] = ue.angles.rank_warning;
            ju["degenerate"] = ue.angles.degenerate;
            ju["mainlobe_collision"] = ue.angles.mainlobe_collision;
            users.push_back(std::move(ju));
        }
        per_scheme["users"] = std::move(users);
        out_json[name] = std::move(per_scheme);
    }
    if (!out_path.empty()) {
        std::ofstream f(out_path, std::ios::binary);
        f << out_json.dump(2) << "\n";
        std::printf("per-scheme estimates written to %s\n", out_path.c_str());
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"mmWave massive-MIMO channel estimation toolkit"};
    app.require_subcommand(1);

    std::string config_path, out_path, in_path, dump_path;
    std::vector<double> snr_list;
    std::vector<std::string> scheme_list;
    int trials = -1, threads = -1;
    std::int64_t seed = -1;

    auto* run = app.add_subcommand("run", "run a Monte-Carlo experiment from a spec file");
    run->add_option("--config", config_path, "experiment spec JSON")->required();
    run->add_option("--seed", seed, "override the spec seed");
    run->add_option("--snr-db", snr_list, "override the SNR sweep (dB values)");
    run->add_option("--schemes", scheme_list, "subset of tde,ems,omp");
    run->add_option("--trials", trials, "override the trial count");
    run->add_option("--out", out_path, "output path stem");
    run->add_option("--threads", threads, "worker threads");
    run->add_option("--dump-measurements", dump_path,
                    "serialize the first trial's measurements for replay");

    auto* design = app.add_subcommand("design", "emit sounding codebooks and a flatness report");
    design->add_option("--config", config_path, "config or spec JSON (defaults used if omitted)");
    std::string design_out = "design";
    design->add_option("--out", design_out, "output stem");

    auto* estimate = app.add_subcommand("estimate", "replay serialized measurements");
    estimate->add_option("--in", in_path, "measurement dump")->required();
    estimate->add_option("--schemes", scheme_list, "subset of tde,ems,omp");
    estimate->add_option("--out", out_path, "write per-scheme NMSE JSON here");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed())
            return run_command(config_path, snr_list, scheme_list, trials, seed, out_path,
                               threads, dump_path);
        if (design->parsed()) return design_command(config_path, design_out);
        if (estimate->parsed()) return estimate_command(in_path, scheme_list, out_path);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
