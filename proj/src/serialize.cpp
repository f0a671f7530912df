// SPDX-License-Identifier: Apache-2.0
#include "mmce/serialize.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace mmce {

namespace {

using nlohmann::json;

json matrix_to_json(const MatC& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            row.push_back({m(r, c).real(), m(r, c).imag()});
        rows.push_back(std::move(row));
    }
    return rows;
}

MatC matrix_from_json(const json& rows) {
    const int nr = static_cast<int>(rows.size());
    const int nc = nr > 0 ? static_cast<int>(rows[0].size()) : 0;
    MatC m(nr, nc);
    for (int r = 0; r < nr; ++r)
        for (int c = 0; c < nc; ++c)
            m(r, c) = Complex(rows[r][c][0].get<double>(), rows[r][c][1].get<double>());
    return m;
}

void apply_config_key(SystemConfig& cfg, const std::string& key, const json& v) {
    if (key == "num_bs_antennas") cfg.num_bs_antennas = v.get<int>();
    else if (key == "num_user_antennas") cfg.num_user_antennas = v.get<int>();
    else if (key == "num_bs_rf") cfg.num_bs_rf = v.get<int>();
    else if (key == "num_user_rf") cfg.num_user_rf = v.get<int>();
    else if (key == "num_users") cfg.num_users = v.get<int>();
    else if (key == "num_subcarriers") cfg.num_subcarriers = v.get<int>();
    else if (key == "num_taps") cfg.num_taps = v.get<int>();
    else if (key == "num_paths") cfg.num_paths = v.get<int>();
    else if (key == "t1") cfg.t1 = v.get<int>();
    else if (key == "t2") cfg.t2 = v.get<int>();
    else if (key == "noise_variance") cfg.noise_variance = v.get<double>();
    else if (key == "sample_interval") cfg.sample_interval = v.get<double>();
    else if (key == "max_delay_spread") cfg.max_delay_spread = v.get<double>();
    else if (key == "pulse_rolloff") cfg.pulse_rolloff = v.get<double>();
    else if (key == "rng_seed") cfg.rng_seed = v.get<std::uint64_t>();
    else throw std::invalid_argument("unknown config key: " + key);
}

json config_to_json(const SystemConfig& cfg) {
    json j;
    j["num_bs_antennas"] = cfg.num_bs_antennas;
    j["num_user_antennas"] = cfg.num_user_antennas;
    j["num_bs_rf"] = cfg.num_bs_rf;
    j["num_user_rf"] = cfg.num_user_rf;
    j["num_users"] = cfg.num_users;
    j["num_subcarriers"] = cfg.num_subcarriers;
    j["num_taps"] = cfg.num_taps;
    j["num_paths"] = cfg.num_paths;
    j["t1"] = cfg.t1;
    j["t2"] = cfg.t2;
    j["noise_variance"] = cfg.noise_variance;
    j["sample_interval"] = cfg.sample_interval;
    j["max_delay_spread"] = cfg.max_delay_spread;
    j["pulse_rolloff"] = cfg.pulse_rolloff;
    j["rng_seed"] = cfg.rng_seed;
    return j;
}

SystemConfig config_from_json(const json& j) {
    SystemConfig cfg;
    for (auto it = j.begin(); it != j.end(); ++it) apply_config_key(cfg, it.key(), it.value());
    cfg.validate();
    return cfg;
}

json measurement_set_to_json(const MeasurementSet& ms) {
    json j;
    j["mode"] = ms.mode == SoundingMode::Tde ? "tde" : "ems";
    j["noise_variance"] = ms.noise_variance;
    j["snr_db"] = ms.snr_db;
    json s1 = json::array();
    for (const auto& user : ms.stage1) {
        json per_k = json::array();
        for (const auto& m : user) per_k.push_back(matrix_to_json(m));
        s1.push_back(std::move(per_k));
    }
    j["stage1"] = std::move(s1);
    json s2 = json::array();
    for (const auto& m : ms.stage2) s2.push_back(matrix_to_json(m));
    j["stage2"] = std::move(s2);
    json s3 = json::array();
    for (const auto& m : ms.stage3) s3.push_back(matrix_to_json(m));
    j["stage3"] = std::move(s3);
    return j;
}

MeasurementSet measurement_set_from_json(const json& j) {
    MeasurementSet ms;
    ms.mode = j.at("mode").get<std::string>() == "tde" ? SoundingMode::Tde : SoundingMode::Ems;
    ms.noise_variance = j.at("noise_variance").get<double>();
    ms.snr_db = j.value("snr_db", 0.0);
    for (const auto& user : j.at("stage1")) {
        std::vector<MatC> per_k;
        for (const auto& m : user) per_k.push_back(matrix_from_json(m));
        ms.stage1.push_back(std::move(per_k));
    }
    for (const auto& m : j.at("stage2")) ms.stage2.push_back(matrix_from_json(m));
    for (const auto& m : j.at("stage3")) ms.stage3.push_back(matrix_from_json(m));
    return ms;
}

} // namespace

SystemConfig config_from_json_text(const std::string& text) {
    return config_from_json(json::parse(text));
}

ExperimentSpec spec_from_json_text(const std::string& text) {
    json j = json::parse(text);
    ExperimentSpec spec;
    spec.schemes.clear();
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& key = it.key();
        const json& v = it.value();
        if (key == "config") spec.config = config_from_json(v);
        else if (key == "snr_db_sweep") spec.snr_db_sweep = v.get<std::vector<double>>();
        else if (key == "pilot_sweep") spec.pilot_sweep = v.get<std::vector<int>>();
        else if (key == "pilot_sweep_snr_db") spec.pilot_sweep_snr_db = v.get<double>();
        else if (key == "schemes") {
            for (const auto& s : v) spec.schemes.push_back(scheme_from_name(s.get<std::string>()));
        } else if (key == "trials") spec.trials = v.get<int>();
        else if (key == "seed") spec.seed = v.get<std::uint64_t>();
        else if (key == "threads") spec.threads = v.get<int>();
        else if (key == "grid_rx") spec.grid_rx = v.get<int>();
        else if (key == "grid_tx") spec.grid_tx = v.get<int>();
        else if (key == "ems_epsilon") spec.ems_epsilon = v.get<double>();
        else if (key == "out") spec.out = v.get<std::string>();
        else throw std::invalid_argument("unknown experiment key: " + key);
    }
    if (spec.schemes.empty())
        spec.schemes = {Scheme::Tde, Scheme::Ems, Scheme::Omp};
    return spec;
}

ExperimentSpec load_spec(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open spec file: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return spec_from_json_text(ss.str());
}

std::string spec_to_json_text(const ExperimentSpec& spec) {
    json j;
    j["config"] = config_to_json(spec.config);
    j["snr_db_sweep"] = spec.snr_db_sweep;
    j["pilot_sweep"] = spec.pilot_sweep;
    j["pilot_sweep_snr_db"] = spec.pilot_sweep_snr_db;
    json schemes = json::array();
    for (auto s : spec.schemes) schemes.push_back(scheme_name(s));
    j["schemes"] = std::move(schemes);
    j["trials"] = spec.trials;
    j["seed"] = spec.seed;
    j["threads"] = spec.threads;
    j["grid_rx"] = spec.grid_rx;
    j["grid_tx"] = spec.grid_tx;
    j["ems_epsilon"] = spec.ems_epsilon;
    j["out"] = spec.out;
    return j.dump(2) + "\n";
}

std::string codebook_csv(const MatC& m) {
    std::string out;
    char buf[96];
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            std::snprintf(buf, sizeof(buf), c == 0 ? "%.17g,%.17g" : ",%.17g,%.17g",
                          m(r, c).real(), m(r, c).imag());
            out += buf;
        }
        out += '\n';
    }
    return out;
}

void export_design(const SoundingDesign& design, const SystemConfig& cfg,
                   const std::string& stem) {
    {
        std::ofstream f(stem + "_combiner.csv", std::ios::binary);
        if (!f) throw std::runtime_error("cannot open " + stem + "_combiner.csv");
        f << codebook_csv(design.combiner);
    }
    {
        std::ofstream f(stem + "_precoder.csv", std::ios::binary);
        f << codebook_csv(design.precoder);
    }
    FlatnessReport wrep = flatness_report(design.combiner, cfg.num_bs_antennas);
    FlatnessReport frep = flatness_report(design.precoder.adjoint(), cfg.num_user_antennas);
    json j;
    j["combiner"] = matrix_to_json(design.combiner);
    j["precoder"] = matrix_to_json(design.precoder);
    j["combiner_phase_slope"] = design.combiner_phase_slope;
    j["precoder_phase_slope"] = design.precoder_phase_slope;
    j["combiner_flatness"] = {{"min_gain", wrep.min_gain},
                              {"max_gain", wrep.max_gain},
                              {"mean_gain", wrep.mean_gain},
                              {"grid_points", wrep.grid_points}};
    j["precoder_flatness"] = {{"min_gain", frep.min_gain},
                              {"max_gain", frep.max_gain},
                              {"mean_gain", frep.mean_gain},
                              {"grid_points", frep.grid_points}};
    std::ofstream f(stem + ".json", std::ios::binary);
    f << j.dump(2) << "\n";
}

void save_measurement_dump(const MeasurementDump& dump, const std::string& path) {
    json j;
    j["config"] = config_to_json(dump.config);
    j["snr_db"] = dump.snr_db;
    j["noise_variance"] = dump.noise_variance;
    j["tde"] = measurement_set_to_json(dump.tde);
    j["ems"] = measurement_set_to_json(dump.ems);
    json truth = json::array();
    for (const auto& user : dump.truth) {
        json per_k = json::array();
        for (const auto& m : user) per_k.push_back(matrix_to_json(m));
        truth.push_back(std::move(per_k));
    }
    j["truth"] = std::move(truth);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open dump file: " + path);
    f << j.dump() << "\n";
}

MeasurementDump load_measurement_dump(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open dump file: " + path);
    json j = json::parse(f);
    MeasurementDump dump;
    dump.config = config_from_json(j.at("config"));
    dump.snr_db = j.at("snr_db").get<double>();
    dump.noise_variance = j.at("noise_variance").get<double>();
    dump.tde = measurement_set_from_json(j.at("tde"));
    dump.ems = measurement_set_from_json(j.at("ems"));
    for (const auto& user : j.at("truth")) {
        std::vector<MatC> per_k;
        for (const auto& m : user) per_k.push_back(matrix_from_json(m));
        dump.truth.push_back(std::move(per_k));
    }
    return dump;
}

} // namespace mmce
