// SPDX-License-Identifier: Apache-2.0
#include "mmce/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "mmce/baselines.hpp"
#include "mmce/beam_design.hpp"
#include "mmce/channel.hpp"
#include "mmce/estimator_ems.hpp"
#include "mmce/estimator_tde.hpp"
#include "mmce/metrics.hpp"
#include "mmce/rng.hpp"
#include "mmce/sounding.hpp"

#include <json.hpp>

namespace mmce {

std::string scheme_name(Scheme s) {
    switch (s) {
        case Scheme::Tde: return "tde";
        case Scheme::Ems: return "ems";
        case Scheme::Omp: return "omp";
    }
    return "?";
}

Scheme scheme_from_name(const std::string& name) {
    if (name == "tde" || name == "TDE") return Scheme::Tde;
    if (name == "ems" || name == "EMS") return Scheme::Ems;
    if (name == "omp" || name == "OMP") return Scheme::Omp;
    throw std::invalid_argument("unknown scheme: " + name);
}

void ExperimentSpec::validate() const {
    config.validate();
    if (snr_db_sweep.empty() == pilot_sweep.empty())
        throw std::invalid_argument("ExperimentSpec: exactly one sweep must be nonempty");
    if (schemes.empty()) throw std::invalid_argument("ExperimentSpec: no schemes selected");
    if (trials < 1) throw std::invalid_argument("ExperimentSpec: trials must be >= 1");
    if (threads < 1) throw std::invalid_argument("ExperimentSpec: threads must be >= 1");
    if (grid_rx < 1 || grid_tx < 1) throw std::invalid_argument("ExperimentSpec: bad grid size");
}

namespace {

struct SchemeOutcome {
    double nmse = 0.0;
    double se = 0.0;
    bool ok = false;
};

struct TrialOutcome {
    SchemeOutcome per_scheme[3];
};

int scheme_index(Scheme s) { return static_cast<int>(s); }

bool wants(const ExperimentSpec& spec, Scheme s) {
    for (auto x : spec.schemes)
        if (x == s) return true;
    return false;
}

TrialOutcome run_trial(const ExperimentSpec& spec, const SystemConfig& cfg,
                       const SoundingDesign& design, const BeamspaceDictionary* dict,
                       double snr_db, std::size_t sweep_index, int trial) {
    TrialOutcome out;
    Rng rng = Rng::child(spec.seed, sweep_index, static_cast<std::uint64_t>(trial));
    ChannelRealization truth = generate_realization(cfg, rng);
    double snr_lin = std::pow(10.0, snr_db / 10.0);

    if (wants(spec, Scheme::Tde)) {
        auto& slot = out.per_scheme[scheme_index(Scheme::Tde)];
        try {
            double sigma2 = noise_variance_for_snr(design, truth, SoundingMode::Tde, snr_db);
            MeasurementSet meas =
                simulate_measurements(design, truth, SoundingMode::Tde, sigma2, rng);
            auto est = estimate_tde(meas, design, cfg);
            slot.nmse = nmse(est, truth);
            slot.se = spectral_efficiency(est, truth, cfg, snr_lin);
            slot.ok = true;
        } catch (const std::exception&) {
            slot.ok = false;
        }
    }

    if (wants(spec, Scheme::Ems) || wants(spec, Scheme::Omp)) {
        double sigma2 = noise_variance_for_snr(design, truth, SoundingMode::Ems, snr_db);
        MeasurementSet meas = simulate_measurements(design, truth, SoundingMode::Ems, sigma2, rng);
        if (wants(spec, Scheme::Ems)) {
            auto& slot = out.per_scheme[scheme_index(Scheme::Ems)];
            try {
                EmsOptions opts;
                opts.epsilon = spec.ems_epsilon;
                auto est = estimate_ems(meas, design, cfg, opts);
                slot.nmse = nmse(est, truth);
                slot.se = spectral_efficiency(est, truth, cfg, snr_lin);
                slot.ok = true;
            } catch (const std::exception&) {
                slot.ok = false;
            }
        }
        if (wants(spec, Scheme::Omp)) {
            auto& slot = out.per_scheme[scheme_index(Scheme::Omp)];
            try {
                auto est = omp_estimate(meas, *dict, design, cfg, cfg.num_paths);
                slot.nmse = nmse(est, truth);
                slot.se = spectral_efficiency(est, truth, cfg, snr_lin);
                slot.ok = true;
            } catch (const std::exception&) {
                slot.ok = false;
            }
        }
    }
    return out;
}

} // namespace

std::vector<ResultRecord> run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    const bool pilot_mode = !spec.pilot_sweep.empty();
    const std::size_t n_points = pilot_mode ? spec.pilot_sweep.size() : spec.snr_db_sweep.size();

    std::vector<ResultRecord> records;
    for (std::size_t p = 0; p < n_points; ++p) {
        SystemConfig cfg = spec.config;
        double snr_db;
        double sweep_value;
        if (pilot_mode) {
            cfg.t1 = cfg.t2 = spec.pilot_sweep[p];
            snr_db = spec.pilot_sweep_snr_db;
            sweep_value = spec.pilot_sweep[p];
        } else {
            snr_db = spec.snr_db_sweep[p];
            sweep_value = snr_db;
        }
        cfg.validate();

        auto t0 = std::chrono::steady_clock::now();
        SoundingDesign design = build_designs(cfg);
        BeamspaceDictionary dict;
        if (wants(spec, Scheme::Omp)) dict = build_dictionary(design, cfg, spec.grid_rx, spec.grid_tx);

        std::vector<TrialOutcome> outcomes(spec.trials);
        std::atomic<int> next{0};
        auto worker = [&] {
            int t;
            while ((t = next.fetch_add(1)) < spec.trials)
                outcomes[t] = run_trial(spec, cfg, design,
                                        wants(spec, Scheme::Omp) ? &dict : nullptr, snr_db, p, t);
        };
        int n_threads = std::min(spec.threads, spec.trials);
        if (n_threads <= 1) {
            worker();
        } else {
            std::vector<std::thread> pool;
            pool.reserve(n_threads);
            for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
            for (auto& th : pool) th.join();
        }
        double wall_ms = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - t0)
                             .count();

        for (Scheme s : spec.schemes) {
            ResultRecord rec;
            rec.scheme = s;
            rec.sweep_value = sweep_value;
            rec.pilot_slots = pilot_slots(cfg, s == Scheme::Tde ? SoundingMode::Tde
                                                                : SoundingMode::Ems);
            rec.wall_ms = wall_ms;
            double nmse_sum = 0.0, se_sum = 0.0;
            int ok = 0;
            for (const auto& o : outcomes) {
                const auto& slot = o.per_scheme[scheme_index(s)];
                if (!slot.ok) continue;
                nmse_sum += slot.nmse;
                se_sum += slot.se;
                ++ok;
            }
            rec.failed_trials = spec.trials - ok;
            rec.nmse = ok > 0 ? nmse_sum / ok : std::nan("");
            rec.se = ok > 0 ? se_sum / ok : std::nan("");
            records.push_back(rec);
        }
    }
    return records;
}

namespace {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

} // namespace

std::string results_csv(const std::vector<ResultRecord>& records) {
    std::string out = "scheme,sweep_value,nmse,se,pilot_slots\n";
    for (const auto& r : records) {
        out += scheme_name(r.scheme);
        out += ',';
        out += format_double(r.sweep_value);
        out += ',';
        out += format_double(r.nmse);
        out += ',';
        out += format_double(r.se);
        out += ',';
        out += std::to_string(r.pilot_slots);
        out += '\n';
    }
    return out;
}

std::string results_json(const std::vector<ResultRecord>& records) {
    nlohmann::json root = nlohmann::json::array();
    for (const auto& r : records) {
        nlohmann::json rec;
        rec["scheme"] = scheme_name(r.scheme);
        rec["sweep_value"] = r.sweep_value;
        rec["nmse"] = r.nmse;
        rec["se"] = r.se;
        rec["pilot_slots"] = r.pilot_slots;
        rec["failed_trials"] = r.failed_trials;
        root.push_back(rec);
    }
    return root.dump(2) + "\n";
}

void write_results(const std::vector<ResultRecord>& records, const std::string& stem) {
    {
        std::ofstream f(stem + ".csv", std::ios::binary);
        if (!f) throw std::runtime_error("cannot open " + stem + ".csv");
        f << results_csv(records);
    }
    {
        std::ofstream f(stem + ".json", std::ios::binary);
        f << results_json(records);
    }
    {
        // Wall clock measurements live in a sidecar so the primary result
        // files stay byte-identical across reruns of the same spec and seed.
        std::ofstream f(stem + ".timing.csv", std::ios::binary);
        f << "scheme,sweep_value,wall_ms\n";
        for (const auto& r : records)
            f << scheme_name(r.scheme) << ',' << format_double(r.sweep_value) << ','
              << format_double(r.wall_ms) << '\n';
    }
}

} // namespace mmce
