#pragma once

// JSON serialization for experiment reports and benchmark statistics.
// Serialization is canonical (ordered keys, shortest round-trip doubles via
// nlohmann), so identical runs produce byte-identical files.

#include <fstream>
#include <string>

#include <json.hpp>

#include "cmolsim/experiments.hpp"

namespace cmolsim {

using ordered_json = nlohmann::ordered_json;

inline ordered_json to_json(const EnergyFigures& e) {
    return ordered_json{{"e_sop_joule", e.e_sop_joule}, {"dq_sop_coulomb", e.dq_sop_coulomb}};
}

inline ordered_json to_json(const Quartiles& q) {
    return ordered_json{{"min", q.min}, {"q25", q.q25}, {"median", q.median}, {"q75", q.q75}, {"max", q.max}};
}

inline ordered_json to_json(const BenchmarkRun& run) {
    return ordered_json{{"run", run.run_index},
                        {"seed", run.seed},
                        {"r_ev_random", run.r_ev_random},
                        {"rr_random", run.rr_random},
                        {"r_ev_learned", run.r_ev_learned},
                        {"rr_learned", run.rr_learned},
                        {"post_spikes_training", run.post_spikes_training},
                        {"neurons_potentiated", run.neurons_potentiated}};
}

inline ordered_json to_json(const BenchmarkResult& result) {
    ordered_json runs = ordered_json::array();
    for (const BenchmarkRun& run : result.runs)
        runs.push_back(to_json(run));
    return ordered_json{{"experiment", "stdp_benchmark"},
                        {"master_seed", result.master_seed},
                        {"n_runs", result.runs.size()},
                        {"runs", runs},
                        {"summary",
                         ordered_json{{"r_ev_random", to_json(result.r_ev_random)},
                                      {"rr_random", to_json(result.rr_random)},
                                      {"r_ev_learned", to_json(result.r_ev_learned)},
                                      {"rr_learned", to_json(result.rr_learned)}}}};
}

inline ordered_json to_json(const ExperimentReport& report, const std::string& experiment_id) {
    long output_spikes = 0;
    for (const SpikeEvent& ev : report.raster.events)
        if (ev.layer == Layer::Post)
            ++output_spikes;
    return ordered_json{{"experiment", experiment_id},
                        {"seed", report.seed},
                        {"r_ev", report.r_ev},
                        {"rr", report.rr},
                        {"output_spikes", output_spikes},
                        {"energy", to_json(report.energy)}};
}

inline void save_json(const ordered_json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open for writing: " + path);
    out << j.dump(2) << '\n';
}

inline ordered_json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open json: " + path);
    ordered_json j;
    in >> j;
    return j;
}

}  // namespace cmolsim
