#pragma once

// Run configuration: a TOML-style key/value file covering every tunable of
// the simulator, a strict parser (unknown keys are errors), and a canonical
// serializer used to echo the effective configuration into each output
// directory. Doubles are written in shortest round-trip form so an echoed
// file reloads to bit-identical values.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmolsim/device.hpp"
#include "cmolsim/encoding.hpp"
#include "cmolsim/experiments.hpp"
#include "cmolsim/neuron.hpp"
#include "cmolsim/stdp.hpp"

namespace cmolsim {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ExperimentSelection {
    std::string kind = "stdp_benchmark";  // stdp_benchmark | template_ascii | template_shapes
    int runs = 10;
    double theta_class = 2.0;
    double common_threshold = kInitialThreshold;
    bool verify_programming = true;
    int max_retries = 10;
    double i_vdd_amp = 2.3e-3;
    double v_dd = 4.8;

    void validate() const {
        if (kind != "stdp_benchmark" && kind != "template_ascii" && kind != "template_shapes")
            throw ConfigError("experiment.kind must be stdp_benchmark, template_ascii or template_shapes");
        if (runs < 1)
            throw ConfigError("experiment.runs must be >= 1");
        if (!(theta_class > 0.0))
            throw ConfigError("experiment.theta_class must be positive");
        if (!(common_threshold > 0.0 && common_threshold <= 1.0))
            throw ConfigError("experiment.common_threshold must be in (0,1]");
        if (max_retries < 0)
            throw ConfigError("experiment.max_retries must be >= 0");
        if (!(i_vdd_amp > 0.0 && v_dd > 0.0))
            throw ConfigError("experiment energy figures must be positive");
    }
};

struct RunConfig {
    std::uint64_t seed = 42;
    std::string out_dir = "out";
    DeviceParams device{};
    NeuronPhysParams neuron{};
    StdpConfig stdp{};
    TimingConfig timing{};
    ReadoutConfig readout{};
    ExperimentSelection experiment{};

    void validate() const {
        try {
            device.validate();
            neuron.validate();
            stdp.validate();
            timing.validate();
            experiment.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        if (readout.n_lev < 1 || readout.n_neurons < 1 || !(readout.clock_period_s > 0.0))
            throw ConfigError("readout fields must be positive");
        // The comparator reference and the resistance boundary express the
        // same decision and must never drift apart.
        const double implied_boundary = kReadVoltage / neuron.i_ref_amp;
        if (std::abs(implied_boundary - kHrsLrsBoundaryOhm) > 1e-6 * kHrsLrsBoundaryOhm)
            throw ConfigError("neuron.i_ref_amp is inconsistent with the 30k HRS/LRS boundary "
                              "(required: 0.3V / i_ref == 30kOhm)");
        if (stdp.n_lrs_target > 64)
            throw ConfigError("stdp.n_lrs_target exceeds the 64-wide row");
    }

    TemplateMatchingConfig template_config() const {
        TemplateMatchingConfig cfg;
        cfg.device = device;
        cfg.neuron = neuron;
        cfg.timing = timing;
        cfg.common_threshold = experiment.common_threshold;
        cfg.verify_programming = experiment.verify_programming;
        cfg.max_retries = experiment.max_retries;
        cfg.i_vdd_amp = experiment.i_vdd_amp;
        cfg.v_dd = experiment.v_dd;
        return cfg;
    }

    StdpExperimentConfig stdp_config() const {
        StdpExperimentConfig cfg;
        cfg.device = device;
        cfg.neuron = neuron;
        cfg.stdp = stdp;
        cfg.timing = timing;
        cfg.theta_class = experiment.theta_class;
        cfg.threshold_levels = readout.n_lev;
        cfg.i_vdd_amp = experiment.i_vdd_amp;
        cfg.v_dd = experiment.v_dd;
        return cfg;
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc())
        throw std::runtime_error("format_double failed");
    return std::string(buf, ptr);
}

class KvTable {
public:
    void set(const std::string& section, const std::string& key, const std::string& value) {
        values_[section + "." + key] = value;
    }

    bool take(const std::string& section, const std::string& key, std::string& out) {
        const auto it = values_.find(section + "." + key);
        if (it == values_.end())
            return false;
        out = it->second;
        values_.erase(it);
        return true;
    }

    void take_double(const std::string& section, const std::string& key, double& field) {
        std::string raw;
        if (!take(section, key, raw))
            return;
        try {
            field = std::stod(raw);
        } catch (const std::exception&) {
            throw ConfigError("config: bad number for " + section + "." + key + ": " + raw);
        }
    }

    void take_int(const std::string& section, const std::string& key, int& field) {
        std::string raw;
        if (!take(section, key, raw))
            return;
        try {
            field = std::stoi(raw);
        } catch (const std::exception&) {
            throw ConfigError("config: bad integer for " + section + "." + key + ": " + raw);
        }
    }

    void take_i64(const std::string& section, const std::string& key, std::int64_t& field) {
        std::string raw;
        if (!take(section, key, raw))
            return;
        try {
            field = std::stoll(raw);
        } catch (const std::exception&) {
            throw ConfigError("config: bad integer for " + section + "." + key + ": " + raw);
        }
    }

    void take_u64(const std::string& section, const std::string& key, std::uint64_t& field) {
        std::string raw;
        if (!take(section, key, raw))
            return;
        try {
            field = std::stoull(raw);
        } catch (const std::exception&) {
            throw ConfigError("config: bad integer for " + section + "." + key + ": " + raw);
        }
    }

    void take_bool(const std::string& section, const std::string& key, bool& field) {
        std::string raw;
        if (!take(section, key, raw))
            return;
        if (raw == "true")
            field = true;
        else if (raw == "false")
            field = false;
        else
            throw ConfigError("config: bad boolean for " + section + "." + key + ": " + raw);
    }

    void take_string(const std::string& section, const std::string& key, std::string& field) {
        std::string raw;
        if (!take(section, key, raw))
            return;
        if (raw.size() >= 2 && raw.front() == '"' && raw.back() == '"')
            raw = raw.substr(1, raw.size() - 2);
        field = raw;
    }

    void expect_empty() const {
        if (values_.empty())
            return;
        std::string msg = "config: unknown keys:";
        for (const auto& [k, v] : values_)
            msg += " " + k;
        throw ConfigError(msg);
    }

private:
    std::map<std::string, std::string> values_;
};

}  // namespace detail

inline RunConfig parse_run_config(std::istream& in) {
    detail::KvTable table;
    std::string section;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        // comments start at '#' (values in this schema never contain one)
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty())
            continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config line " + std::to_string(line_no) + ": malformed section");
            section = detail::trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        table.set(section, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
    }

    RunConfig cfg;
    table.take_u64("", "seed", cfg.seed);
    table.take_string("", "out_dir", cfg.out_dir);

    table.take_double("device", "hrs_median_ohm", cfg.device.hrs_median_ohm);
    table.take_double("device", "hrs_sigma", cfg.device.hrs_sigma);
    table.take_double("device", "lrs_median_ohm", cfg.device.lrs_median_ohm);
    table.take_double("device", "lrs_sigma", cfg.device.lrs_sigma);
    table.take_double("device", "sense_min_ohm", cfg.device.sense_min_ohm);
    table.take_double("device", "sense_max_ohm", cfg.device.sense_max_ohm);
    table.take_double("device", "p_program_fail", cfg.device.p_program_fail);
    table.take_double("device", "border_fraction_target", cfg.device.border_fraction_target);

    table.take_double("neuron", "i_ref_amp", cfg.neuron.i_ref_amp);
    table.take_double("neuron", "i_ref_mismatch_sigma", cfg.neuron.i_ref_mismatch_sigma);
    table.take_double("neuron", "i_c_mean_amp", cfg.neuron.i_c_mean_amp);
    table.take_double("neuron", "i_c_sigma_amp", cfg.neuron.i_c_sigma_amp);
    table.take_double("neuron", "t_spike_s", cfg.neuron.t_spike_s);
    table.take_double("neuron", "c_mem_farad", cfg.neuron.c_mem_farad);
    table.take_double("neuron", "base_delta", cfg.neuron.base_delta);

    table.take_double("stdp", "p_ltp", cfg.stdp.p_ltp);
    table.take_double("stdp", "p_ltd", cfg.stdp.p_ltd);
    table.take_int("stdp", "history_len", cfg.stdp.history_len);
    table.take_int("stdp", "n_lrs_target", cfg.stdp.n_lrs_target);
    table.take_double("stdp", "threshold_step", cfg.stdp.threshold_step);
    table.take_double("stdp", "initial_threshold", cfg.stdp.initial_threshold);

    table.take_i64("timing", "spike_width_ns", cfg.timing.spike_width_ns);
    table.take_i64("timing", "period_ns", cfg.timing.period_ns);
    table.take_int("timing", "repeats_per_pattern", cfg.timing.repeats_per_pattern);

    table.take_int("readout", "n_lev", cfg.readout.n_lev);
    table.take_double("readout", "clock_period_s", cfg.readout.clock_period_s);
    table.take_int("readout", "n_neurons", cfg.readout.n_neurons);

    table.take_string("experiment", "kind", cfg.experiment.kind);
    table.take_int("experiment", "runs", cfg.experiment.runs);
    table.take_double("experiment", "theta_class", cfg.experiment.theta_class);
    table.take_double("experiment", "common_threshold", cfg.experiment.common_threshold);
    table.take_bool("experiment", "verify_programming", cfg.experiment.verify_programming);
    table.take_int("experiment", "max_retries", cfg.experiment.max_retries);
    table.take_double("experiment", "i_vdd_amp", cfg.experiment.i_vdd_amp);
    table.take_double("experiment", "v_dd", cfg.experiment.v_dd);

    table.expect_empty();
    cfg.validate();
    return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config: " + path);
    return parse_run_config(in);
}

inline void serialize_run_config(const RunConfig& cfg, std::ostream& out) {
    using detail::format_double;
    out << "# cmolsim configuration\n";
    out << "seed = " << cfg.seed << "\n";
    out << "out_dir = \"" << cfg.out_dir << "\"\n";
    out << "\n[device]\n";
    out << "# per-state log-normal resistance spread (median ohms, log-space sigma)\n";
    out << "hrs_median_ohm = " << format_double(cfg.device.hrs_median_ohm) << "\n";
    out << "hrs_sigma = " << format_double(cfg.device.hrs_sigma) << "\n";
    out << "lrs_median_ohm = " << format_double(cfg.device.lrs_median_ohm) << "\n";
    out << "lrs_sigma = " << format_double(cfg.device.lrs_sigma) << "\n";
    out << "# sensing circuit saturation range\n";
    out << "sense_min_ohm = " << format_double(cfg.device.sense_min_ohm) << "\n";
    out << "sense_max_ohm = " << format_double(cfg.device.sense_max_ohm) << "\n";
    out << "p_program_fail = " << format_double(cfg.device.p_program_fail) << "\n";
    out << "border_fraction_target = " << format_double(cfg.device.border_fraction_target) << "\n";
    out << "\n[neuron]\n";
    out << "# comparator reference (10uA nominal; must equal 0.3V / 30kOhm)\n";
    out << "i_ref_amp = " << format_double(cfg.neuron.i_ref_amp) << "\n";
    out << "i_ref_mismatch_sigma = " << format_double(cfg.neuron.i_ref_mismatch_sigma) << "\n";
    out << "# charge-pump current: 10nA mean, 2.5nA sigma (25% neuron mismatch)\n";
    out << "i_c_mean_amp = " << format_double(cfg.neuron.i_c_mean_amp) << "\n";
    out << "i_c_sigma_amp = " << format_double(cfg.neuron.i_c_sigma_amp) << "\n";
    out << "t_spike_s = " << format_double(cfg.neuron.t_spike_s) << "\n";
    out << "c_mem_farad = " << format_double(cfg.neuron.c_mem_farad) << "\n";
    out << "# normalized membrane increment per charge packet\n";
    out << "base_delta = " << format_double(cfg.neuron.base_delta) << "\n";
    out << "\n[stdp]\n";
    out << "# LTP/LTD probabilities (tuned against the benchmark acceptance band)\n";
    out << "p_ltp = " << format_double(cfg.stdp.p_ltp) << "\n";
    out << "p_ltd = " << format_double(cfg.stdp.p_ltd) << "\n";
    out << "# rank-order window: last N_p pre-synaptic spikes\n";
    out << "history_len = " << cfg.stdp.history_len << "\n";
    out << "# fixed per-row LRS count restored after every update\n";
    out << "n_lrs_target = " << cfg.stdp.n_lrs_target << "\n";
    out << "threshold_step = " << format_double(cfg.stdp.threshold_step) << "\n";
    out << "initial_threshold = " << format_double(cfg.stdp.initial_threshold) << "\n";
    out << "\n[timing]\n";
    out << "# 200ns spikes on a 220ns period (20ns stand-by)\n";
    out << "spike_width_ns = " << cfg.timing.spike_width_ns << "\n";
    out << "period_ns = " << cfg.timing.period_ns << "\n";
    out << "repeats_per_pattern = " << cfg.timing.repeats_per_pattern << "\n";
    out << "\n[readout]\n";
    out << "# query-driven read-out: 2 * n_lev clock cycles per neuron\n";
    out << "n_lev = " << cfg.readout.n_lev << "\n";
    out << "clock_period_s = " << format_double(cfg.readout.clock_period_s) << "\n";
    out << "n_neurons = " << cfg.readout.n_neurons << "\n";
    out << "\n[experiment]\n";
    out << "# stdp_benchmark | template_ascii | template_shapes\n";
    out << "kind = \"" << cfg.experiment.kind << "\"\n";
    out << "runs = " << cfg.experiment.runs << "\n";
    out << "# classifier firing threshold: smaller values give many, nearly\n";
    out << "# noise-free decisions; larger values give fewer, noisier ones\n";
    out << "theta_class = " << format_double(cfg.experiment.theta_class) << "\n";
    out << "common_threshold = " << format_double(cfg.experiment.common_threshold) << "\n";
    out << "verify_programming = " << (cfg.experiment.verify_programming ? "true" : "false") << "\n";
    out << "max_retries = " << cfg.experiment.max_retries << "\n";
    out << "# chip supply figures for the energy report\n";
    out << "i_vdd_amp = " << format_double(cfg.experiment.i_vdd_amp) << "\n";
    out << "v_dd = " << format_double(cfg.experiment.v_dd) << "\n";
}

inline void save_run_config(const RunConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open for writing: " + path);
    serialize_run_config(cfg, out);
}

}  // namespace cmolsim
