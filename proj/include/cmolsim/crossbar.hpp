#pragma once

// N_post x N_pre array of 1T1R cells with row/column addressing. Columns are
// driven by pre-synaptic neurons, rows feed post-synaptic neurons. Inference
// activates exactly one column at a time and reads one current per row.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cmolsim/device.hpp"
#include "cmolsim/rng.hpp"

namespace cmolsim {

struct BitPattern {
    int n_post = 0;
    int n_pre = 0;
    std::vector<std::uint8_t> bits;  // row-major [post][pre]

    BitPattern() = default;
    BitPattern(int rows, int cols) : n_post(rows), n_pre(cols), bits(static_cast<std::size_t>(rows) * cols, 0) {}

    std::uint8_t& at(int post, int pre) { return bits[static_cast<std::size_t>(post) * n_pre + pre]; }
    std::uint8_t at(int post, int pre) const { return bits[static_cast<std::size_t>(post) * n_pre + pre]; }
};

struct ResistanceMap {
    int n_post = 0;
    int n_pre = 0;
    std::vector<double> ohm;  // row-major [post][pre]

    ResistanceMap() = default;
    ResistanceMap(int rows, int cols) : n_post(rows), n_pre(cols), ohm(static_cast<std::size_t>(rows) * cols, 0.0) {}

    double& at(int post, int pre) { return ohm[static_cast<std::size_t>(post) * n_pre + pre]; }
    double at(int post, int pre) const { return ohm[static_cast<std::size_t>(post) * n_pre + pre]; }
};

struct ProgramReport {
    long total_pulses = 0;
    std::vector<std::pair<int, int>> wrong_cells;  // (post, pre) still misclassified
    bool clean() const { return wrong_cells.empty(); }
};

class Crossbar {
public:
    Crossbar(int n_post = 64, int n_pre = 64)
        : n_post_(n_post), n_pre_(n_pre), cells_(static_cast<std::size_t>(n_post) * n_pre) {
        if (n_post < 1 || n_pre < 1)
            throw std::invalid_argument("Crossbar: dimensions must be positive");
    }

    int n_post() const { return n_post_; }
    int n_pre() const { return n_pre_; }

    MemristorCell& cell(int post, int pre) { return cells_[index(post, pre)]; }
    const MemristorCell& cell(int post, int pre) const { return cells_[index(post, pre)]; }

    void check_post(int post) const {
        if (post < 0 || post >= n_post_)
            throw std::out_of_range("Crossbar: post index out of range");
    }
    void check_pre(int pre) const {
        if (pre < 0 || pre >= n_pre_)
            throw std::out_of_range("Crossbar: pre index out of range");
    }

private:
    std::size_t index(int post, int pre) const {
        check_post(post);
        check_pre(pre);
        return static_cast<std::size_t>(post) * n_pre_ + pre;
    }

    int n_post_;
    int n_pre_;
    std::vector<MemristorCell> cells_;
};

// Forming sweep, row-major order. Individual forming pulses can fail like
// any programming pulse, so each cell is re-pulsed until it leaves the
// unformed state; the sweep only returns with a fully formed array.
inline void form_all(Crossbar& xbar, const DeviceParams& params, RngStream& rng) {
    for (int post = 0; post < xbar.n_post(); ++post) {
        for (int pre = 0; pre < xbar.n_pre(); ++pre) {
            MemristorCell& cell = xbar.cell(post, pre);
            cell = apply_pulse(cell, PulseKind::Form, params, rng);
            for (int attempt = 0; cell.state == MemState::Unformed; ++attempt) {
                if (attempt >= 1000)
                    throw std::runtime_error("form_all: cell refuses to form");
                cell = apply_pulse(cell, PulseKind::Form, params, rng);
            }
        }
    }
}

namespace detail {

// One cell programmed toward a target state, optionally re-pulsed while the
// measured resistance sits on the wrong side of the 30k boundary.
inline bool program_cell(Crossbar& xbar, int post, int pre, bool target_lrs,
                         const DeviceParams& params, RngStream& rng, bool verify,
                         int max_retries, long& pulses) {
    const PulseKind kind = target_lrs ? PulseKind::Write : PulseKind::Erase;
    xbar.cell(post, pre) = apply_pulse(xbar.cell(post, pre), kind, params, rng);
    ++pulses;
    if (!verify)
        return true;
    for (int retry = 0; retry < max_retries; ++retry) {
        if (is_lrs_resistance(measure(xbar.cell(post, pre), params)) == target_lrs)
            return true;
        xbar.cell(post, pre) = apply_pulse(xbar.cell(post, pre), kind, params, rng);
        ++pulses;
    }
    return is_lrs_resistance(measure(xbar.cell(post, pre), params)) == target_lrs;
}

}  // namespace detail

// Writes a full bit pattern into the array (1 -> LRS, 0 -> HRS), row-major.
inline ProgramReport program_pattern(Crossbar& xbar, const BitPattern& pattern,
                                     const DeviceParams& params, RngStream& rng,
                                     bool verify = true, int max_retries = 10) {
    if (pattern.n_post != xbar.n_post() || pattern.n_pre != xbar.n_pre())
        throw std::invalid_argument("program_pattern: pattern dimensions do not match crossbar");
    ProgramReport report;
    for (int post = 0; post < xbar.n_post(); ++post) {
        for (int pre = 0; pre < xbar.n_pre(); ++pre) {
            const bool ok = detail::program_cell(xbar, post, pre, pattern.at(post, pre) != 0,
                                                 params, rng, verify, max_retries,
                                                 report.total_pulses);
            if (!ok)
                report.wrong_cells.emplace_back(post, pre);
        }
    }
    return report;
}

// Read-out currents for one activated column; read-only.
inline std::vector<double> infer_column(const Crossbar& xbar, int pre_idx,
                                        const DeviceParams& params, double v_drop = kReadVoltage) {
    xbar.check_pre(pre_idx);
    std::vector<double> currents(static_cast<std::size_t>(xbar.n_post()));
    for (int post = 0; post < xbar.n_post(); ++post)
        currents[static_cast<std::size_t>(post)] = read_current(measure(xbar.cell(post, pre_idx), params), v_drop);
    return currents;
}

inline ResistanceMap measure_all(const Crossbar& xbar, const DeviceParams& params) {
    ResistanceMap map(xbar.n_post(), xbar.n_pre());
    for (int post = 0; post < xbar.n_post(); ++post)
        for (int pre = 0; pre < xbar.n_pre(); ++pre)
            map.at(post, pre) = measure(xbar.cell(post, pre), params);
    return map;
}

// Number of cells in one row currently sensed as LRS.
inline int count_lrs_row(const Crossbar& xbar, int post_idx, const DeviceParams& params) {
    xbar.check_post(post_idx);
    int count = 0;
    for (int pre = 0; pre < xbar.n_pre(); ++pre)
        if (is_lrs_resistance(measure(xbar.cell(post_idx, pre), params)))
            ++count;
    return count;
}

// Rebuilds crossbar state from a measured map: state classified at the 30k
// boundary, resistances taken verbatim (clipped into the sensing range).
inline Crossbar crossbar_from_map(const ResistanceMap& map, const DeviceParams& params) {
    Crossbar xbar(map.n_post, map.n_pre);
    for (int post = 0; post < map.n_post; ++post) {
        for (int pre = 0; pre < map.n_pre; ++pre) {
            MemristorCell& cell = xbar.cell(post, pre);
            const double r = std::clamp(map.at(post, pre), params.sense_min_ohm, params.sense_max_ohm);
            cell.state = is_lrs_resistance(r) ? MemState::Lrs : MemState::Hrs;
            cell.resistance_ohm = r;
        }
    }
    return xbar;
}

// ---------------------------------------------------------------------------
// File formats.
//
// Resistance map: CSV of whole ohms, one row per post-synaptic line.
//   # cmolsim resistance map (ohm); rows = post index, cols = pre index
//   # n_post=64 n_pre=64
//   186342,200000,...
//
// Bit pattern: text grid of 0/1 characters, one row per post-synaptic line.
// ---------------------------------------------------------------------------

inline void save_resistance_map(const ResistanceMap& map, std::ostream& out) {
    out << "# cmolsim resistance map (ohm); rows = post index, cols = pre index\n";
    out << "# n_post=" << map.n_post << " n_pre=" << map.n_pre << "\n";
    for (int post = 0; post < map.n_post; ++post) {
        for (int pre = 0; pre < map.n_pre; ++pre) {
            if (pre)
                out << ',';
            out << static_cast<long long>(std::llround(map.at(post, pre)));
        }
        out << '\n';
    }
}

inline void save_resistance_map(const ResistanceMap& map, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open for writing: " + path);
    save_resistance_map(map, out);
}

inline ResistanceMap load_resistance_map(std::istream& in) {
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ','))
            row.push_back(std::stod(field));
        if (!rows.empty() && row.size() != rows.front().size())
            throw std::runtime_error("resistance map: ragged rows");
        rows.push_back(std::move(row));
    }
    if (rows.empty())
        throw std::runtime_error("resistance map: no data rows");
    ResistanceMap map(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()));
    for (int post = 0; post < map.n_post; ++post)
        for (int pre = 0; pre < map.n_pre; ++pre)
            map.at(post, pre) = rows[static_cast<std::size_t>(post)][static_cast<std::size_t>(pre)];
    return map;
}

inline ResistanceMap load_resistance_map(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open resistance map: " + path);
    return load_resistance_map(in);
}

inline void save_bit_pattern(const BitPattern& pattern, std::ostream& out) {
    out << "# cmolsim bit pattern; rows = post index, cols = pre index\n";
    for (int post = 0; post < pattern.n_post; ++post) {
        for (int pre = 0; pre < pattern.n_pre; ++pre)
            out << (pattern.at(post, pre) ? '1' : '0');
        out << '\n';
    }
}

inline void save_bit_pattern(const BitPattern& pattern, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open for writing: " + path);
    save_bit_pattern(pattern, out);
}

inline BitPattern load_bit_pattern(std::istream& in) {
    std::vector<std::string> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        if (!rows.empty() && line.size() != rows.front().size())
            throw std::runtime_error("bit pattern: ragged rows");
        rows.push_back(line);
    }
    if (rows.empty())
        throw std::runtime_error("bit pattern: no data rows");
    BitPattern pattern(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()));
    for (int post = 0; post < pattern.n_post; ++post) {
        for (int pre = 0; pre < pattern.n_pre; ++pre) {
            const char c = rows[static_cast<std::size_t>(post)][static_cast<std::size_t>(pre)];
            if (c != '0' && c != '1')
                throw std::runtime_error("bit pattern: cells must be 0 or 1");
            pattern.at(post, pre) = c == '1' ? 1 : 0;
        }
    }
    return pattern;
}

inline BitPattern load_bit_pattern(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open bit pattern: " + path);
    return load_bit_pattern(in);
}

}  // namespace cmolsim
