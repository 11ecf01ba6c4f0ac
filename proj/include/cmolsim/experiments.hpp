#pragma once

// End-to-end pipelines: template-matching inference, random connected-shape
// generation, SB-STDP feature learning with the off-chip classifier stage,
// the per-synaptic-operation energy model, and the repeated benchmark
// protocol with its summary statistics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmolsim/crossbar.hpp"
#include "cmolsim/device.hpp"
#include "cmolsim/encoding.hpp"
#include "cmolsim/neuron.hpp"
#include "cmolsim/rng.hpp"
#include "cmolsim/stdp.hpp"

namespace cmolsim {

// ---------------------------------------------------------------------------
// Metrics containers
// ---------------------------------------------------------------------------

struct ConfusionMatrix {
    int n_out = 0;
    int n_in = 0;
    std::vector<int> counts;  // [out][in], output spike counts

    ConfusionMatrix() = default;
    ConfusionMatrix(int outputs, int inputs)
        : n_out(outputs), n_in(inputs), counts(static_cast<std::size_t>(outputs) * inputs, 0) {}

    int& at(int out, int in) { return counts[static_cast<std::size_t>(out) * n_in + in]; }
    int at(int out, int in) const { return counts[static_cast<std::size_t>(out) * n_in + in]; }

    int column_total(int in) const {
        int total = 0;
        for (int out = 0; out < n_out; ++out)
            total += at(out, in);
        return total;
    }

    // Ratio of spikes a given output contributed while a given input played.
    double ratio(int out, int in) const {
        const int total = column_total(in);
        return total > 0 ? static_cast<double>(at(out, in)) / total : 0.0;
    }
};

inline void save_confusion_csv(const ConfusionMatrix& m, std::ostream& out) {
    out << "# cmolsim confusion matrix (output spike counts); rows = output neuron, cols = input pattern\n";
    for (int o = 0; o < m.n_out; ++o) {
        for (int i = 0; i < m.n_in; ++i) {
            if (i)
                out << ',';
            out << m.at(o, i);
        }
        out << '\n';
    }
}

inline void save_confusion_csv(const ConfusionMatrix& m, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open for writing: " + path);
    save_confusion_csv(m, out);
}

struct EnergyFigures {
    double e_sop_joule = 0.0;
    double dq_sop_coulomb = 0.0;
};

// Chip-total energy per synaptic operation: supply current times supply
// voltage times inference period, shared by the devices driven per spike.
inline EnergyFigures energy_report(double i_vdd_amp, double v_dd, double t_p_s, int n_syn) {
    if (!(i_vdd_amp > 0.0 && v_dd > 0.0 && t_p_s > 0.0) || n_syn < 1)
        throw std::invalid_argument("energy_report: arguments must be positive");
    const double e_sop = i_vdd_amp * v_dd * t_p_s / n_syn;
    return {e_sop, e_sop / v_dd};
}

struct ExperimentReport {
    EventTrain raster;
    ConfusionMatrix confusion;
    double r_ev = 0.0;  // correct spikes over all output spikes
    double rr = 0.0;    // inputs whose modal responder is the matching one
    EnergyFigures energy;
    std::uint64_t seed = 0;
};

namespace detail {

// Integrates one input event into the whole bank and resolves the race:
// among the neurons that cross threshold on this event, the winner is the
// one needing the smallest fraction of its charge packet (it reaches the
// reference first within the pulse ramp). Returns -1 when nobody crossed.
// The caller decides what a spike triggers; resets are not performed here.
inline int integrate_race_event(std::vector<PostNeuronState>& neurons,
                                const std::vector<double>& currents) {
    int winner = -1;
    double best_fraction = 2.0;
    for (int j = 0; j < static_cast<int>(neurons.size()); ++j) {
        PostNeuronState& neuron = neurons[static_cast<std::size_t>(j)];
        const bool active = comparator(currents[static_cast<std::size_t>(j)], neuron.i_ref_eff);
        const double fraction =
            active ? std::max(0.0, (neuron.threshold - neuron.membrane) / neuron.delta) : 0.0;
        if (integrate_event(neuron, active) && fraction < best_fraction) {
            winner = j;
            best_fraction = fraction;
        }
    }
    return winner;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Template matching
// ---------------------------------------------------------------------------

struct TemplateMatchingConfig {
    DeviceParams device{};
    NeuronPhysParams neuron{};
    TimingConfig timing{};
    double common_threshold = kInitialThreshold;
    bool verify_programming = true;
    int max_retries = 10;
    double i_vdd_amp = 2.3e-3;
    double v_dd = 4.8;
};

inline BitPattern pattern_from_templates(const std::vector<LabeledImage>& templates) {
    if (templates.empty())
        throw std::invalid_argument("pattern_from_templates: need at least one template");
    const int n_pre = templates.front().image.width * templates.front().image.height;
    BitPattern pattern(static_cast<int>(templates.size()), n_pre);
    for (int j = 0; j < pattern.n_post; ++j) {
        const Image& img = templates[static_cast<std::size_t>(j)].image;
        if (img.width * img.height != n_pre)
            throw std::invalid_argument("pattern_from_templates: template sizes differ");
        for (int p = 0; p < n_pre; ++p)
            pattern.at(j, p) = img.pixels[static_cast<std::size_t>(p)];
    }
    return pattern;
}

// One template per output neuron; every input is streamed as a spike train,
// one column inferred per spike, and every output spike resets the whole
// neuron bank. Thresholds are common and fixed (no potentiation); neuron
// mismatch enters through the per-neuron packet size and comparator
// reference.
inline ExperimentReport run_template_matching(const std::vector<LabeledImage>& templates,
                                              const std::vector<LabeledImage>& inputs,
                                              const TemplateMatchingConfig& cfg,
                                              std::uint64_t seed) {
    cfg.device.validate();
    cfg.neuron.validate();
    cfg.timing.validate();
    const BitPattern pattern = pattern_from_templates(templates);
    const int n_post = pattern.n_post;
    const int n_pre = pattern.n_pre;

    RngStream root(seed);
    RngStream device_rng = root.fork("device");
    RngStream mismatch_rng = root.fork("mismatch");

    Crossbar xbar(n_post, n_pre);
    form_all(xbar, cfg.device, device_rng);
    program_pattern(xbar, pattern, cfg.device, device_rng, cfg.verify_programming, cfg.max_retries);

    std::vector<PostNeuronState> neurons =
        make_neuron_bank(cfg.neuron, n_post, cfg.common_threshold, mismatch_rng);

    ExperimentReport report;
    report.seed = seed;
    report.confusion = ConfusionMatrix(n_post, static_cast<int>(inputs.size()));
    long correct = 0;
    long incorrect = 0;

    std::int64_t t_cursor = 0;
    for (int input_idx = 0; input_idx < static_cast<int>(inputs.size()); ++input_idx) {
        const Image& img = inputs[static_cast<std::size_t>(input_idx)].image;
        if (img.width * img.height != n_pre)
            throw std::invalid_argument("run_template_matching: input size does not match crossbar");
        for (PostNeuronState& neuron : neurons)  // each playback starts from reset
            reset(neuron);
        report.raster.mark(inputs[static_cast<std::size_t>(input_idx)].label, t_cursor);
        const std::vector<SpikeEvent> events = image_to_spikes(img, t_cursor, cfg.timing);
        t_cursor += static_cast<std::int64_t>(std::max<std::size_t>(events.size(), 1)) * cfg.timing.period_ns;

        for (const SpikeEvent& ev : events) {
            report.raster.append(ev);
            const std::vector<double> currents = infer_column(xbar, ev.neuron_id, cfg.device);
            const int winner = detail::integrate_race_event(neurons, currents);
            if (winner < 0)
                continue;
            report.raster.append({ev.t_ns, Layer::Post, winner});
            ++neurons[static_cast<std::size_t>(winner)].fired_count;
            ++report.confusion.at(winner, input_idx);
            if (winner == input_idx)
                ++correct;
            else
                ++incorrect;
            for (PostNeuronState& neuron : neurons)  // global reset on every output spike
                reset(neuron);
        }
    }

    report.r_ev = (correct + incorrect) > 0
                      ? static_cast<double>(correct) / static_cast<double>(correct + incorrect)
                      : 0.0;
    int recognized = 0;
    for (int in = 0; in < report.confusion.n_in && in < n_post; ++in) {
        int best = -1;
        int best_count = 0;
        bool unique = false;
        for (int out = 0; out < n_post; ++out) {
            const int c = report.confusion.at(out, in);
            if (c > best_count) {
                best_count = c;
                best = out;
                unique = true;
            } else if (c == best_count && c > 0) {
                unique = false;
            }
        }
        if (unique && best == in)
            ++recognized;
    }
    report.rr = report.confusion.n_in > 0
                    ? static_cast<double>(recognized) / report.confusion.n_in
                    : 0.0;
    report.energy = energy_report(cfg.i_vdd_amp, cfg.v_dd,
                                  static_cast<double>(cfg.timing.period_ns) * 1e-9, n_post);
    return report;
}

// ---------------------------------------------------------------------------
// Random connected shapes
// ---------------------------------------------------------------------------

namespace detail {

inline Image grow_shape(RngStream& rng, int seed_cell, int n_pixels, int grid) {
    Image img(grid, grid);
    std::vector<int> cells{seed_cell};
    img.pixels[static_cast<std::size_t>(seed_cell)] = 1;
    while (static_cast<int>(cells.size()) < n_pixels) {
        std::vector<int> candidates;
        std::vector<std::uint8_t> seen(static_cast<std::size_t>(grid) * grid, 0);
        for (int cell : cells) {
            const int r = cell / grid;
            const int c = cell % grid;
            const int neighbors[4][2] = {{r - 1, c}, {r + 1, c}, {r, c - 1}, {r, c + 1}};
            for (const auto& nb : neighbors) {
                if (nb[0] < 0 || nb[0] >= grid || nb[1] < 0 || nb[1] >= grid)
                    continue;
                const int idx = nb[0] * grid + nb[1];
                if (img.pixels[static_cast<std::size_t>(idx)] || seen[static_cast<std::size_t>(idx)])
                    continue;
                seen[static_cast<std::size_t>(idx)] = 1;
                candidates.push_back(idx);
            }
        }
        if (candidates.empty())
            throw std::runtime_error("gen_random_shapes: shape cannot grow further");
        const int pick = candidates[static_cast<std::size_t>(rng.below(candidates.size()))];
        img.pixels[static_cast<std::size_t>(pick)] = 1;
        cells.push_back(pick);
    }
    return img;
}

inline int overlap(const Image& a, const Image& b) {
    int o = 0;
    for (std::size_t i = 0; i < a.pixels.size(); ++i)
        o += a.pixels[i] && b.pixels[i];
    return o;
}

}  // namespace detail

// Irregular connected shapes of a fixed pixel count, each grown from its own
// seed pixel by uniformly picking among the unoccupied 4-neighbors of the
// current shape. Seeds are spread over the grid (all cells when count fills
// the grid). To keep the patterns separated, a candidate that shares more
// than max_shared_pixels with an already accepted shape is regrown; when the
// retry budget runs out the least-overlapping attempt wins.
inline std::vector<Image> gen_random_shapes(RngStream& rng, int count = 64, int n_pixels = 8,
                                            int grid = 8, int max_shared_pixels = 5) {
    if (count < 1 || n_pixels < 1 || grid < 1)
        throw std::invalid_argument("gen_random_shapes: arguments must be positive");
    if (count > grid * grid)
        throw std::invalid_argument("gen_random_shapes: more shapes than grid cells");
    if (n_pixels > grid * grid)
        throw std::invalid_argument("gen_random_shapes: shape larger than grid");

    std::vector<Image> shapes;
    shapes.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        const int seed_cell = static_cast<int>(static_cast<long long>(k) * grid * grid / count);
        Image best;
        int best_worst = grid * grid + 1;
        for (int attempt = 0; attempt < 200; ++attempt) {
            Image img = detail::grow_shape(rng, seed_cell, n_pixels, grid);
            int worst = 0;
            for (const Image& prev : shapes)
                worst = std::max(worst, detail::overlap(img, prev));
            if (worst < best_worst) {
                best_worst = worst;
                best = std::move(img);
            }
            if (best_worst <= max_shared_pixels)
                break;
        }
        shapes.push_back(std::move(best));
    }
    return shapes;
}

// ---------------------------------------------------------------------------
// SB-STDP training and the off-chip classifier stage
// ---------------------------------------------------------------------------

struct StdpExperimentConfig {
    DeviceParams device{};
    NeuronPhysParams neuron{};
    StdpConfig stdp{};
    TimingConfig timing{};
    double theta_class = 2.0;  // classifier neuron firing threshold
    int threshold_levels = 13; // discrete per-neuron threshold levels of the read-out
    double i_vdd_amp = 2.3e-3;
    double v_dd = 4.8;

    void validate() const {
        device.validate();
        neuron.validate();
        stdp.validate();
        timing.validate();
        if (!(theta_class > 0.0))
            throw std::invalid_argument("StdpExperimentConfig: theta_class must be positive");
        if (threshold_levels < 2)
            throw std::invalid_argument("StdpExperimentConfig: threshold_levels must be >= 2");
    }
};

struct StdpTraceRecord {
    long event_index = 0;  // position in the pre-synaptic stream
    std::int64_t t_ns = 0;
    int post_id = 0;
    double threshold = 0.0;
    int ltp_writes = 0;
    int ltd_erases = 0;
    int regularize_flips = 0;
};

struct StdpTrace {
    std::vector<StdpTraceRecord> records;
};

inline void save_stdp_trace_csv(const StdpTrace& trace, std::ostream& out) {
    out << "# cmolsim stdp trace\n";
    out << "# columns: event_index,t_ns,post_id,threshold,ltp_writes,ltd_erases,regularize_flips\n";
    for (const StdpTraceRecord& r : trace.records)
        out << r.event_index << ',' << r.t_ns << ',' << r.post_id << ',' << r.threshold << ','
            << r.ltp_writes << ',' << r.ltd_erases << ',' << r.regularize_flips << '\n';
}

inline void save_stdp_trace_csv(const StdpTrace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open for writing: " + path);
    save_stdp_trace_csv(trace, out);
}

// Streams every letter tile by tile through the crossbar with SB-STDP
// enabled. The pre-spike history runs continuously across stimulus
// boundaries. Any post-synaptic spike resets the whole neuron bank, so
// neurons race for each feature; threshold potentiation then hands later
// races to the still-sensitive neurons, which is what spreads the features
// across the population.
inline StdpTrace run_stdp_training(Crossbar& xbar, std::vector<PostNeuronState>& neurons,
                                   const std::vector<LabeledImage>& letters,
                                   const StdpExperimentConfig& cfg, RngStream& rng,
                                   EventTrain* raster = nullptr) {
    cfg.validate();
    if (static_cast<int>(neurons.size()) != xbar.n_post())
        throw std::invalid_argument("run_stdp_training: neuron bank size mismatch");
    StdpTrace trace;
    PreSpikeHistory history(cfg.stdp.history_len);
    std::int64_t t_cursor = 0;
    long event_index = 0;
    for (const LabeledImage& letter : letters) {
        if (raster)
            raster->mark(letter.label, t_cursor);
        for (const Image& tile : letter_to_features(letter.image)) {
            const std::vector<SpikeEvent> events = image_to_spikes(tile, t_cursor, cfg.timing);
            t_cursor += static_cast<std::int64_t>(std::max<std::size_t>(events.size(), 1)) * cfg.timing.period_ns;
            for (const SpikeEvent& ev : events) {
                if (raster)
                    raster->append(ev);
                history.record(ev.neuron_id);
                const std::vector<double> currents = infer_column(xbar, ev.neuron_id, cfg.device);
                const int winner = detail::integrate_race_event(neurons, currents);
                if (winner >= 0) {
                    const PostSpikeUpdate update =
                        on_post_spike(xbar, history, winner, neurons, cfg.stdp, cfg.device, rng);
                    ++neurons[static_cast<std::size_t>(winner)].fired_count;
                    if (raster)
                        raster->append({ev.t_ns, Layer::Post, winner});
                    trace.records.push_back({event_index, ev.t_ns, winner, update.new_threshold,
                                             update.ltp_writes, update.ltd_erases,
                                             update.regularize_flips});
                    for (PostNeuronState& neuron : neurons)  // global reset on every output spike
                        reset(neuron);
                }
                ++event_index;
            }
        }
    }
    return trace;
}

struct FeatureCounts {
    int n_features = 0;
    int n_classes = 0;
    std::vector<long> counts;  // [feature][class]
    EventTrain post_train;     // post-layer spikes with one marker per letter

    FeatureCounts() = default;
    FeatureCounts(int features, int classes)
        : n_features(features), n_classes(classes),
          counts(static_cast<std::size_t>(features) * classes, 0) {}

    long& at(int feature, int cls) { return counts[static_cast<std::size_t>(feature) * n_classes + cls]; }
    long at(int feature, int cls) const { return counts[static_cast<std::size_t>(feature) * n_classes + cls]; }

    long class_total(int cls) const {
        long total = 0;
        for (int i = 0; i < n_features; ++i)
            total += at(i, cls);
        return total;
    }
};

// Per-letter spike counts of the feature layer with learning disabled.
// Thresholds are set per neuron to cancel the packet-size mismatch (every
// neuron then needs about the same number of active events to fire). The
// compensation is quantized to the read-out's discrete threshold levels, so
// a residual per-neuron bias remains, as it does on silicon. The bank runs
// under the same global-reset race as every other read-out loop, so the
// counts measure which neurons match each feature best.
inline FeatureCounts collect_feature_counts(const Crossbar& xbar,
                                            const std::vector<PostNeuronState>& bank,
                                            const std::vector<LabeledImage>& letters,
                                            const StdpExperimentConfig& cfg) {
    cfg.validate();
    if (static_cast<int>(bank.size()) != xbar.n_post())
        throw std::invalid_argument("collect_feature_counts: neuron bank size mismatch");
    const double level_step = 1.0 / static_cast<double>(cfg.threshold_levels - 1);
    std::vector<PostNeuronState> neurons = bank;
    for (PostNeuronState& neuron : neurons) {
        neuron.membrane = 0.0;
        neuron.fired_count = 0;
        const double desired =
            std::min(1.0, cfg.stdp.initial_threshold * neuron.delta / cfg.neuron.base_delta);
        const double level = std::max<double>(1.0, std::round(desired / level_step));
        neuron.threshold = std::min(1.0, level * level_step);
    }
    FeatureCounts fc(xbar.n_post(), static_cast<int>(letters.size()));
    std::int64_t t_cursor = 0;
    for (int cls = 0; cls < static_cast<int>(letters.size()); ++cls) {
        for (PostNeuronState& neuron : neurons)
            reset(neuron);
        fc.post_train.mark(letters[static_cast<std::size_t>(cls)].label, t_cursor);
        for (const Image& tile : letter_to_features(letters[static_cast<std::size_t>(cls)].image)) {
            const std::vector<SpikeEvent> events = image_to_spikes(tile, t_cursor, cfg.timing);
            t_cursor += static_cast<std::int64_t>(std::max<std::size_t>(events.size(), 1)) * cfg.timing.period_ns;
            for (const SpikeEvent& ev : events) {
                const std::vector<double> currents = infer_column(xbar, ev.neuron_id, cfg.device);
                const int winner = detail::integrate_race_event(neurons, currents);
                if (winner < 0)
                    continue;
                ++fc.at(winner, cls);
                fc.post_train.append({ev.t_ns, Layer::Post, winner});
                for (PostNeuronState& neuron : neurons)
                    reset(neuron);
            }
        }
    }
    return fc;
}

struct ClassifierWeights {
    int n_features = 0;
    int n_classes = 0;
    std::vector<double> w;  // [feature][class]
    std::vector<int> empty_classes;  // classes that produced no spikes at all

    ClassifierWeights() = default;
    ClassifierWeights(int features, int classes)
        : n_features(features), n_classes(classes),
          w(static_cast<std::size_t>(features) * classes, 0.0) {}

    double& at(int feature, int cls) { return w[static_cast<std::size_t>(feature) * n_classes + cls]; }
    double at(int feature, int cls) const { return w[static_cast<std::size_t>(feature) * n_classes + cls]; }
};

// w[i][j] = N_ij / N_j; a class with no spikes keeps an all-zero column.
inline ClassifierWeights train_classifier(const FeatureCounts& counts) {
    ClassifierWeights weights(counts.n_features, counts.n_classes);
    for (int cls = 0; cls < counts.n_classes; ++cls) {
        const long total = counts.class_total(cls);
        if (total == 0) {
            weights.empty_classes.push_back(cls);
            continue;
        }
        for (int i = 0; i < counts.n_features; ++i)
            weights.at(i, cls) = static_cast<double>(counts.at(i, cls)) / static_cast<double>(total);
    }
    return weights;
}

struct ClassifyResult {
    EventTrain class_events;
    std::vector<std::vector<int>> class_counts;  // [class][letter]
    std::vector<int> decisions;                  // 1 = correct, 0 = missed/tied/wrong
    double r_ev = 0.0;
    double rr = 0.0;
};

// Replays the recorded feature-layer spikes through the classifier neurons.
// Each class neuron accumulates its weight per incoming spike, fires and
// resets at theta_class. The decision per letter is the unique spike-count
// winner; ties count as no decision.
inline ClassifyResult classify(const ClassifierWeights& weights, const EventTrain& post_train,
                               double theta_class) {
    if (!(theta_class > 0.0))
        throw std::invalid_argument("classify: theta_class must be positive");
    const int n_letters = static_cast<int>(post_train.markers.size());
    ClassifyResult result;
    result.class_counts.assign(static_cast<std::size_t>(weights.n_classes),
                               std::vector<int>(static_cast<std::size_t>(n_letters), 0));
    result.decisions.assign(static_cast<std::size_t>(n_letters), 0);

    std::vector<double> acc(static_cast<std::size_t>(weights.n_classes), 0.0);
    int letter = -1;
    std::size_t next_marker = 0;
    for (std::size_t i = 0; i < post_train.events.size(); ++i) {
        while (next_marker < post_train.markers.size() &&
               post_train.markers[next_marker].event_index == i) {
            ++letter;
            ++next_marker;
            std::fill(acc.begin(), acc.end(), 0.0);  // class neurons reset per letter
            result.class_events.mark(post_train.markers[next_marker - 1].label,
                                     post_train.markers[next_marker - 1].t_ns);
        }
        const SpikeEvent& ev = post_train.events[i];
        if (letter < 0)
            throw std::runtime_error("classify: events before the first pattern marker");
        if (ev.neuron_id < 0 || ev.neuron_id >= weights.n_features)
            throw std::out_of_range("classify: feature index out of range");
        for (int c = 0; c < weights.n_classes; ++c) {
            acc[static_cast<std::size_t>(c)] += weights.at(ev.neuron_id, c);
            if (acc[static_cast<std::size_t>(c)] >= theta_class) {
                acc[static_cast<std::size_t>(c)] = 0.0;
                result.class_events.append({ev.t_ns, Layer::Class, c});
                ++result.class_counts[static_cast<std::size_t>(c)][static_cast<std::size_t>(letter)];
            }
        }
    }

    long correct = 0;
    long incorrect = 0;
    int recognized = 0;
    for (int l = 0; l < n_letters; ++l) {
        int best = -1;
        int best_count = 0;
        bool unique = false;
        for (int c = 0; c < weights.n_classes; ++c) {
            const int count = result.class_counts[static_cast<std::size_t>(c)][static_cast<std::size_t>(l)];
            if (l < weights.n_classes) {
                if (c == l)
                    correct += count;
                else
                    incorrect += count;
            }
            if (count > best_count) {
                best_count = count;
                best = c;
                unique = true;
            } else if (count == best_count && count > 0) {
                unique = false;
            }
        }
        if (unique && best == l) {
            result.decisions[static_cast<std::size_t>(l)] = 1;
            ++recognized;
        }
    }
    result.r_ev = (correct + incorrect) > 0
                      ? static_cast<double>(correct) / static_cast<double>(correct + incorrect)
                      : 0.0;
    result.rr = n_letters > 0 ? static_cast<double>(recognized) / n_letters : 0.0;
    return result;
}

// ---------------------------------------------------------------------------
// Benchmark protocol: random baseline vs SB-STDP-learned features
// ---------------------------------------------------------------------------

struct BenchmarkRun {
    int run_index = 0;
    std::uint64_t seed = 0;
    double r_ev_random = 0.0;
    double rr_random = 0.0;
    double r_ev_learned = 0.0;
    double rr_learned = 0.0;
    int post_spikes_training = 0;
    int neurons_potentiated = 0;  // neurons whose threshold moved above initial
};

struct Quartiles {
    double min = 0.0;
    double q25 = 0.0;
    double median = 0.0;
    double q75 = 0.0;
    double max = 0.0;
};

// Linear-interpolation quantile on a sorted copy.
inline double quantile(std::vector<double> values, double p) {
    if (values.empty())
        throw std::invalid_argument("quantile: empty sample");
    std::sort(values.begin(), values.end());
    const double h = p * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(h);
    if (lo + 1 >= values.size())
        return values.back();
    const double frac = h - static_cast<double>(lo);
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

inline Quartiles summarize(const std::vector<double>& values) {
    return {quantile(values, 0.0), quantile(values, 0.25), quantile(values, 0.5),
            quantile(values, 0.75), quantile(values, 1.0)};
}

struct BenchmarkResult {
    std::uint64_t master_seed = 0;
    std::vector<BenchmarkRun> runs;
    Quartiles r_ev_random;
    Quartiles rr_random;
    Quartiles r_ev_learned;
    Quartiles rr_learned;
};

struct StdpRunArtifacts {
    BenchmarkRun metrics;
    ResistanceMap initial_map;
    ResistanceMap learned_map;
    StdpTrace trace;
    std::vector<double> final_thresholds;
};

// One benchmark run: random init, classifier baseline on the random
// features, on-line SB-STDP training, classifier on the learned features.
inline StdpRunArtifacts run_stdp_benchmark_once(const std::vector<LabeledImage>& letters,
                                                const StdpExperimentConfig& cfg,
                                                std::uint64_t run_seed, int run_index = 0) {
    cfg.validate();
    RngStream root(run_seed);
    RngStream device_rng = root.fork("device");
    RngStream init_rng = root.fork("init");
    RngStream mismatch_rng = root.fork("mismatch");
    RngStream stdp_rng = root.fork("stdp");

    StdpRunArtifacts art;
    art.metrics.run_index = run_index;
    art.metrics.seed = run_seed;

    Crossbar xbar(64, 64);
    form_all(xbar, cfg.device, device_rng);
    init_random_weights(xbar, cfg.device, init_rng);
    art.initial_map = measure_all(xbar, cfg.device);

    const std::vector<PostNeuronState> bank =
        make_neuron_bank(cfg.neuron, xbar.n_post(), cfg.stdp.initial_threshold, mismatch_rng);

    const FeatureCounts counts_random = collect_feature_counts(xbar, bank, letters, cfg);
    const ClassifierWeights weights_random = train_classifier(counts_random);
    const ClassifyResult random_result = classify(weights_random, counts_random.post_train, cfg.theta_class);
    art.metrics.r_ev_random = random_result.r_ev;
    art.metrics.rr_random = random_result.rr;

    std::vector<PostNeuronState> training_neurons = bank;
    art.trace = run_stdp_training(xbar, training_neurons, letters, cfg, stdp_rng);
    art.learned_map = measure_all(xbar, cfg.device);
    art.metrics.post_spikes_training = static_cast<int>(art.trace.records.size());
    for (const PostNeuronState& neuron : training_neurons) {
        art.final_thresholds.push_back(neuron.threshold);
        if (neuron.threshold > cfg.stdp.initial_threshold)
            ++art.metrics.neurons_potentiated;
    }

    const FeatureCounts counts_learned = collect_feature_counts(xbar, bank, letters, cfg);
    const ClassifierWeights weights_learned = train_classifier(counts_learned);
    const ClassifyResult learned_result = classify(weights_learned, counts_learned.post_train, cfg.theta_class);
    art.metrics.r_ev_learned = learned_result.r_ev;
    art.metrics.rr_learned = learned_result.rr;
    return art;
}

inline BenchmarkResult full_stdp_benchmark(const std::vector<LabeledImage>& letters,
                                           const StdpExperimentConfig& cfg, int n_runs,
                                           std::uint64_t master_seed) {
    if (n_runs < 1)
        throw std::invalid_argument("full_stdp_benchmark: n_runs must be >= 1");
    BenchmarkResult result;
    result.master_seed = master_seed;
    std::vector<double> rev_rand, rr_rand, rev_learn, rr_learn;
    for (int run = 0; run < n_runs; ++run) {
        const StdpRunArtifacts art = run_stdp_benchmark_once(
            letters, cfg, derive_seed(master_seed, static_cast<std::uint64_t>(run)), run);
        result.runs.push_back(art.metrics);
        rev_rand.push_back(art.metrics.r_ev_random);
        rr_rand.push_back(art.metrics.rr_random);
        rev_learn.push_back(art.metrics.r_ev_learned);
        rr_learn.push_back(art.metrics.rr_learned);
    }
    result.r_ev_random = summarize(rev_rand);
    result.rr_random = summarize(rr_rand);
    result.r_ev_learned = summarize(rev_learn);
    result.rr_learned = summarize(rr_learn);
    return result;
}

}  // namespace cmolsim
