// cmolsim command-line front end: crossbar programming, event-driven
// inference, template-matching and SB-STDP experiment harnesses, layout
// mapping, and AER encoding. Every command echoes the effective
// configuration into its output directory so runs can be reproduced from
// the artifacts alone.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "cmolsim/cmolsim.hpp"
#include "cmolsim/report_json.hpp"

namespace fs = std::filesystem;
using namespace cmolsim;

#ifndef CMOLSIM_DATA_DIR
#define CMOLSIM_DATA_DIR "data"
#endif

namespace {

struct CommonOpts {
    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int runs = 0;  // 0 = take from config
    int jobs = 1;
    std::string out_dir;
};

RunConfig effective_config(const CommonOpts& opts, const std::string& default_out) {
    RunConfig cfg;
    if (!opts.config_path.empty())
        cfg = load_run_config(opts.config_path);
    if (opts.seed_set)
        cfg.seed = opts.seed;
    if (opts.runs > 0)
        cfg.experiment.runs = opts.runs;
    if (!opts.out_dir.empty())
        cfg.out_dir = opts.out_dir;
    else if (opts.config_path.empty())
        cfg.out_dir = default_out;
    cfg.validate();
    return cfg;
}

fs::path prepare_out_dir(const RunConfig& cfg) {
    const fs::path dir(cfg.out_dir);
    fs::create_directories(dir);
    save_run_config(cfg, (dir / "config_used.toml").string());
    return dir;
}

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_runs = false) {
    cmd->add_option("--config", opts.config_path, "configuration file (TOML-style)");
    cmd->add_option("--seed", opts.seed, "master seed (overrides config)")
        ->each([&opts](const std::string&) { opts.seed_set = true; });
    if (with_runs) {
        cmd->add_option("--runs", opts.runs, "number of independent runs (overrides config)");
        cmd->add_option("--jobs", opts.jobs, "worker threads for independent seeds")
            ->check(CLI::PositiveNumber);
    }
    cmd->add_option("--out", opts.out_dir, "output directory");
}

// Runs f(0..n-1) on up to `jobs` threads; results must be stored by index.
// The first exception thrown by a worker is rethrown on the calling thread.
template <typename F>
void parallel_runs(int n, int jobs, F&& f) {
    jobs = std::max(1, std::min(jobs, n));
    if (jobs == 1) {
        for (int i = 0; i < n; ++i)
            f(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(jobs));
    for (int t = 0; t < jobs; ++t) {
        pool.emplace_back([&]() {
            try {
                for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1))
                    f(i);
            } catch (...) {
                const std::lock_guard<std::mutex> lock(error_mutex);
                if (!error)
                    error = std::current_exception();
                next.store(n);
            }
        });
    }
    for (std::thread& th : pool)
        th.join();
    if (error)
        std::rethrow_exception(error);
}

std::vector<LabeledImage> load_glyph_set() {
    return load_image_set(std::string(CMOLSIM_DATA_DIR) + "/ascii_glyphs_8x8.txt");
}

std::vector<LabeledImage> load_letter_set() {
    return load_image_set(std::string(CMOLSIM_DATA_DIR) + "/letters_abcd_32x32.txt");
}

std::vector<LabeledImage> make_shape_set(std::uint64_t master_seed) {
    RngStream shapes_rng = RngStream(master_seed).fork("shapes");
    std::vector<LabeledImage> set;
    int idx = 0;
    for (Image& img : gen_random_shapes(shapes_rng))
        set.push_back({"shape" + std::to_string(idx++), std::move(img)});
    return set;
}

int cmd_program(const CommonOpts& opts, const std::string& pattern_path, const std::string& map_name) {
    const RunConfig cfg = effective_config(opts, "out_program");
    const fs::path dir = prepare_out_dir(cfg);
    const BitPattern pattern = load_bit_pattern(pattern_path);
    Crossbar xbar(pattern.n_post, pattern.n_pre);
    RngStream device_rng = RngStream(cfg.seed).fork("device");
    form_all(xbar, cfg.device, device_rng);
    const ProgramReport report = program_pattern(xbar, pattern, cfg.device, device_rng,
                                                 cfg.experiment.verify_programming,
                                                 cfg.experiment.max_retries);
    save_resistance_map(measure_all(xbar, cfg.device), (dir / map_name).string());

    ordered_json j{{"experiment", "program"},
                   {"seed", cfg.seed},
                   {"n_post", pattern.n_post},
                   {"n_pre", pattern.n_pre},
                   {"total_pulses", report.total_pulses},
                   {"wrong_cells", report.wrong_cells.size()},
                   {"clean", report.clean()}};
    save_json(j, (dir / "program_report.json").string());
    std::cout << "programmed " << pattern.n_post << "x" << pattern.n_pre << " pattern, "
              << report.total_pulses << " pulses, " << report.wrong_cells.size()
              << " cells left misclassified\n";
    return 0;
}

int cmd_infer(const CommonOpts& opts, const std::string& map_path, const std::string& events_path) {
    const RunConfig cfg = effective_config(opts, "out_infer");
    const fs::path dir = prepare_out_dir(cfg);
    const ResistanceMap map = load_resistance_map(map_path);
    const Crossbar xbar = crossbar_from_map(map, cfg.device);
    const EventTrain input = load_event_train(events_path);

    RngStream mismatch_rng = RngStream(cfg.seed).fork("mismatch");
    std::vector<PostNeuronState> neurons =
        make_neuron_bank(cfg.neuron, xbar.n_post(), cfg.experiment.common_threshold, mismatch_rng);

    const int n_patterns = std::max<int>(1, static_cast<int>(input.markers.size()));
    ExperimentReport report;
    report.seed = cfg.seed;
    report.confusion = ConfusionMatrix(xbar.n_post(), n_patterns);
    long correct = 0;
    long incorrect = 0;
    int pattern_idx = -1;
    std::size_t next_marker = 0;
    for (std::size_t i = 0; i < input.events.size(); ++i) {
        while (next_marker < input.markers.size() && input.markers[next_marker].event_index == i) {
            report.raster.mark(input.markers[next_marker].label, input.markers[next_marker].t_ns);
            ++pattern_idx;
            ++next_marker;
            for (PostNeuronState& neuron : neurons)  // each playback starts from reset
                reset(neuron);
        }
        const SpikeEvent& ev = input.events[i];
        if (ev.layer != Layer::Pre)
            continue;
        report.raster.append(ev);
        const int column = pattern_idx < 0 ? 0 : pattern_idx;
        const std::vector<double> currents = infer_column(xbar, ev.neuron_id, cfg.device);
        const int winner = detail::integrate_race_event(neurons, currents);
        if (winner < 0)
            continue;
        report.raster.append({ev.t_ns, Layer::Post, winner});
        ++report.confusion.at(winner, column);
        if (winner == column)
            ++correct;
        else
            ++incorrect;
        for (PostNeuronState& neuron : neurons)
            reset(neuron);
    }
    report.r_ev = (correct + incorrect) > 0
                      ? static_cast<double>(correct) / static_cast<double>(correct + incorrect)
                      : 0.0;
    report.energy = energy_report(cfg.experiment.i_vdd_amp, cfg.experiment.v_dd,
                                  static_cast<double>(cfg.timing.period_ns) * 1e-9, xbar.n_post());

    save_event_train(report.raster, (dir / "raster.csv").string());
    save_confusion_csv(report.confusion, (dir / "confusion.csv").string());
    save_json(to_json(report, "infer"), (dir / "report.json").string());
    std::cout << "processed " << input.events.size() << " events, correct-spike ratio "
              << report.r_ev << "\n";
    return 0;
}

int run_match(const CommonOpts& opts, const std::string& set_kind,
              const std::string& templates_path, const std::string& inputs_path) {
    RunConfig cfg = effective_config(opts, "out_match_" + set_kind);
    cfg.experiment.kind = set_kind == "shapes" ? "template_shapes" : "template_ascii";
    const fs::path dir = prepare_out_dir(cfg);

    std::vector<LabeledImage> templates;
    if (!templates_path.empty())
        templates = load_image_set(templates_path);
    else if (set_kind == "shapes")
        templates = make_shape_set(cfg.seed);
    else
        templates = load_glyph_set();
    const std::vector<LabeledImage> inputs = inputs_path.empty() ? templates : load_image_set(inputs_path);

    const int n_runs = cfg.experiment.runs;
    std::vector<ExperimentReport> reports(static_cast<std::size_t>(n_runs));
    const TemplateMatchingConfig tm_cfg = cfg.template_config();
    parallel_runs(n_runs, opts.jobs, [&](int k) {
        reports[static_cast<std::size_t>(k)] = run_template_matching(
            templates, inputs, tm_cfg, derive_seed(cfg.seed, static_cast<std::uint64_t>(k)));
    });

    std::vector<double> ratios;
    for (const ExperimentReport& r : reports)
        ratios.push_back(r.r_ev);
    double mean = 0.0;
    for (double v : ratios)
        mean += v;
    mean /= static_cast<double>(ratios.size());
    double var = 0.0;
    for (double v : ratios)
        var += (v - mean) * (v - mean);
    const double stdev = ratios.size() > 1 ? std::sqrt(var / static_cast<double>(ratios.size() - 1)) : 0.0;

    ordered_json per_run = ordered_json::array();
    for (const ExperimentReport& r : reports)
        per_run.push_back(ordered_json{{"seed", r.seed}, {"r_ev", r.r_ev}, {"rr", r.rr}});
    ordered_json j{{"experiment", cfg.experiment.kind},
                   {"master_seed", cfg.seed},
                   {"n_runs", n_runs},
                   {"mean_r_ev", mean},
                   {"std_r_ev", stdev},
                   {"energy", to_json(reports.front().energy)},
                   {"runs", per_run}};
    save_json(j, (dir / "summary.json").string());
    save_event_train(reports.front().raster, (dir / "raster_run0.csv").string());
    save_confusion_csv(reports.front().confusion, (dir / "confusion_run0.csv").string());
    if (templates_path.empty() && set_kind == "shapes")
        save_image_set(templates, (dir / "shapes.txt").string());
    std::cout << set_kind << " template matching over " << n_runs << " runs: mean correct-spike ratio "
              << mean << ", std " << stdev << "\n";
    return 0;
}

int cmd_train_stdp(const CommonOpts& opts, const std::string& letters_path) {
    const RunConfig cfg = effective_config(opts, "out_stdp");
    const fs::path dir = prepare_out_dir(cfg);
    const std::vector<LabeledImage> letters =
        letters_path.empty() ? load_letter_set() : load_image_set(letters_path);

    const StdpExperimentConfig sx_cfg = cfg.stdp_config();
    const int n_runs = cfg.experiment.runs;
    std::vector<StdpRunArtifacts> artifacts(static_cast<std::size_t>(n_runs));
    parallel_runs(n_runs, opts.jobs, [&](int k) {
        artifacts[static_cast<std::size_t>(k)] = run_stdp_benchmark_once(
            letters, sx_cfg, derive_seed(cfg.seed, static_cast<std::uint64_t>(k)), k);
    });

    BenchmarkResult result;
    result.master_seed = cfg.seed;
    std::vector<double> rev_rand, rr_rand, rev_learn, rr_learn;
    for (const StdpRunArtifacts& art : artifacts) {
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

    for (const StdpRunArtifacts& art : artifacts) {
        const std::string name = "run_" + std::to_string(art.metrics.run_index) + "_seed_" +
                                 std::to_string(art.metrics.seed) + ".json";
        save_json(to_json(art.metrics), (dir / name).string());
    }
    save_json(to_json(result), (dir / "stats.json").string());
    save_stdp_trace_csv(artifacts.front().trace, (dir / "trace_run0.csv").string());
    save_resistance_map(artifacts.front().initial_map, (dir / "map_initial_run0.csv").string());
    save_resistance_map(artifacts.front().learned_map, (dir / "map_learned_run0.csv").string());
    std::cout << "stdp benchmark over " << n_runs << " runs: median R_ev random "
              << result.r_ev_random.median << " -> learned " << result.r_ev_learned.median
              << ", median RR random " << result.rr_random.median << " -> learned "
              << result.rr_learned.median << "\n";
    return 0;
}

int cmd_layout(const CommonOpts& opts, int n, int m, int p) {
    RunConfig cfg = effective_config(opts, "out_layout");
    const fs::path dir = prepare_out_dir(cfg);
    TileGeometry geom;
    geom.n = n;
    geom.m = m;
    geom.p = p;
    geom.validate();

    std::ofstream csv(dir / "placement.csv");
    if (!csv)
        throw std::runtime_error("cannot open placement.csv for writing");
    csv << "# cmolsim synapse placement; 1-based logical indices\n";
    csv << "pre,post,tile_row,tile_col,local_sub,local_row,local_col\n";
    for (int i = 1; i <= geom.n_pre(); ++i) {
        for (int j = 1; j <= geom.n_post(); ++j) {
            const TilePlacement t = map_synapse(i, j, geom);
            csv << i << ',' << j << ',' << t.tile_row << ',' << t.tile_col << ',' << t.local_sub
                << ',' << t.local_row << ',' << t.local_col << '\n';
        }
    }
    const CoreArea area = area_estimate(geom);
    ordered_json j{{"n", geom.n},
                   {"m", geom.m},
                   {"p", geom.p},
                   {"n_pre", geom.n_pre()},
                   {"n_post", geom.n_post()},
                   {"macro_w_um", geom.macro_w_um},
                   {"macro_h_um", geom.macro_h_um},
                   {"cell_pitch_w_um", geom.cell_pitch_w_um},
                   {"cell_pitch_h_um", geom.cell_pitch_h_um},
                   {"core_width_um", area.width_um},
                   {"core_height_um", area.height_um}};
    save_json(j, (dir / "area.json").string());
    std::cout << "tile array " << geom.n << "x" << geom.m << " (p=" << geom.p << "): "
              << geom.n_pre() * geom.n_post() << " placements, core " << area.width_um << "um x "
              << area.height_um << "um\n";
    return 0;
}

int cmd_encode(const CommonOpts& opts, const std::string& images_path, const std::string& events_name) {
    const RunConfig cfg = effective_config(opts, "out_encode");
    const fs::path dir = prepare_out_dir(cfg);
    const std::vector<LabeledImage> images = load_image_set(images_path);
    EventTrain train;
    std::int64_t t_cursor = 0;
    for (const LabeledImage& li : images) {
        train.mark(li.label, t_cursor);
        for (const SpikeEvent& ev : image_to_spikes(li.image, t_cursor, cfg.timing))
            train.append(ev);
        const std::int64_t n_events =
            static_cast<std::int64_t>(li.image.black_count()) * cfg.timing.repeats_per_pattern;
        t_cursor += std::max<std::int64_t>(n_events, 1) * cfg.timing.period_ns;
    }
    save_event_train(train, (dir / events_name).string());
    std::cout << "encoded " << images.size() << " patterns into " << train.events.size()
              << " events\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"behavioral simulator of a CMOS-memristor crossbar core with stochastic binary STDP"};
    app.require_subcommand(1);

    CommonOpts program_opts, infer_opts, match_opts, stdp_opts, layout_opts, encode_opts, run_opts,
        init_opts;

    auto* program = app.add_subcommand("program", "program a crossbar from a bit pattern file");
    std::string pattern_path, map_name = "resistance_map.csv";
    program->add_option("--pattern", pattern_path, "bit pattern file (text grid of 0/1)")->required();
    program->add_option("--map", map_name, "name of the resistance map file");
    add_common(program, program_opts);

    auto* infer = app.add_subcommand("infer", "replay an event file against a programmed map");
    std::string map_path, events_path;
    infer->add_option("--map", map_path, "resistance map CSV")->required();
    infer->add_option("--events", events_path, "event list CSV")->required();
    add_common(infer, infer_opts);

    auto* match = app.add_subcommand("match", "template-matching experiment over independent seeds");
    std::string match_set = "ascii", templates_path, inputs_path;
    match->add_option("--set", match_set, "ascii | shapes")
        ->check(CLI::IsMember({"ascii", "shapes"}));
    match->add_option("--templates", templates_path, "override template image set");
    match->add_option("--inputs", inputs_path, "override input image set");
    add_common(match, match_opts, true);

    auto* train = app.add_subcommand("train-stdp", "SB-STDP learning benchmark (random vs learned)");
    std::string letters_path;
    train->add_option("--letters", letters_path, "override 32x32 letter image set");
    add_common(train, stdp_opts, true);

    auto* layout = app.add_subcommand("layout", "emit the pseudo-CMOL placement table and area");
    int geo_n = 8, geo_m = 8, geo_p = 1;
    layout->add_option("--n", geo_n, "tile rows");
    layout->add_option("--m", geo_m, "tile columns");
    layout->add_option("--p", geo_p, "pre-synaptic neurons per tile");
    add_common(layout, layout_opts);

    auto* encode = app.add_subcommand("encode", "convert an image set to an AER event list");
    std::string images_path, events_name = "events.csv";
    encode->add_option("--images", images_path, "image set file")->required();
    encode->add_option("--events", events_name, "name of the event list file");
    add_common(encode, encode_opts);

    auto* runcmd = app.add_subcommand("run", "run the experiment selected in the configuration");
    add_common(runcmd, run_opts, true);

    auto* init = app.add_subcommand("init-config", "write the default configuration file");
    std::string init_path = "cmolsim.toml";
    init->add_option("--file", init_path, "where to write the default configuration");

    CLI11_PARSE(app, argc, argv);

    try {
        if (program->parsed())
            return cmd_program(program_opts, pattern_path, map_name);
        if (infer->parsed())
            return cmd_infer(infer_opts, map_path, events_path);
        if (match->parsed())
            return run_match(match_opts, match_set, templates_path, inputs_path);
        if (train->parsed())
            return cmd_train_stdp(stdp_opts, letters_path);
        if (layout->parsed())
            return cmd_layout(layout_opts, geo_n, geo_m, geo_p);
        if (encode->parsed())
            return cmd_encode(encode_opts, images_path, events_name);
        if (init->parsed()) {
            save_run_config(RunConfig{}, init_path);
            std::cout << "wrote " << init_path << "\n";
            return 0;
        }
        if (runcmd->parsed()) {
            RunConfig cfg = effective_config(run_opts, "out_run");
            if (cfg.experiment.kind == "template_ascii")
                return run_match(run_opts, "ascii", "", "");
            if (cfg.experiment.kind == "template_shapes")
                return run_match(run_opts, "shapes", "", "");
            return cmd_train_stdp(run_opts, "");
        }
    } catch (const ConfigError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 1;
    } catch (const std::out_of_range& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
