#pragma once

// Address-event encoding: binary images to spike trains with hardware
// timing, 32x32 letters split into 8x8 feature tiles, and the text formats
// for images and event lists.

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cmolsim {

enum class Layer { Pre, Post, Class };

inline const char* layer_name(Layer layer) {
    switch (layer) {
    case Layer::Pre: return "pre";
    case Layer::Post: return "post";
    case Layer::Class: return "class";
    }
    throw std::invalid_argument("layer_name: unknown layer");
}

inline Layer layer_from_name(const std::string& name) {
    if (name == "pre") return Layer::Pre;
    if (name == "post") return Layer::Post;
    if (name == "class") return Layer::Class;
    throw std::runtime_error("unknown layer name: " + name);
}

struct SpikeEvent {
    std::int64_t t_ns = 0;
    Layer layer = Layer::Pre;
    int neuron_id = 0;

    bool operator==(const SpikeEvent&) const = default;
};

struct TimingConfig {
    std::int64_t spike_width_ns = 200;
    std::int64_t period_ns = 220;  // spike width plus inter-spike stand-by
    int repeats_per_pattern = 10;

    void validate() const {
        if (spike_width_ns <= 0)
            throw std::invalid_argument("TimingConfig: spike width must be positive");
        if (period_ns < spike_width_ns)
            throw std::invalid_argument("TimingConfig: period must be >= spike width");
        if (repeats_per_pattern < 1)
            throw std::invalid_argument("TimingConfig: repeats must be >= 1");
    }
};

struct Image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // row-major, 1 = black

    Image() = default;
    Image(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, 0) {}

    std::uint8_t& at(int row, int col) { return pixels[static_cast<std::size_t>(row) * width + col]; }
    std::uint8_t at(int row, int col) const { return pixels[static_cast<std::size_t>(row) * width + col]; }

    int black_count() const {
        int n = 0;
        for (auto p : pixels)
            n += p ? 1 : 0;
        return n;
    }
};

// Row-major pixel-to-input-neuron assignment.
inline int pixel_to_neuron(int row, int col, int width = 8) {
    if (row < 0 || col < 0 || col >= width)
        throw std::out_of_range("pixel_to_neuron: pixel out of range");
    return row * width + col;
}

inline std::pair<int, int> neuron_to_pixel(int neuron_id, int width = 8) {
    if (neuron_id < 0 || width < 1)
        throw std::out_of_range("neuron_to_pixel: bad arguments");
    return {neuron_id / width, neuron_id % width};
}

// One spike per black pixel, raster-scan order, one event per period with no
// gaps for white pixels; the whole list repeats repeats_per_pattern times.
inline std::vector<SpikeEvent> image_to_spikes(const Image& image, std::int64_t start_t_ns,
                                               const TimingConfig& timing) {
    timing.validate();
    std::vector<SpikeEvent> events;
    events.reserve(static_cast<std::size_t>(image.black_count()) * timing.repeats_per_pattern);
    std::int64_t slot = 0;
    for (int rep = 0; rep < timing.repeats_per_pattern; ++rep) {
        for (int row = 0; row < image.height; ++row) {
            for (int col = 0; col < image.width; ++col) {
                if (!image.at(row, col))
                    continue;
                events.push_back({start_t_ns + slot * timing.period_ns, Layer::Pre,
                                  pixel_to_neuron(row, col, image.width)});
                ++slot;
            }
        }
    }
    return events;
}

// 32x32 letter -> 16 non-overlapping 8x8 tiles, row-major over the 4x4 grid.
inline std::vector<Image> letter_to_features(const Image& letter) {
    if (letter.width != 32 || letter.height != 32)
        throw std::invalid_argument("letter_to_features: expected a 32x32 image");
    std::vector<Image> tiles;
    tiles.reserve(16);
    for (int tr = 0; tr < 4; ++tr) {
        for (int tc = 0; tc < 4; ++tc) {
            Image tile(8, 8);
            for (int r = 0; r < 8; ++r)
                for (int c = 0; c < 8; ++c)
                    tile.at(r, c) = letter.at(tr * 8 + r, tc * 8 + c);
            tiles.push_back(std::move(tile));
        }
    }
    return tiles;
}

// ---------------------------------------------------------------------------
// Event list file: CSV columns (t_ns, layer, neuron_id). Pattern boundaries
// are marked with "#pattern <label>" lines placed before the first event of
// the pattern.
// ---------------------------------------------------------------------------

struct PatternMarker {
    std::size_t event_index = 0;  // index of the first event of this pattern
    std::int64_t t_ns = 0;
    std::string label;
};

struct EventTrain {
    std::vector<SpikeEvent> events;
    std::vector<PatternMarker> markers;

    void mark(const std::string& label, std::int64_t t_ns) {
        markers.push_back({events.size(), t_ns, label});
    }
    void append(const SpikeEvent& ev) { events.push_back(ev); }
};

inline void save_event_train(const EventTrain& train, std::ostream& out) {
    out << "# cmolsim event list\n";
    out << "# columns: t_ns,layer,neuron_id\n";
    std::size_t next_marker = 0;
    for (std::size_t i = 0; i <= train.events.size(); ++i) {
        while (next_marker < train.markers.size() && train.markers[next_marker].event_index == i)
            out << "#pattern " << train.markers[next_marker++].label << '\n';
        if (i == train.events.size())
            break;
        const SpikeEvent& ev = train.events[i];
        out << ev.t_ns << ',' << layer_name(ev.layer) << ',' << ev.neuron_id << '\n';
    }
}

inline void save_event_train(const EventTrain& train, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open for writing: " + path);
    save_event_train(train, out);
}

inline EventTrain load_event_train(std::istream& in) {
    EventTrain train;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        if (line.rfind("#pattern ", 0) == 0) {
            train.mark(line.substr(9), 0);
            continue;
        }
        if (line[0] == '#')
            continue;
        std::stringstream ss(line);
        std::string t_field, layer_field, id_field;
        if (!std::getline(ss, t_field, ',') || !std::getline(ss, layer_field, ',') ||
            !std::getline(ss, id_field, ','))
            throw std::runtime_error("event list: malformed line: " + line);
        train.events.push_back({std::stoll(t_field), layer_from_name(layer_field), std::stoi(id_field)});
        if (!train.markers.empty() && train.markers.back().event_index == train.events.size() - 1)
            train.markers.back().t_ns = train.events.back().t_ns;
    }
    return train;
}

inline EventTrain load_event_train(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open event list: " + path);
    return load_event_train(in);
}

// ---------------------------------------------------------------------------
// Image files: text grid of 0/1 characters. A file may hold a sequence of
// labeled images, each introduced by a "#pattern <label>" line.
// ---------------------------------------------------------------------------

struct LabeledImage {
    std::string label;
    Image image;
};

inline Image parse_image(const std::vector<std::string>& rows) {
    if (rows.empty())
        throw std::runtime_error("image: no rows");
    Image img(static_cast<int>(rows.front().size()), static_cast<int>(rows.size()));
    for (int r = 0; r < img.height; ++r) {
        const std::string& row = rows[static_cast<std::size_t>(r)];
        if (static_cast<int>(row.size()) != img.width)
            throw std::runtime_error("image: ragged rows");
        for (int c = 0; c < img.width; ++c) {
            if (row[static_cast<std::size_t>(c)] != '0' && row[static_cast<std::size_t>(c)] != '1')
                throw std::runtime_error("image: pixels must be 0 or 1");
            img.at(r, c) = row[static_cast<std::size_t>(c)] == '1' ? 1 : 0;
        }
    }
    return img;
}

inline std::vector<LabeledImage> load_image_set(std::istream& in) {
    std::vector<LabeledImage> set;
    std::string label;
    std::vector<std::string> rows;
    std::string line;
    auto flush = [&] {
        if (!rows.empty()) {
            set.push_back({label, parse_image(rows)});
            rows.clear();
        }
    };
    while (std::getline(in, line)) {
        if (line.rfind("#pattern ", 0) == 0) {
            flush();
            label = line.substr(9);
            continue;
        }
        if (line.empty() || line[0] == '#')
            continue;
        rows.push_back(line);
    }
    flush();
    return set;
}

inline std::vector<LabeledImage> load_image_set(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open image set: " + path);
    return load_image_set(in);
}

inline void save_image_set(const std::vector<LabeledImage>& set, std::ostream& out) {
    for (const LabeledImage& li : set) {
        out << "#pattern " << li.label << '\n';
        for (int r = 0; r < li.image.height; ++r) {
            for (int c = 0; c < li.image.width; ++c)
                out << (li.image.at(r, c) ? '1' : '0');
            out << '\n';
        }
    }
}

inline void save_image_set(const std::vector<LabeledImage>& set, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open for writing: " + path);
    save_image_set(set, out);
}

}  // namespace cmolsim
