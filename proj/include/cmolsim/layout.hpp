#pragma once

// Pseudo-CMOL tiling: maps logical crossbar coordinates onto a rectangular
// array of macro-cell tiles. Each tile holds p pre-synaptic neurons, one
// post-synaptic neuron and p synaptic sub-blocks; the square 64x64 core is
// the n = m = 8, p = 1 case with an 8x8 synapse sub-block per tile. All
// logical indices here are 1-based; the crossbar itself indexes from 0.

#include <stdexcept>
#include <utility>

namespace cmolsim {

struct TileGeometry {
    int n = 8;  // tile rows
    int m = 8;  // tile columns
    int p = 1;  // pre-synaptic neurons per tile

    double cell_pitch_w_um = 3.0;
    double cell_pitch_h_um = 5.0;
    double macro_w_um = 55.0;
    double macro_h_um = 51.0;

    int n_post() const { return n * m; }
    int n_pre() const { return p * n * m; }

    void validate() const {
        if (n < 1 || m < 1 || p < 1)
            throw std::invalid_argument("TileGeometry: n, m, p must be >= 1");
        if (!(cell_pitch_w_um > 0 && cell_pitch_h_um > 0 && macro_w_um > 0 && macro_h_um > 0))
            throw std::invalid_argument("TileGeometry: dimensions must be positive");
    }
};

struct PreNeuronPlacement {
    int tile_row;
    int tile_col;
    int local_sub;  // which of the tile's p sub-blocks
};

struct PostNeuronPlacement {
    int tile_row;
    int tile_col;
};

struct TilePlacement {
    int tile_row;
    int tile_col;
    int local_sub;
    int local_row;  // position within the sub-block, from the post index
    int local_col;  // position within the sub-block, from the pre index

    bool operator==(const TilePlacement&) const = default;
};

// Pre-synaptic neurons fill tile columns in groups of p*n: the first group
// goes to the first column of tiles, sub-block by sub-block, top to bottom.
inline PreNeuronPlacement map_pre_neuron(int i, const TileGeometry& geom) {
    if (i < 1 || i > geom.n_pre())
        throw std::out_of_range("map_pre_neuron: index out of range");
    const int per_col = geom.p * geom.n;
    const int c = (i - 1) / per_col;
    const int g = (i - 1) % per_col;
    return {g % geom.n + 1, c + 1, g / geom.n + 1};
}

// Post-synaptic neurons fill tile rows in groups of m.
inline PostNeuronPlacement map_post_neuron(int j, const TileGeometry& geom) {
    if (j < 1 || j > geom.n_post())
        throw std::out_of_range("map_post_neuron: index out of range");
    return {(j - 1) / geom.m + 1, (j - 1) % geom.m + 1};
}

// Synapse (i, j) lands in the tile column of its pre-neuron and the tile row
// of its post-neuron, preserving the full crossbar connectivity.
inline TilePlacement map_synapse(int i, int j, const TileGeometry& geom) {
    if (i < 1 || i > geom.n_pre())
        throw std::out_of_range("map_synapse: pre index out of range");
    if (j < 1 || j > geom.n_post())
        throw std::out_of_range("map_synapse: post index out of range");
    const int per_col = geom.p * geom.n;
    const int g = (i - 1) % per_col;
    return {(j - 1) / geom.m + 1,      // tile_row
            (i - 1) / per_col + 1,     // tile_col
            g / geom.n + 1,            // local_sub
            (j - 1) % geom.m + 1,      // local_row
            g % geom.n + 1};           // local_col
}

// Inverse of map_synapse.
inline std::pair<int, int> synapse_from_placement(const TilePlacement& t, const TileGeometry& geom) {
    if (t.tile_row < 1 || t.tile_row > geom.n || t.tile_col < 1 || t.tile_col > geom.m ||
        t.local_sub < 1 || t.local_sub > geom.p || t.local_row < 1 || t.local_row > geom.m ||
        t.local_col < 1 || t.local_col > geom.n)
        throw std::out_of_range("synapse_from_placement: placement out of range");
    const int per_col = geom.p * geom.n;
    const int i = (t.tile_col - 1) * per_col + (t.local_sub - 1) * geom.n + (t.local_col - 1) + 1;
    const int j = (t.tile_row - 1) * geom.m + (t.local_row - 1) + 1;
    return {i, j};
}

struct CoreArea {
    double width_um;
    double height_um;
};

// Bounding box of the tile array; the fabricated core adds a small assembly
// overhead on top of this.
inline CoreArea area_estimate(const TileGeometry& geom) {
    geom.validate();
    return {geom.m * geom.macro_w_um, geom.n * geom.macro_h_um};
}

}  // namespace cmolsim
