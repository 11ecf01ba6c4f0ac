#include <doctest.h>

#include <map>
#include <set>
#include <tuple>

#include "cmolsim/layout.hpp"

using namespace cmolsim;

namespace {

TileGeometry square_geom() { return TileGeometry{}; }

TileGeometry asym_geom() {
    TileGeometry g;
    g.n = 4;
    g.m = 4;
    g.p = 3;
    return g;
}

}  // namespace

TEST_CASE("pre-neuron groups fill tile columns") {
    const TileGeometry g = square_geom();
    CHECK(map_pre_neuron(1, g).tile_col == 1);
    CHECK(map_pre_neuron(8, g).tile_col == 1);
    CHECK(map_pre_neuron(9, g).tile_col == 2);
    CHECK(map_pre_neuron(16, g).tile_col == 2);
    CHECK(map_pre_neuron(1, g).tile_row == 1);
    CHECK(map_pre_neuron(8, g).tile_row == 8);
    CHECK(map_pre_neuron(64, g).tile_col == 8);

    // bijection onto the 64 tiles in the square case
    std::set<std::pair<int, int>> tiles;
    for (int i = 1; i <= 64; ++i) {
        const PreNeuronPlacement p = map_pre_neuron(i, g);
        CHECK(p.local_sub == 1);
        tiles.insert({p.tile_row, p.tile_col});
    }
    CHECK(tiles.size() == 64);
    CHECK_THROWS_AS(map_pre_neuron(0, g), std::out_of_range);
    CHECK_THROWS_AS(map_pre_neuron(65, g), std::out_of_range);
}

TEST_CASE("post-neuron groups fill tile rows") {
    const TileGeometry g = square_geom();
    CHECK(map_post_neuron(1, g).tile_row == 1);
    CHECK(map_post_neuron(8, g).tile_row == 1);
    CHECK(map_post_neuron(9, g).tile_row == 2);
    CHECK(map_post_neuron(64, g).tile_row == 8);

    std::set<std::pair<int, int>> tiles;
    for (int j = 1; j <= 64; ++j) {
        const PostNeuronPlacement p = map_post_neuron(j, g);
        tiles.insert({p.tile_row, p.tile_col});
    }
    CHECK(tiles.size() == 64);
    CHECK_THROWS_AS(map_post_neuron(65, g), std::out_of_range);
}

TEST_CASE("synapse placement corners") {
    const TileGeometry g = square_geom();
    const TilePlacement a = map_synapse(1, 1, g);
    CHECK(a.tile_row == 1);
    CHECK(a.tile_col == 1);
    CHECK(a.local_row == 1);
    CHECK(a.local_col == 1);
    const TilePlacement b = map_synapse(64, 64, g);
    CHECK(b.tile_row == 8);
    CHECK(b.tile_col == 8);
    CHECK(b.local_row == 8);
    CHECK(b.local_col == 8);
    CHECK_THROWS_AS(map_synapse(0, 1, g), std::out_of_range);
    CHECK_THROWS_AS(map_synapse(1, 65, g), std::out_of_range);
}

static void check_geometry(const TileGeometry& g) {
    const int n_pre = g.n_pre();
    const int n_post = g.n_post();

    std::set<std::tuple<int, int, int, int, int>> placements;
    std::map<std::pair<int, int>, int> tile_synapses;
    for (int i = 1; i <= n_pre; ++i) {
        for (int j = 1; j <= n_post; ++j) {
            const TilePlacement t = map_synapse(i, j, g);

            // ranges
            CHECK(t.tile_row >= 1);
            CHECK(t.tile_row <= g.n);
            CHECK(t.tile_col >= 1);
            CHECK(t.tile_col <= g.m);
            CHECK(t.local_sub >= 1);
            CHECK(t.local_sub <= g.p);
            CHECK(t.local_row >= 1);
            CHECK(t.local_row <= g.m);
            CHECK(t.local_col >= 1);
            CHECK(t.local_col <= g.n);

            // connectivity is preserved: pre fixes the tile column, post the tile row
            const PreNeuronPlacement pre = map_pre_neuron(i, g);
            const PostNeuronPlacement post = map_post_neuron(j, g);
            CHECK(t.tile_col == pre.tile_col);
            CHECK(t.local_sub == pre.local_sub);
            CHECK(t.tile_row == post.tile_row);

            // exhaustive round-trip through the inverse
            const auto [ri, rj] = synapse_from_placement(t, g);
            CHECK(ri == i);
            CHECK(rj == j);

            placements.insert({t.tile_row, t.tile_col, t.local_sub, t.local_row, t.local_col});
            ++tile_synapses[{t.tile_row, t.tile_col}];
        }
    }
    // bijection: every placement distinct, M x N of them
    CHECK(static_cast<int>(placements.size()) == n_pre * n_post);

    // every tile holds p sub-blocks of n x m synapses
    CHECK(static_cast<int>(tile_synapses.size()) == g.n * g.m);
    for (const auto& [tile, count] : tile_synapses)
        CHECK(count == g.p * g.n * g.m);

    // every tile hosts exactly p pre-neurons and one post-neuron
    std::map<std::pair<int, int>, int> tile_pre, tile_post;
    for (int i = 1; i <= n_pre; ++i) {
        const PreNeuronPlacement p = map_pre_neuron(i, g);
        ++tile_pre[{p.tile_row, p.tile_col}];
    }
    for (int j = 1; j <= n_post; ++j) {
        const PostNeuronPlacement p = map_post_neuron(j, g);
        ++tile_post[{p.tile_row, p.tile_col}];
    }
    CHECK(static_cast<int>(tile_pre.size()) == g.n * g.m);
    CHECK(static_cast<int>(tile_post.size()) == g.n * g.m);
    for (const auto& [tile, count] : tile_pre)
        CHECK(count == g.p);
    for (const auto& [tile, count] : tile_post)
        CHECK(count == 1);
}

TEST_CASE("square 8x8 tiling is a bijection with preserved connectivity") {
    check_geometry(square_geom());
}

TEST_CASE("asymmetric tiling (n=4, m=4, p=3) covers all 768 placements") {
    const TileGeometry g = asym_geom();
    CHECK(g.n_pre() == 48);
    CHECK(g.n_post() == 16);
    CHECK(g.n_pre() * g.n_post() == 768);
    check_geometry(g);
}

TEST_CASE("area estimate") {
    const CoreArea square = area_estimate(square_geom());
    CHECK(square.width_um == doctest::Approx(440.0));
    CHECK(square.height_um == doctest::Approx(408.0));

    TileGeometry single;
    single.n = 1;
    single.m = 1;
    const CoreArea one = area_estimate(single);
    CHECK(one.width_um == doctest::Approx(55.0));
    CHECK(one.height_um == doctest::Approx(51.0));

    TileGeometry big;
    big.n = 16;
    big.m = 16;
    const CoreArea sixteen = area_estimate(big);
    CHECK(sixteen.width_um == doctest::Approx(880.0));
    CHECK(sixteen.height_um == doctest::Approx(816.0));
}

TEST_CASE("geometry validation") {
    TileGeometry g;
    g.p = 0;
    CHECK_THROWS_AS(g.validate(), std::invalid_argument);
}
