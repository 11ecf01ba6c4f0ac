#include <doctest.h>

#include <cmath>
#include <sstream>

#include "cmolsim/crossbar.hpp"
#include "cmolsim/encoding.hpp"

using namespace cmolsim;

namespace {

DeviceParams no_fail_params() {
    DeviceParams p;
    p.p_program_fail = 0.0;
    return p;
}

Crossbar formed_crossbar(int n_post, int n_pre, const DeviceParams& params, RngStream& rng) {
    Crossbar xbar(n_post, n_pre);
    form_all(xbar, params, rng);
    return xbar;
}

}  // namespace

TEST_CASE("form_all forms every cell, any size") {
    const DeviceParams params = no_fail_params();
    RngStream rng(1);
    for (const auto& [rows, cols] : {std::pair{64, 64}, std::pair{2, 2}}) {
        Crossbar xbar(rows, cols);
        form_all(xbar, params, rng);
        for (int post = 0; post < rows; ++post)
            for (int pre = 0; pre < cols; ++pre)
                CHECK(xbar.cell(post, pre).state != MemState::Unformed);
    }
}

TEST_CASE("re-forming keeps states and resamples resistances") {
    const DeviceParams params = no_fail_params();
    RngStream rng(2);
    Crossbar xbar = formed_crossbar(8, 8, params, rng);
    BitPattern checker(8, 8);
    for (int post = 0; post < 8; ++post)
        for (int pre = 0; pre < 8; ++pre)
            checker.at(post, pre) = static_cast<std::uint8_t>((post + pre) % 2);
    program_pattern(xbar, checker, params, rng);

    const ResistanceMap before = measure_all(xbar, params);
    form_all(xbar, params, rng);
    const ResistanceMap after = measure_all(xbar, params);
    int resampled = 0;
    for (int post = 0; post < 8; ++post) {
        for (int pre = 0; pre < 8; ++pre) {
            CHECK((xbar.cell(post, pre).state == MemState::Lrs) == (checker.at(post, pre) != 0));
            if (after.at(post, pre) != before.at(post, pre))
                ++resampled;
        }
    }
    CHECK(resampled > 0);
}

TEST_CASE("program_pattern writes the exact pattern when failure-free") {
    const DeviceParams params = no_fail_params();
    RngStream rng(3);
    Crossbar xbar = formed_crossbar(64, 64, params, rng);

    BitPattern ones(64, 64);
    for (auto& b : ones.bits)
        b = 1;
    const ProgramReport report = program_pattern(xbar, ones, params, rng);
    CHECK(report.clean());
    for (int post = 0; post < 64; ++post)
        for (int pre = 0; pre < 64; ++pre)
            CHECK(xbar.cell(post, pre).state == MemState::Lrs);

    // with p_fail = 0 and verify on, one pulse per cell suffices
    CHECK(report.total_pulses == 64 * 64);
}

TEST_CASE("program_pattern rejects mismatched dimensions") {
    const DeviceParams params = no_fail_params();
    RngStream rng(4);
    Crossbar xbar = formed_crossbar(8, 8, params, rng);
    CHECK_THROWS_AS(program_pattern(xbar, BitPattern(8, 9), params, rng), std::invalid_argument);
}

TEST_CASE("verify-and-retry drives the residual error to zero") {
    DeviceParams params;  // p_program_fail = 0.01
    RngStream rng(5);
    Crossbar xbar = formed_crossbar(64, 64, params, rng);
    BitPattern checker(64, 64);
    for (int post = 0; post < 64; ++post)
        for (int pre = 0; pre < 64; ++pre)
            checker.at(post, pre) = static_cast<std::uint8_t>((post + pre) % 2);
    // expected residual fraction after 1+5 attempts is p_fail^6 ~ 1e-12
    const ProgramReport report = program_pattern(xbar, checker, params, rng, true, 5);
    CHECK(report.clean());
    for (int post = 0; post < 64; ++post)
        for (int pre = 0; pre < 64; ++pre)
            CHECK((xbar.cell(post, pre).state == MemState::Lrs) == (checker.at(post, pre) != 0));
}

TEST_CASE("programmed glyph templates stay recognizable") {
    DeviceParams params;  // defaults with programming stochasticity
    RngStream rng(6);
    const std::vector<LabeledImage> glyphs =
        load_image_set(std::string(CMOLSIM_DATA_DIR) + "/ascii_glyphs_8x8.txt");
    REQUIRE(glyphs.size() == 64);

    Crossbar xbar = formed_crossbar(64, 64, params, rng);
    BitPattern pattern(64, 64);
    for (int j = 0; j < 64; ++j)
        for (int p = 0; p < 64; ++p)
            pattern.at(j, p) = glyphs[static_cast<std::size_t>(j)].image.pixels[static_cast<std::size_t>(p)];
    program_pattern(xbar, pattern, params, rng);

    for (int j = 0; j < 64; ++j) {
        int match = 0;
        for (int p = 0; p < 64; ++p) {
            const bool lrs = is_lrs_resistance(measure(xbar.cell(j, p), params));
            if (lrs == (pattern.at(j, p) != 0))
                ++match;
        }
        CHECK(match >= 58);  // >= 90% of the 64 pixels on the right side
    }
}

TEST_CASE("infer_column reproduces the per-cell currents") {
    const DeviceParams params = no_fail_params();
    RngStream rng(7);
    Crossbar xbar(64, 64);

    SUBCASE("all-LRS column at 10k gives 30uA everywhere") {
        for (int post = 0; post < 64; ++post)
            for (int pre = 0; pre < 64; ++pre)
                xbar.cell(post, pre) = {MemState::Lrs, 10e3};
        const std::vector<double> currents = infer_column(xbar, 5, params);
        for (double i : currents)
            CHECK(i == 0.3 / 10e3);
    }

    SUBCASE("all-HRS column at 100k gives 3uA everywhere") {
        for (int post = 0; post < 64; ++post)
            for (int pre = 0; pre < 64; ++pre)
                xbar.cell(post, pre) = {MemState::Hrs, 100e3};
        const std::vector<double> currents = infer_column(xbar, 63, params);
        for (double i : currents)
            CHECK(i == 0.3 / 100e3);
    }

    SUBCASE("mixed column matches the brute-force per-cell oracle") {
        form_all(xbar, params, rng);
        BitPattern random_bits(64, 64);
        RngStream bits_rng(8);
        for (auto& b : random_bits.bits)
            b = bits_rng.bernoulli(0.5) ? 1 : 0;
        program_pattern(xbar, random_bits, params, rng);
        for (int pre : {0, 17, 63}) {
            const std::vector<double> currents = infer_column(xbar, pre, params);
            for (int post = 0; post < 64; ++post) {
                const double expected = read_current(measure(xbar.cell(post, pre), params), kReadVoltage);
                CHECK(currents[static_cast<std::size_t>(post)] == expected);
            }
        }
    }

    SUBCASE("index out of range") {
        CHECK_THROWS_AS(infer_column(xbar, 64, params), std::out_of_range);
        CHECK_THROWS_AS(infer_column(xbar, -1, params), std::out_of_range);
    }
}

TEST_CASE("inference is read-only") {
    const DeviceParams params = no_fail_params();
    RngStream rng(9);
    Crossbar xbar = formed_crossbar(16, 16, params, rng);
    const ResistanceMap before = measure_all(xbar, params);
    for (int pre = 0; pre < 16; ++pre)
        (void)infer_column(xbar, pre, params);
    const ResistanceMap after = measure_all(xbar, params);
    CHECK(before.ohm == after.ohm);
}

TEST_CASE("current-side and resistance-side classification agree cell by cell") {
    DeviceParams params;
    RngStream rng(10);
    Crossbar xbar = formed_crossbar(64, 64, params, rng);
    BitPattern bits(64, 64);
    RngStream bits_rng(11);
    for (auto& b : bits.bits)
        b = bits_rng.bernoulli(0.5) ? 1 : 0;
    program_pattern(xbar, bits, params, rng);
    for (int pre = 0; pre < 64; ++pre) {
        const std::vector<double> currents = infer_column(xbar, pre, params);
        for (int post = 0; post < 64; ++post) {
            const bool by_current = currents[static_cast<std::size_t>(post)] > kNominalIrefAmp;
            const bool by_resistance = measure(xbar.cell(post, pre), params) < kHrsLrsBoundaryOhm;
            CHECK(by_current == by_resistance);
        }
    }
}

TEST_CASE("count_lrs_row") {
    const DeviceParams params = no_fail_params();
    Crossbar xbar(4, 64);
    for (int pre = 0; pre < 64; ++pre) {
        xbar.cell(0, pre) = {MemState::Lrs, 10e3};
        xbar.cell(1, pre) = {MemState::Hrs, 150e3};
    }
    CHECK(count_lrs_row(xbar, 0, params) == 64);
    CHECK(count_lrs_row(xbar, 1, params) == 0);

    // Bernoulli(0.5) rows stay within the binomial 99.9% interval
    RngStream rng(12);
    for (int trial = 0; trial < 50; ++trial) {
        for (int pre = 0; pre < 64; ++pre)
            xbar.cell(2, pre) = rng.bernoulli(0.5) ? MemristorCell{MemState::Lrs, 10e3}
                                                   : MemristorCell{MemState::Hrs, 150e3};
        const int count = count_lrs_row(xbar, 2, params);
        // mean 32, sd 4; +-3.3 sd
        CHECK(count >= 19);
        CHECK(count <= 45);
    }
    CHECK_THROWS_AS(count_lrs_row(xbar, 4, params), std::out_of_range);
}

TEST_CASE("measure_all requires formed cells") {
    const DeviceParams params = no_fail_params();
    Crossbar xbar(2, 2);
    CHECK_THROWS_AS(measure_all(xbar, params), std::invalid_argument);
}

TEST_CASE("resistance map CSV round-trips losslessly") {
    DeviceParams params;
    RngStream rng(13);
    Crossbar xbar = formed_crossbar(16, 16, params, rng);
    const ResistanceMap map = measure_all(xbar, params);

    std::stringstream first;
    save_resistance_map(map, first);
    const ResistanceMap reloaded = load_resistance_map(first);
    CHECK(reloaded.n_post == map.n_post);
    CHECK(reloaded.n_pre == map.n_pre);
    CHECK(reloaded.ohm == map.ohm);  // whole-ohm values survive the integer format

    std::stringstream second;
    save_resistance_map(reloaded, second);
    CHECK(first.str() == second.str());
}

TEST_CASE("bit pattern file round-trips") {
    BitPattern pattern(8, 8);
    RngStream rng(14);
    for (auto& b : pattern.bits)
        b = rng.bernoulli(0.3) ? 1 : 0;
    std::stringstream ss;
    save_bit_pattern(pattern, ss);
    const BitPattern reloaded = load_bit_pattern(ss);
    CHECK(reloaded.n_post == 8);
    CHECK(reloaded.n_pre == 8);
    CHECK(reloaded.bits == pattern.bits);
}

TEST_CASE("crossbar_from_map classifies at the boundary") {
    const DeviceParams params = no_fail_params();
    ResistanceMap map(1, 4);
    map.at(0, 0) = 10e3;
    map.at(0, 1) = 29999.0;
    map.at(0, 2) = 30000.0;
    map.at(0, 3) = 150e3;
    const Crossbar xbar = crossbar_from_map(map, params);
    CHECK(xbar.cell(0, 0).state == MemState::Lrs);
    CHECK(xbar.cell(0, 1).state == MemState::Lrs);
    CHECK(xbar.cell(0, 2).state == MemState::Hrs);  // boundary counts as HRS
    CHECK(xbar.cell(0, 3).state == MemState::Hrs);
}
