#include <doctest.h>

#include <set>
#include <vector>

#include "cmolsim/stdp.hpp"

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

// Row with exactly the given LRS positions, written directly.
void set_row(Crossbar& xbar, int post, const std::set<int>& lrs) {
    for (int pre = 0; pre < xbar.n_pre(); ++pre)
        xbar.cell(post, pre) = lrs.count(pre) ? MemristorCell{MemState::Lrs, 10e3}
                                              : MemristorCell{MemState::Hrs, 150e3};
}

std::set<int> lrs_positions(const Crossbar& xbar, int post, const DeviceParams& params) {
    std::set<int> out;
    for (int pre = 0; pre < xbar.n_pre(); ++pre)
        if (is_lrs_resistance(measure(xbar.cell(post, pre), params)))
            out.insert(pre);
    return out;
}

}  // namespace

TEST_CASE("pre-spike history keeps the last N_p entries in order") {
    PreSpikeHistory history(64);
    CHECK(history.size() == 0);
    history.record(5);
    REQUIRE(history.size() == 1);
    CHECK(history.entries().front() == 5);

    // duplicates are kept
    history.record(5);
    CHECK(history.size() == 2);

    for (int i = 0; i < 62; ++i)
        history.record(i);
    CHECK(history.size() == 64);
    history.record(99);
    CHECK(history.size() == 64);  // oldest evicted
    CHECK(history.entries().front() == 5);
    CHECK(history.entries().back() == 99);

    CHECK_THROWS_AS(PreSpikeHistory(0), std::invalid_argument);
}

TEST_CASE("correlated set is the set of distinct ids") {
    PreSpikeHistory history(8);
    history.record(1);
    history.record(1);
    history.record(3);
    const auto mask = history.correlated_mask(8);
    CHECK(mask[1] == 1);
    CHECK(mask[3] == 1);
    CHECK(mask[0] == 0);
    CHECK(mask[2] == 0);
}

TEST_CASE("init_random_weights gives every row exactly half LRS") {
    DeviceParams params;  // default failure rate, verify makes it exact anyway
    RngStream rng(41);
    Crossbar xbar = formed_crossbar(64, 64, params, rng);
    init_random_weights(xbar, params, rng);
    for (int post = 0; post < 64; ++post)
        CHECK(count_lrs_row(xbar, post, params) == 32);

    // two seeds produce different position sets
    RngStream rng_a(1);
    RngStream rng_b(2);
    Crossbar xa = formed_crossbar(4, 64, params, rng_a);
    Crossbar xb = formed_crossbar(4, 64, params, rng_b);
    init_random_weights(xa, params, rng_a);
    init_random_weights(xb, params, rng_b);
    bool differ = false;
    for (int post = 0; post < 4 && !differ; ++post)
        differ = lrs_positions(xa, post, params) != lrs_positions(xb, post, params);
    CHECK(differ);
}

TEST_CASE("init_random_weights positions are uniform across seeds") {
    const DeviceParams params = no_fail_params();
    std::vector<int> freq(64, 0);
    const int n_seeds = 100;
    for (int seed = 0; seed < n_seeds; ++seed) {
        RngStream rng(static_cast<std::uint64_t>(seed) + 1000);
        Crossbar xbar = formed_crossbar(64, 64, params, rng);
        init_random_weights(xbar, params, rng);
        for (int post = 0; post < 64; ++post)
            for (int pre = 0; pre < 64; ++pre)
                if (xbar.cell(post, pre).state == MemState::Lrs)
                    ++freq[static_cast<std::size_t>(pre)];
    }
    // 6400 samples per position, expectation 0.5
    for (int pre = 0; pre < 64; ++pre) {
        const double f = freq[static_cast<std::size_t>(pre)] / (64.0 * n_seeds);
        CHECK(f > 0.45);
        CHECK(f < 0.55);
    }
}

TEST_CASE("deterministic limits of on_post_spike") {
    const DeviceParams params = no_fail_params();
    RngStream rng(42);
    Crossbar xbar = formed_crossbar(8, 64, params, rng);
    std::vector<PostNeuronState> neurons(8);

    SUBCASE("p_ltp = p_ltd = 1 makes the row exactly the correlated set") {
        StdpConfig cfg;
        cfg.p_ltp = 1.0;
        cfg.p_ltd = 1.0;
        cfg.n_lrs_target = 8;  // matches the correlated set so regularization is a no-op
        PreSpikeHistory history(64);
        for (int id = 1; id <= 8; ++id)
            history.record(id);
        set_row(xbar, 3, {0, 20, 40, 60});
        const PostSpikeUpdate update = on_post_spike(xbar, history, 3, neurons, cfg, params, rng);
        CHECK(lrs_positions(xbar, 3, params) == std::set<int>{1, 2, 3, 4, 5, 6, 7, 8});
        CHECK(update.regularize_flips == 0);
    }

    SUBCASE("p_ltp = p_ltd = 0 leaves weights alone but potentiates the threshold") {
        StdpConfig cfg;
        cfg.p_ltp = 0.0;
        cfg.p_ltd = 0.0;
        cfg.n_lrs_target = 4;
        PreSpikeHistory history(64);
        history.record(2);
        set_row(xbar, 5, {0, 20, 40, 60});
        const ResistanceMap before = measure_all(xbar, params);
        const double threshold_before = neurons[5].threshold;
        on_post_spike(xbar, history, 5, neurons, cfg, params, rng);
        const ResistanceMap after = measure_all(xbar, params);
        CHECK(before.ohm == after.ohm);
        CHECK(neurons[5].threshold == doctest::Approx(threshold_before + cfg.threshold_step));
    }
}

TEST_CASE("ltp gating frequency matches its probability") {
    const DeviceParams params = no_fail_params();
    RngStream rng(43);
    Crossbar xbar = formed_crossbar(1, 2, params, rng);
    StdpConfig cfg;
    cfg.p_ltp = 0.5;
    cfg.p_ltd = 0.0;
    cfg.n_lrs_target = 1;
    PreSpikeHistory history(4);
    history.record(0);

    int flips = 0;
    const int trials = 10000;
    std::vector<PostNeuronState> neurons(1);
    for (int t = 0; t < trials; ++t) {
        set_row(xbar, 0, {1});  // correlated synapse 0 starts HRS; row count already on target
        const PostSpikeUpdate update = on_post_spike(xbar, history, 0, neurons, cfg, params, rng);
        if (update.ltp_writes > 0)
            ++flips;
        neurons[0].threshold = 0.5;  // keep the threshold from saturating the test
    }
    const double freq = flips / static_cast<double>(trials);
    CHECK(freq > 0.48);
    CHECK(freq < 0.52);
}

TEST_CASE("regularize restores the target count") {
    const DeviceParams params = no_fail_params();
    StdpConfig cfg;
    cfg.n_lrs_target = 32;

    RngStream rng(44);
    Crossbar xbar = formed_crossbar(1, 64, params, rng);

    SUBCASE("low count is topped up") {
        std::set<int> lrs;
        for (int pre = 0; pre < 30; ++pre)
            lrs.insert(pre);
        set_row(xbar, 0, lrs);
        const int flips = regularize(xbar, 0, cfg, params, rng);
        CHECK(flips == 2);
        CHECK(count_lrs_row(xbar, 0, params) == 32);
        // the original 30 stay on
        for (int pre = 0; pre < 30; ++pre)
            CHECK(xbar.cell(0, pre).state == MemState::Lrs);
    }

    SUBCASE("exact count is a fixed point") {
        std::set<int> lrs;
        for (int pre = 0; pre < 32; ++pre)
            lrs.insert(pre * 2);
        set_row(xbar, 0, lrs);
        const ResistanceMap before = measure_all(xbar, params);
        CHECK(regularize(xbar, 0, cfg, params, rng) == 0);
        CHECK(measure_all(xbar, params).ohm == before.ohm);
    }

    SUBCASE("high count is trimmed, exact over many seeds") {
        for (int seed = 0; seed < 50; ++seed) {
            RngStream seed_rng(static_cast<std::uint64_t>(seed));
            std::set<int> lrs;
            for (int pre = 0; pre < 40; ++pre)
                lrs.insert(pre);
            set_row(xbar, 0, lrs);
            const int flips = regularize(xbar, 0, cfg, params, seed_rng);
            CHECK(flips == 8);
            CHECK(count_lrs_row(xbar, 0, params) == 32);
        }
    }
}

TEST_CASE("row count equals the target after any post spike without program failures") {
    const DeviceParams params = no_fail_params();
    StdpConfig cfg;  // defaults: p_ltp 0.6, p_ltd 0.15, target 32

    for (int seed = 0; seed < 20; ++seed) {
        RngStream rng(static_cast<std::uint64_t>(seed) + 7);
        Crossbar xbar = formed_crossbar(4, 64, params, rng);
        init_random_weights(xbar, params, rng);
        std::vector<PostNeuronState> neurons(4);
        PreSpikeHistory history(64);
        const int spikes = 1 + static_cast<int>(rng.below(40));
        for (int s = 0; s < spikes; ++s)
            history.record(static_cast<int>(rng.below(64)));
        const int post = static_cast<int>(rng.below(4));
        on_post_spike(xbar, history, post, neurons, cfg, params, rng);
        CHECK(count_lrs_row(xbar, post, params) == cfg.n_lrs_target);
    }
}

TEST_CASE("rows of neurons that never fired are untouched") {
    const DeviceParams params = no_fail_params();
    StdpConfig cfg;
    RngStream rng(45);
    Crossbar xbar = formed_crossbar(8, 64, params, rng);
    init_random_weights(xbar, params, rng);
    const ResistanceMap before = measure_all(xbar, params);

    std::vector<PostNeuronState> neurons(8);
    PreSpikeHistory history(64);
    for (int s = 0; s < 30; ++s)
        history.record(static_cast<int>(rng.below(64)));
    on_post_spike(xbar, history, 3, neurons, cfg, params, rng);

    const ResistanceMap after = measure_all(xbar, params);
    for (int post = 0; post < 8; ++post) {
        if (post == 3)
            continue;
        for (int pre = 0; pre < 64; ++pre)
            CHECK(after.at(post, pre) == before.at(post, pre));
    }
}

TEST_CASE("threshold staircase is non-decreasing with step 0.04 and cap 1") {
    const DeviceParams params = no_fail_params();
    StdpConfig cfg;
    RngStream rng(46);
    Crossbar xbar = formed_crossbar(1, 64, params, rng);
    init_random_weights(xbar, params, rng);
    std::vector<PostNeuronState> neurons(1);
    PreSpikeHistory history(64);
    history.record(0);

    double prev = neurons[0].threshold;
    CHECK(prev == 0.5);
    for (int k = 1; k <= 20; ++k) {
        on_post_spike(xbar, history, 0, neurons, cfg, params, rng);
        const double now = neurons[0].threshold;
        CHECK(now >= prev);
        CHECK(now <= 1.0);
        const double expected = std::min(1.0, 0.5 + 0.04 * k);
        CHECK(now == doctest::Approx(expected).epsilon(1e-12));
        prev = now;
    }
    CHECK(prev == 1.0);
}

TEST_CASE("stdp config validation") {
    StdpConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.p_ltp = 1.2;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = StdpConfig{};
    cfg.history_len = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
