#include <doctest.h>

#include <cmath>

#include "cmolsim/neuron.hpp"

using namespace cmolsim;

TEST_CASE("comparator is strict") {
    CHECK(comparator(30e-6, 10e-6));
    CHECK_FALSE(comparator(3e-6, 10e-6));
    CHECK_FALSE(comparator(10e-6, 10e-6));  // tie resolves to inactive
    CHECK_FALSE(comparator(kNominalIrefAmp, kNominalIrefAmp));
    CHECK_THROWS_AS(comparator(-1e-6, 10e-6), std::invalid_argument);
}

TEST_CASE("integrate_event") {
    PostNeuronState neuron;
    neuron.delta = 0.1;
    neuron.threshold = 0.5;

    CHECK_FALSE(integrate_event(neuron, false));
    CHECK(neuron.membrane == 0.0);

    neuron.membrane = 0.45;
    CHECK(integrate_event(neuron, true));
    CHECK(neuron.membrane == doctest::Approx(0.55));

    // membrane clips at 1
    neuron.membrane = 0.97;
    integrate_event(neuron, true);
    CHECK(neuron.membrane == 1.0);
}

TEST_CASE("a 1/32 packet with threshold 0.5 fires on exactly the 16th event") {
    PostNeuronState neuron;
    neuron.delta = 1.0 / 32.0;
    neuron.threshold = 0.5;
    for (int k = 1; k <= 15; ++k)
        CHECK_FALSE(integrate_event(neuron, true));
    CHECK(integrate_event(neuron, true));
    CHECK(neuron.membrane == 0.5);  // exact in binary arithmetic
}

TEST_CASE("fired flag is monotone under consecutive active events") {
    PostNeuronState neuron;
    neuron.delta = 0.07;
    neuron.threshold = 0.4;
    bool fired_seen = false;
    for (int k = 0; k < 40; ++k) {
        const bool fired = integrate_event(neuron, true);
        if (fired_seen)
            CHECK(fired);
        fired_seen = fired_seen || fired;
        CHECK(neuron.membrane >= 0.0);
        CHECK(neuron.membrane <= 1.0);
    }
    CHECK(fired_seen);
}

TEST_CASE("threshold potentiation saturates at 1") {
    PostNeuronState neuron;
    neuron.threshold = 0.5;
    potentiate_threshold(neuron);
    CHECK(neuron.threshold == doctest::Approx(0.54));
    neuron.threshold = 0.98;
    potentiate_threshold(neuron);
    CHECK(neuron.threshold == 1.0);
    potentiate_threshold(neuron);
    CHECK(neuron.threshold == 1.0);
}

TEST_CASE("reset clears the membrane and keeps the threshold") {
    PostNeuronState neuron;
    neuron.membrane = 0.7;
    neuron.threshold = 0.62;
    reset(neuron);
    CHECK(neuron.membrane == 0.0);
    CHECK(neuron.threshold == 0.62);
    reset(neuron);
    CHECK(neuron.membrane == 0.0);
}

TEST_CASE("query-driven readout latency") {
    CHECK(readout_latency({1, 20e-9, 64}) == doctest::Approx(2.56e-6).epsilon(1e-12));
    CHECK(readout_latency({13, 20e-9, 64}) == doctest::Approx(33.28e-6).epsilon(1e-12));
    CHECK_THROWS_AS(readout_latency({0, 20e-9, 64}), std::invalid_argument);

    // exactly linear in n_lev and n_neurons
    const double base = readout_latency({1, 20e-9, 1});
    for (int lev = 1; lev <= 16; ++lev)
        for (int n : {1, 7, 64})
            CHECK(readout_latency({lev, 20e-9, n}) == doctest::Approx(base * lev * n).epsilon(1e-12));
}

TEST_CASE("physical charge packet is 16mV with defaults") {
    const NeuronPhysParams params;
    CHECK(delta_vc_volts(params) == doctest::Approx(16e-3).epsilon(1e-12));
}

TEST_CASE("mismatch sampling") {
    NeuronPhysParams params;
    RngStream rng(31);

    SUBCASE("zero sigmas give identical neurons") {
        params.i_c_sigma_amp = 0.0;
        params.i_ref_mismatch_sigma = 0.0;
        const auto draws = sample_mismatch(params, 64, rng);
        for (const MismatchDraw& d : draws) {
            CHECK(d.delta == params.base_delta);
            CHECK(d.i_ref_amp == params.i_ref_amp);
        }
    }

    SUBCASE("default sigmas reproduce the 25% spread") {
        const auto draws = sample_mismatch(params, 10000, rng);
        double sum = 0.0;
        double sum2 = 0.0;
        for (const MismatchDraw& d : draws) {
            CHECK(d.delta > 0.0);
            CHECK(d.i_ref_amp >= 0.9 * params.i_ref_amp);
            CHECK(d.i_ref_amp <= 1.1 * params.i_ref_amp);
            sum += d.delta;
            sum2 += d.delta * d.delta;
        }
        const double mean = sum / 10000.0;
        const double sd = std::sqrt(sum2 / 10000.0 - mean * mean);
        CHECK(std::abs(sd / mean - 0.25) < 0.02);
    }
}

TEST_CASE("neuron bank carries the initial threshold") {
    NeuronPhysParams params;
    RngStream rng(32);
    const auto bank = make_neuron_bank(params, 64, 0.5, rng);
    CHECK(bank.size() == 64);
    for (const PostNeuronState& n : bank) {
        CHECK(n.threshold == 0.5);
        CHECK(n.membrane == 0.0);
        CHECK(n.fired_count == 0);
        CHECK(n.delta > 0.0);
    }
}
