#pragma once

// Post-synaptic neuron behavioral model. The physical neuron discharges a
// membrane capacitor by fixed charge packets and fires when the capacitor
// voltage crosses a per-neuron reference; here the membrane is normalized to
// [0, 1] with 0 as the reset state, which is the canonical model for all
// simulations. Pre-synaptic neurons are pure event emitters and carry no
// state.

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <vector>

#include "cmolsim/device.hpp"
#include "cmolsim/rng.hpp"

namespace cmolsim {

inline constexpr double kInitialThreshold = 0.5;
inline constexpr double kThresholdStep = 0.04;

// Normalized membrane increment per charge packet. Sets how many active
// inputs a fresh neuron needs before firing (threshold 0.5 -> 25 of them);
// small enough that the population's threshold budget outlasts a training
// pass, which is what lets early feature learners keep their features.
inline constexpr double kBaseDelta = 0.02;

struct NeuronPhysParams {
    double i_ref_amp = kNominalIrefAmp;      // comparator reference, 10uA nominal
    double i_ref_mismatch_sigma = 0.1 / 3.0; // relative; +-10% band at ~3 sigma
    double i_c_mean_amp = 10e-9;             // charge-pump current
    double i_c_sigma_amp = 2.5e-9;           // 25% neuron-to-neuron mismatch
    double t_spike_s = 200e-9;
    double c_mem_farad = 125e-15;
    double base_delta = kBaseDelta;          // normalized membrane increment per packet

    double i_c_mismatch_ratio() const { return i_c_sigma_amp / i_c_mean_amp; }

    void validate() const {
        if (!(i_ref_amp > 0.0 && i_c_mean_amp > 0.0 && t_spike_s > 0.0 && c_mem_farad > 0.0))
            throw std::invalid_argument("NeuronPhysParams: physical quantities must be positive");
        if (!(i_ref_mismatch_sigma >= 0.0 && i_c_sigma_amp >= 0.0))
            throw std::invalid_argument("NeuronPhysParams: mismatch sigmas must be non-negative");
        if (!(base_delta > 0.0 && base_delta <= 1.0))
            throw std::invalid_argument("NeuronPhysParams: base_delta must be in (0,1]");
    }
};

// Physical size of one charge packet on the membrane capacitor, in volts.
// 16mV with default parameters; the simulator itself runs in normalized
// units, this is exposed for documentation and sanity checks.
inline double delta_vc_volts(const NeuronPhysParams& p) {
    return p.i_c_mean_amp * p.t_spike_s / p.c_mem_farad;
}

struct PostNeuronState {
    double membrane = 0.0;                // normalized, 0 = reset
    double threshold = kInitialThreshold;
    double delta = kBaseDelta;            // mismatch-scaled per-packet increment
    double i_ref_eff = kNominalIrefAmp;   // mismatch-shifted comparator reference
    int fired_count = 0;
};

// Strict comparison; a current exactly at the reference stays inactive.
inline bool comparator(double i_post_amp, double i_ref_amp) {
    if (i_post_amp < 0.0 || i_ref_amp < 0.0)
        throw std::invalid_argument("comparator: currents must be non-negative");
    return i_post_amp > i_ref_amp;
}

// One input event: an active comparator adds one charge packet (clipped at
// 1). Returns whether the membrane sits at or above threshold afterwards.
// The membrane is not reset here; resets are explicit experiment actions.
inline bool integrate_event(PostNeuronState& neuron, bool comparator_active) {
    if (comparator_active)
        neuron.membrane = std::min(1.0, neuron.membrane + neuron.delta);
    return neuron.membrane >= neuron.threshold;
}

inline void potentiate_threshold(PostNeuronState& neuron, double step = kThresholdStep) {
    neuron.threshold = std::min(1.0, neuron.threshold + step);
}

inline void reset(PostNeuronState& neuron) { neuron.membrane = 0.0; }

struct MismatchDraw {
    double delta;
    double i_ref_amp;
};

// Per-neuron mismatch: the packet increment scales with a truncated-positive
// Gaussian whose relative sigma is the I_c mismatch (25% by default), the
// comparator reference with a Gaussian truncated to +-10%.
inline std::vector<MismatchDraw> sample_mismatch(const NeuronPhysParams& params, int n_neurons,
                                                 RngStream& rng) {
    if (n_neurons < 1)
        throw std::invalid_argument("sample_mismatch: need at least one neuron");
    std::vector<MismatchDraw> draws;
    draws.reserve(static_cast<std::size_t>(n_neurons));
    const double delta_sigma = params.i_c_mismatch_ratio();
    for (int i = 0; i < n_neurons; ++i) {
        double delta_factor = 1.0;
        if (delta_sigma > 0.0)
            delta_factor = rng.truncated_normal(1.0, delta_sigma, std::numeric_limits<double>::min(),
                                                std::numeric_limits<double>::infinity());
        double ref_factor = 1.0;
        if (params.i_ref_mismatch_sigma > 0.0)
            ref_factor = rng.truncated_normal(1.0, params.i_ref_mismatch_sigma, 0.9, 1.1);
        draws.push_back({params.base_delta * delta_factor, params.i_ref_amp * ref_factor});
    }
    return draws;
}

inline std::vector<PostNeuronState> make_neuron_bank(const NeuronPhysParams& params, int n_neurons,
                                                     double initial_threshold, RngStream& rng) {
    const std::vector<MismatchDraw> draws = sample_mismatch(params, n_neurons, rng);
    std::vector<PostNeuronState> bank(static_cast<std::size_t>(n_neurons));
    for (int i = 0; i < n_neurons; ++i) {
        bank[static_cast<std::size_t>(i)].threshold = initial_threshold;
        bank[static_cast<std::size_t>(i)].delta = draws[static_cast<std::size_t>(i)].delta;
        bank[static_cast<std::size_t>(i)].i_ref_eff = draws[static_cast<std::size_t>(i)].i_ref_amp;
    }
    return bank;
}

struct ReadoutConfig {
    int n_lev = 13;                 // threshold levels per neuron
    double clock_period_s = 20e-9;  // 50MHz query clock
    int n_neurons = 64;
};

// Query-driven read-out scans every neuron through 2*n_lev clock cycles.
inline double readout_latency(const ReadoutConfig& cfg) {
    if (cfg.n_lev < 1)
        throw std::invalid_argument("readout_latency: n_lev must be >= 1");
    if (cfg.n_neurons < 1)
        throw std::invalid_argument("readout_latency: n_neurons must be >= 1");
    if (!(cfg.clock_period_s > 0.0))
        throw std::invalid_argument("readout_latency: clock period must be positive");
    return 2.0 * cfg.n_lev * cfg.clock_period_s * cfg.n_neurons;
}

}  // namespace cmolsim
