#pragma once

// Regularized stochastic binary STDP. Weight updates are full-swing
// Write/Erase pulses gated by probabilities: when a post-synaptic neuron
// fires, synapses from recently active pre-neurons (rank-order window, the
// last N_p pre-spikes) are programmed ON with probability P_LTP, all other
// synapses of that neuron OFF with probability P_LTD. The firing neuron's
// threshold is then potentiated and the row's LRS population is corrected
// back to a fixed count N_LRS. Pre-spikes alone never modify weights.

#include <deque>
#include <stdexcept>
#include <vector>

#include "cmolsim/crossbar.hpp"
#include "cmolsim/neuron.hpp"
#include "cmolsim/rng.hpp"

namespace cmolsim {

struct StdpConfig {
    double p_ltp = 0.9;
    double p_ltd = 0.2;
    int history_len = 64;     // N_p, rank-order window in spikes
    int n_lrs_target = 32;    // N_LRS, fixed per-row LRS count
    double threshold_step = kThresholdStep;
    double initial_threshold = kInitialThreshold;

    void validate() const {
        if (!(p_ltp >= 0.0 && p_ltp <= 1.0 && p_ltd >= 0.0 && p_ltd <= 1.0))
            throw std::invalid_argument("StdpConfig: probabilities must be in [0,1]");
        if (history_len < 1)
            throw std::invalid_argument("StdpConfig: history_len must be >= 1");
        if (n_lrs_target < 0)
            throw std::invalid_argument("StdpConfig: n_lrs_target must be >= 0");
        if (!(threshold_step >= 0.0 && initial_threshold >= 0.0 && initial_threshold <= 1.0))
            throw std::invalid_argument("StdpConfig: threshold fields out of range");
    }
};

// Ordered ring of the last N_p pre-spike source ids, oldest first.
// Duplicates are kept; the correlated set is the set of distinct ids.
class PreSpikeHistory {
public:
    explicit PreSpikeHistory(int capacity) : capacity_(capacity) {
        if (capacity < 1)
            throw std::invalid_argument("PreSpikeHistory: capacity must be >= 1");
    }

    void record(int pre_id) {
        ids_.push_back(pre_id);
        if (static_cast<int>(ids_.size()) > capacity_)
            ids_.pop_front();
    }

    int capacity() const { return capacity_; }
    std::size_t size() const { return ids_.size(); }
    const std::deque<int>& entries() const { return ids_; }

    std::vector<std::uint8_t> correlated_mask(int n_pre) const {
        std::vector<std::uint8_t> mask(static_cast<std::size_t>(n_pre), 0);
        for (int id : ids_) {
            if (id < 0 || id >= n_pre)
                throw std::out_of_range("PreSpikeHistory: id outside pre range");
            mask[static_cast<std::size_t>(id)] = 1;
        }
        return mask;
    }

private:
    int capacity_;
    std::deque<int> ids_;
};

// Random half-ON initial weights: every row gets exactly n_pre/2 LRS cells
// at uniformly random positions, programmed with verify so the intended
// pattern lands even with a non-zero program-failure rate.
inline void init_random_weights(Crossbar& xbar, const DeviceParams& params, RngStream& rng,
                                int max_retries = 10) {
    const int half = xbar.n_pre() / 2;
    for (int post = 0; post < xbar.n_post(); ++post) {
        std::vector<std::uint8_t> target(static_cast<std::size_t>(xbar.n_pre()), 0);
        for (std::size_t idx : rng.sample_without_replacement(static_cast<std::size_t>(xbar.n_pre()),
                                                              static_cast<std::size_t>(half)))
            target[idx] = 1;
        long pulses = 0;
        for (int pre = 0; pre < xbar.n_pre(); ++pre)
            detail::program_cell(xbar, post, pre, target[static_cast<std::size_t>(pre)] != 0,
                                 params, rng, true, max_retries, pulses);
    }
}

// Corrective flips restoring the row's LRS count to n_lrs_target. Chosen
// uniformly without replacement among the cells on the wrong side; repeats
// the read-and-correct pass until the measured count matches (bounded).
inline int regularize(Crossbar& xbar, int post_id, const StdpConfig& cfg,
                      const DeviceParams& params, RngStream& rng) {
    xbar.check_post(post_id);
    if (cfg.n_lrs_target > xbar.n_pre())
        throw std::invalid_argument("regularize: n_lrs_target exceeds row width");
    int flips = 0;
    for (int pass = 0; pass < 16; ++pass) {
        const int count = count_lrs_row(xbar, post_id, params);
        if (count == cfg.n_lrs_target)
            break;
        const bool need_on = count < cfg.n_lrs_target;
        std::vector<int> pool;
        for (int pre = 0; pre < xbar.n_pre(); ++pre) {
            const bool lrs = is_lrs_resistance(measure(xbar.cell(post_id, pre), params));
            if (lrs != need_on)
                pool.push_back(pre);
        }
        const std::size_t need = static_cast<std::size_t>(need_on ? cfg.n_lrs_target - count
                                                                  : count - cfg.n_lrs_target);
        for (std::size_t idx : rng.sample_without_replacement(pool.size(), need)) {
            const PulseKind kind = need_on ? PulseKind::Write : PulseKind::Erase;
            xbar.cell(post_id, pool[idx]) = apply_pulse(xbar.cell(post_id, pool[idx]), kind, params, rng);
            ++flips;
        }
    }
    return flips;
}

struct PostSpikeUpdate {
    int post_id = 0;
    int ltp_writes = 0;
    int ltd_erases = 0;
    int regularize_flips = 0;
    double new_threshold = 0.0;
};

// Full SB-STDP update for one post-synaptic spike.
inline PostSpikeUpdate on_post_spike(Crossbar& xbar, const PreSpikeHistory& history, int post_id,
                                     std::vector<PostNeuronState>& neurons, const StdpConfig& cfg,
                                     const DeviceParams& params, RngStream& rng) {
    xbar.check_post(post_id);
    if (post_id >= static_cast<int>(neurons.size()))
        throw std::out_of_range("on_post_spike: neuron bank too small");
    PostSpikeUpdate update;
    update.post_id = post_id;
    const std::vector<std::uint8_t> correlated = history.correlated_mask(xbar.n_pre());
    for (int pre = 0; pre < xbar.n_pre(); ++pre) {
        if (correlated[static_cast<std::size_t>(pre)]) {
            if (rng.bernoulli(cfg.p_ltp)) {
                xbar.cell(post_id, pre) = apply_pulse(xbar.cell(post_id, pre), PulseKind::Write, params, rng);
                ++update.ltp_writes;
            }
        } else if (rng.bernoulli(cfg.p_ltd)) {
            xbar.cell(post_id, pre) = apply_pulse(xbar.cell(post_id, pre), PulseKind::Erase, params, rng);
            ++update.ltd_erases;
        }
    }
    potentiate_threshold(neurons[static_cast<std::size_t>(post_id)], cfg.threshold_step);
    update.regularize_flips = regularize(xbar, post_id, cfg, params, rng);
    update.new_threshold = neurons[static_cast<std::size_t>(post_id)].threshold;
    return update;
}

}  // namespace cmolsim
