#pragma once

// Behavioral model of one 1T1R compound device: binary-intent resistive
// element in series with its NMOS selector. The device is operated with
// fixed pulse recipes (Form/Write/Erase/Read/Inference); programming is
// stochastic both in outcome (occasional failure to switch) and in the
// resistance landed on (log-normal per-state spread, resampled on every
// successful pulse).

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cmolsim/rng.hpp"

namespace cmolsim {

// Read/inference pulses drop the pre-side line from 2.4V to 2.1V.
inline constexpr double kReadVoltage = 0.3;

// Resistance limit separating HRS from LRS.
inline constexpr double kHrsLrsBoundaryOhm = 30e3;

// Comparator reference, 10uA nominal. Written as kReadVoltage / boundary so
// that current-side and resistance-side classification agree bit for bit
// (0.3 / 30000.0 is one ulp away from the literal 1e-5 in IEEE doubles).
inline constexpr double kNominalIrefAmp = kReadVoltage / kHrsLrsBoundaryOhm;

enum class MemState { Unformed, Hrs, Lrs };

enum class PulseKind { Form, Write, Erase, Read, Inference };

struct PulseSpec {
    double duration_s;
    double v_top;     // post-side line
    double v_bottom;  // pre-side line
    double v_g;       // selector gate
};

// Fixed pulse recipes for the five device operations.
inline PulseSpec pulse_spec(PulseKind kind) {
    switch (kind) {
    case PulseKind::Form:
        return {10e-6, 4.8, 0.0, 1.5};
    case PulseKind::Write:
        return {100e-9, 2.4, 0.0, 1.5};
    case PulseKind::Erase:
        return {100e-9, 0.0, 4.8, 4.8};
    case PulseKind::Read:
        return {10e-6, 2.4, 2.1, 3.5};
    case PulseKind::Inference:
        return {200e-9, 2.4, 2.1, 3.5};
    }
    throw std::invalid_argument("pulse_spec: unknown pulse kind");
}

struct DeviceParams {
    // Per-state resistance spread: log-normal, parameterized by median and
    // log-space sigma. Defaults are calibrated so that each population puts
    // about 3% of its mass in the 15k-100k border band while keeping
    // essentially perfect separability at the 30k boundary.
    double hrs_median_ohm = 180e3;
    double hrs_sigma = 0.3125;
    double lrs_median_ohm = 10e3;
    double lrs_sigma = 0.2156;

    // Sensing circuit saturates outside this range.
    double sense_min_ohm = 6e3;
    double sense_max_ohm = 200e3;

    // Probability that a Form/Write/Erase pulse leaves the device unchanged.
    double p_program_fail = 0.01;

    // Expected fraction of devices landing between the two binary clouds.
    double border_fraction_target = 0.03;

    void validate() const {
        if (!(sense_min_ohm > 0.0 && sense_min_ohm < sense_max_ohm))
            throw std::invalid_argument("DeviceParams: sense range must satisfy 0 < min < max");
        if (!(sense_min_ohm < lrs_median_ohm && lrs_median_ohm < kHrsLrsBoundaryOhm))
            throw std::invalid_argument("DeviceParams: lrs_median must lie in (sense_min, 30k)");
        if (!(kHrsLrsBoundaryOhm < hrs_median_ohm && hrs_median_ohm < sense_max_ohm))
            throw std::invalid_argument("DeviceParams: hrs_median must lie in (30k, sense_max)");
        if (!(hrs_sigma >= 0.0 && lrs_sigma >= 0.0))
            throw std::invalid_argument("DeviceParams: sigmas must be non-negative");
        if (!(p_program_fail >= 0.0 && p_program_fail <= 1.0))
            throw std::invalid_argument("DeviceParams: p_program_fail must be in [0,1]");
        if (!(border_fraction_target >= 0.0 && border_fraction_target <= 1.0))
            throw std::invalid_argument("DeviceParams: border_fraction_target must be in [0,1]");
    }
};

struct MemristorCell {
    MemState state = MemState::Unformed;
    double resistance_ohm = 200e3;  // last sampled value; whole-ohm, sense-clipped
};

// Current pushed into the post-side neuron for a given device resistance.
inline double read_current(double resistance_ohm, double v_drop = kReadVoltage) {
    if (!(resistance_ohm > 0.0))
        throw std::invalid_argument("read_current: resistance must be positive");
    return v_drop / resistance_ohm;
}

// Sensed resistance. Values outside the sensing range saturate at its ends.
inline double measure(const MemristorCell& cell, const DeviceParams& params) {
    if (cell.state == MemState::Unformed)
        throw std::invalid_argument("measure: unformed device");
    return std::clamp(cell.resistance_ohm, params.sense_min_ohm, params.sense_max_ohm);
}

inline bool is_lrs_resistance(double resistance_ohm) {
    return resistance_ohm < kHrsLrsBoundaryOhm;
}

namespace detail {

// Resistances are quantized to whole ohms at sampling time so that maps
// round-trip exactly through the integer CSV format.
inline double sample_resistance(MemState state, const DeviceParams& params, RngStream& rng) {
    const double median = state == MemState::Lrs ? params.lrs_median_ohm : params.hrs_median_ohm;
    const double sigma = state == MemState::Lrs ? params.lrs_sigma : params.hrs_sigma;
    const double raw = rng.lognormal_median(median, sigma);
    const double clipped = std::clamp(raw, params.sense_min_ohm, params.sense_max_ohm);
    return static_cast<double>(std::llround(clipped));
}

}  // namespace detail

// Applies a programming pulse. Form targets LRS and is the only pulse
// accepted on an unformed device; Write targets LRS, Erase targets HRS.
// With probability p_program_fail the device ignores the pulse; otherwise it
// adopts the target state and resamples its resistance (cycle-to-cycle
// variability), even if it already was in the target state.
inline MemristorCell apply_pulse(MemristorCell cell, PulseKind kind, const DeviceParams& params,
                                 RngStream& rng) {
    MemState target;
    switch (kind) {
    case PulseKind::Form:
        target = cell.state == MemState::Unformed ? MemState::Lrs : cell.state;
        break;
    case PulseKind::Write:
        if (cell.state == MemState::Unformed)
            throw std::invalid_argument("apply_pulse: unformed device");
        target = MemState::Lrs;
        break;
    case PulseKind::Erase:
        if (cell.state == MemState::Unformed)
            throw std::invalid_argument("apply_pulse: unformed device");
        target = MemState::Hrs;
        break;
    default:
        throw std::invalid_argument("apply_pulse: only Form/Write/Erase program a device");
    }
    if (rng.bernoulli(1.0 - params.p_program_fail)) {
        cell.state = target;
        cell.resistance_ohm = detail::sample_resistance(target, params, rng);
    }
    return cell;
}

}  // namespace cmolsim
