#pragma once

// Umbrella header for the behavioral CMOS-memristor crossbar core simulator.

#include "cmolsim/config.hpp"
#include "cmolsim/crossbar.hpp"
#include "cmolsim/device.hpp"
#include "cmolsim/encoding.hpp"
#include "cmolsim/experiments.hpp"
#include "cmolsim/layout.hpp"
#include "cmolsim/neuron.hpp"
#include "cmolsim/rng.hpp"
#include "cmolsim/stdp.hpp"
