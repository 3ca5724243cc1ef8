#pragma once

// Dual-band (sub-6 GHz + 60 GHz) WLAN MAC model: closed-form backoff
// chain analysis, network throughput, slotted simulation, and sweep
// tooling.

#include "mbmac/config.hpp"
#include "mbmac/equilibrium.hpp"
#include "mbmac/errors.hpp"
#include "mbmac/markov.hpp"
#include "mbmac/simulator.hpp"
#include "mbmac/sweep.hpp"
#include "mbmac/throughput.hpp"
#include "mbmac/transition_matrix.hpp"
