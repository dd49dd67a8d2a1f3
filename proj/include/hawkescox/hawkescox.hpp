#pragma once

// Discrete-time Hawkes-Cox point processes: simulation, blocked MALA
// inference with analytic O(N) gradients, and model criticism.

#include "hawkescox/ar1.hpp"
#include "hawkescox/diagnostics.hpp"
#include "hawkescox/errors.hpp"
#include "hawkescox/io.hpp"
#include "hawkescox/mala.hpp"
#include "hawkescox/model.hpp"
#include "hawkescox/posterior.hpp"
#include "hawkescox/rng.hpp"
#include "hawkescox/simulate.hpp"
