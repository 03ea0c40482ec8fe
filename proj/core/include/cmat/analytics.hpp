#pragma once

#include <cmat/parameters.hpp>

namespace cmat {

/// Stop-line capacity (veh/s) of a lane whose headways mix the platoon-gap
/// and in-platoon values: a fraction alpha of the front gaps take tau_c, the
/// rest tau_f, and every vehicle body needs l/v_f. alpha must lie in [0,1].
double capacity_alpha(double alpha, const FlowParameters& flow = {});

/// Capacity when vehicles travel in platoons of n (one gap of tau_c per n
/// vehicles). n >= 1.
double capacity_platoon(double n, const FlowParameters& flow = {});

/// Mean extra wait of a vehicle that must form into a platoon of size n when
/// the per-slot spacing is mu seconds: (n - 1) * mu / 2. n >= 1, mu > 0.
double expected_platoon_delay(double n, double mu);

}  // namespace cmat
