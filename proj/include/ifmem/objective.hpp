#pragma once

#include <span>

#include "ifmem/simulator.hpp"

namespace ifmem {

/// Mean absolute current error (A). Traces must have equal length and
/// times aligned to within half a sample step.
double mae(const IVTrace& simulated, const IVTrace& measured);

/// Percentage error normalised by the measured current magnitude:
/// 100 * sum|I_sim - I_meas| / sum|I_meas|. Invariant under rescaling both
/// traces and under uniform changes of sampling density.
double mpe(const IVTrace& simulated, const IVTrace& measured);

// Column-only forms; only the lengths are checked.
double mae(std::span<const double> simulated, std::span<const double> measured);
double mpe(std::span<const double> simulated, std::span<const double> measured);

}  // namespace ifmem
