#pragma once

#include <optional>
#include <vector>

#include "ifmem/model.hpp"
#include "ifmem/params.hpp"
#include "ifmem/waveform.hpp"

namespace ifmem {

enum class TransmissionModel { interface, legacy_mim };

struct SimulationConfig {
    /// Sampling step used whenever a SweepSpec is turned into samples.
    /// `simulate` itself steps with the waveform's own dt.
    double dt = kDefaultSweepDuration / 1e4;
    bool clamp_state = true;
    TransmissionModel transmission = TransmissionModel::interface;
    LegacyMimParams mim{};
};

/// Aligned columns. `state` is empty for measured traces.
struct IVTrace {
    double dt = 0.0;
    std::vector<double> time;
    std::vector<double> voltage;
    std::vector<double> current;
    std::vector<double> state;

    std::size_t size() const { return time.size(); }
    bool has_state() const { return !state.empty(); }

    friend bool operator==(const IVTrace&, const IVTrace&) = default;
};

/// Explicit Euler over the sampled waveform with the voltage held constant
/// across each step. Sample i reports the current at the state reached
/// after i steps; the state is clamped to [0, 1] after each step unless
/// disabled. Bit-reproducible for identical inputs.
IVTrace simulate(const ModelParameters& params, const SampledWaveform& waveform,
                 const SimulationConfig& cfg = {});

/// Samples `spec` with cfg.dt and simulates.
IVTrace simulate(const ModelParameters& params, const SweepSpec& spec,
                 const SimulationConfig& cfg = {});

/// Max over shared grid points of |I(dt) - I(dt/2)| normalised by the peak
/// |I(dt/2)|. Refinement diagnostic for the fixed-step integrator.
double convergence_check(const ModelParameters& params, const SweepSpec& spec, double dt,
                         const SimulationConfig& cfg = {});

/// Signed trapezoidal integral of I dV around the trace (A V).
double loop_area(const IVTrace& trace);

/// Current on the trace at voltage `v`, interpolated inside the first
/// segment of samples [first, last) that brackets it.
std::optional<double> current_at_voltage(const IVTrace& trace, std::size_t first,
                                         std::size_t last, double v);

}  // namespace ifmem
