#include "ifmem/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ifmem/errors.hpp"

namespace ifmem {

IVTrace simulate(const ModelParameters& params, const SampledWaveform& waveform,
                 const SimulationConfig& cfg) {
    validate(params);
    validate(waveform);

    const std::size_t n = waveform.voltages.size();
    IVTrace trace;
    trace.dt = waveform.dt;
    trace.time.resize(n);
    trace.voltage = waveform.voltages;
    trace.current.resize(n);
    trace.state.resize(n);

    const bool mim = cfg.transmission == TransmissionModel::legacy_mim;
    const detail::Kernel kernel(params);
    double x = params.x0;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = waveform.voltages[i];
        const double current = mim ? detail::mim_current_unchecked(cfg.mim, v, x)
                                   : kernel.current(v, x);
        if (!std::isfinite(current)) {
            throw NumericalError("non-finite current at sample " + std::to_string(i));
        }
        trace.time[i] = waveform.time_at(i);
        trace.current[i] = current;
        trace.state[i] = x;

        x += waveform.dt * kernel.derivative(v, x);
        if (!std::isfinite(x)) {
            throw NumericalError("non-finite state after sample " + std::to_string(i));
        }
        if (cfg.clamp_state) x = std::clamp(x, 0.0, 1.0);
    }
    return trace;
}

IVTrace simulate(const ModelParameters& params, const SweepSpec& spec,
                 const SimulationConfig& cfg) {
    return simulate(params, sample(spec, cfg.dt), cfg);
}

double convergence_check(const ModelParameters& params, const SweepSpec& spec, double dt,
                         const SimulationConfig& cfg) {
    const IVTrace coarse = simulate(params, sample(spec, dt), cfg);
    const IVTrace fine = simulate(params, sample(spec, dt / 2.0), cfg);

    double peak = 0.0;
    for (double c : fine.current) peak = std::max(peak, std::abs(c));

    double worst = 0.0;
    // a trailing off-grid endpoint is not a shared time point
    const std::size_t shared = std::min(coarse.size(), (fine.size() + 1) / 2);
    for (std::size_t i = 0; i < shared; ++i) {
        if (coarse.time[i] != fine.time[2 * i]) continue;
        worst = std::max(worst, std::abs(coarse.current[i] - fine.current[2 * i]));
    }
    return worst / (peak + 1e-15);
}

double loop_area(const IVTrace& trace) {
    double area = 0.0;
    for (std::size_t i = 1; i < trace.size(); ++i) {
        area += 0.5 * (trace.current[i] + trace.current[i - 1]) *
                (trace.voltage[i] - trace.voltage[i - 1]);
    }
    return area;
}

std::optional<double> current_at_voltage(const IVTrace& trace, std::size_t first,
                                         std::size_t last, double v) {
    last = std::min(last, trace.size());
    for (std::size_t i = first; i + 1 < last; ++i) {
        const double v0 = trace.voltage[i];
        const double v1 = trace.voltage[i + 1];
        if ((v0 <= v && v <= v1) || (v1 <= v && v <= v0)) {
            if (v0 == v1) return trace.current[i];
            const double frac = (v - v0) / (v1 - v0);
            return trace.current[i] + frac * (trace.current[i + 1] - trace.current[i]);
        }
    }
    return std::nullopt;
}

}  // namespace ifmem
