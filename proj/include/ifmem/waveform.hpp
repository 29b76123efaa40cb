#pragma once

#include "json.hpp"
#include <vector>

namespace ifmem {

struct SweepVertex {
    double time;     // s
    double voltage;  // V

    friend bool operator==(const SweepVertex&, const SweepVertex&) = default;
};

/// Piecewise-linear voltage program. Times start at 0 and strictly increase.
class SweepSpec {
public:
    explicit SweepSpec(std::vector<SweepVertex> vertices);

    const std::vector<SweepVertex>& vertices() const { return vertices_; }
    double duration() const { return vertices_.back().time; }

    /// Linear interpolation; t is clamped to [0, duration].
    double voltage_at(double t) const;

    friend bool operator==(const SweepSpec&, const SweepSpec&) = default;

private:
    std::vector<SweepVertex> vertices_;
};

/// Uniformly sampled voltages; sample i sits at t = i * dt.
struct SampledWaveform {
    double dt = 0.0;
    std::vector<double> voltages;

    double time_at(std::size_t i) const { return static_cast<double>(i) * dt; }
};

inline constexpr double kDefaultSweepDuration = 60.0;  // s

/// 0 -> v_max -> 0 -> v_min -> 0 at constant slew rate.
SweepSpec standard_sweep(double v_max = 1.0, double v_min = -2.0,
                         double total_duration = kDefaultSweepDuration);

/// Samples the sweep at t = 0, dt, 2 dt, ...; the last sample always holds
/// the final vertex voltage.
SampledWaveform sample(const SweepSpec& spec, double dt);

/// Checks the SampledWaveform invariants; throws DomainError.
void validate(const SampledWaveform& w);

// JSON form: [[t0, v0], [t1, v1], ...]
void to_json(nlohmann::json& j, const SweepSpec& s);
SweepSpec sweep_from_json(const nlohmann::json& j);

}  // namespace ifmem
