#include "ifmem/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ifmem/errors.hpp"

namespace ifmem {

SweepSpec::SweepSpec(std::vector<SweepVertex> vertices) : vertices_(std::move(vertices)) {
    if (vertices_.size() < 2) throw DomainError("sweep needs at least two vertices");
    if (vertices_.front().time != 0.0) throw DomainError("sweep must start at t = 0");
    for (std::size_t i = 0; i < vertices_.size(); ++i) {
        const auto& v = vertices_[i];
        if (!std::isfinite(v.time) || !std::isfinite(v.voltage)) {
            throw DomainError("sweep vertex " + std::to_string(i) + " is not finite");
        }
        if (i > 0 && !(v.time > vertices_[i - 1].time)) {
            throw DomainError("sweep times must strictly increase (vertex " + std::to_string(i) +
                              ")");
        }
    }
}

double SweepSpec::voltage_at(double t) const {
    if (t <= 0.0) return vertices_.front().voltage;
    if (t >= duration()) return vertices_.back().voltage;
    auto hi = std::upper_bound(vertices_.begin(), vertices_.end(), t,
                               [](double tt, const SweepVertex& v) { return tt < v.time; });
    auto lo = hi - 1;
    if (t == lo->time) return lo->voltage;
    const double frac = (t - lo->time) / (hi->time - lo->time);
    return lo->voltage + frac * (hi->voltage - lo->voltage);
}

SweepSpec standard_sweep(double v_max, double v_min, double total_duration) {
    if (!(v_max > 0.0) || !std::isfinite(v_max)) throw DomainError("v_max must be positive");
    if (!(v_min < 0.0) || !std::isfinite(v_min)) throw DomainError("v_min must be negative");
    if (!(total_duration > 0.0) || !std::isfinite(total_duration)) {
        throw DomainError("sweep duration must be positive");
    }
    const double span = 2.0 * v_max - 2.0 * v_min;
    const double per_volt = total_duration / span;
    const double t1 = v_max * per_volt;
    const double t2 = 2.0 * v_max * per_volt;
    const double t3 = (2.0 * v_max - v_min) * per_volt;
    return SweepSpec({{0.0, 0.0}, {t1, v_max}, {t2, 0.0}, {t3, v_min}, {total_duration, 0.0}});
}

SampledWaveform sample(const SweepSpec& spec, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("dt must be positive");
    const double duration = spec.duration();
    if (dt > duration) throw DomainError("dt exceeds the sweep duration");

    // Grid index is computed from i * dt, never by accumulation, so a halved
    // dt hits the shared points with identical arguments.
    const auto whole = static_cast<std::size_t>(std::floor(duration / dt * (1.0 + 1e-12)));
    SampledWaveform w{dt, {}};
    w.voltages.reserve(whole + 2);
    for (std::size_t i = 0; i <= whole; ++i) {
        const double t = std::min(static_cast<double>(i) * dt, duration);
        w.voltages.push_back(spec.voltage_at(t));
    }
    // The final vertex always closes the sequence: appended when the grid
    // misses it by more than dt/2, otherwise it replaces the last grid value.
    const double last = static_cast<double>(whole) * dt;
    if (duration - last > dt / 2.0) {
        w.voltages.push_back(spec.vertices().back().voltage);
    } else {
        w.voltages.back() = spec.vertices().back().voltage;
    }
    return w;
}

void validate(const SampledWaveform& w) {
    if (!(w.dt > 0.0) || !std::isfinite(w.dt)) throw DomainError("dt must be positive");
    if (w.voltages.empty()) throw DomainError("waveform is empty");
    for (std::size_t i = 0; i < w.voltages.size(); ++i) {
        if (!std::isfinite(w.voltages[i])) {
            throw DomainError("waveform sample " + std::to_string(i) + " is not finite");
        }
    }
}

void to_json(nlohmann::json& j, const SweepSpec& s) {
    j = nlohmann::json::array();
    for (const auto& v : s.vertices()) j.push_back({v.time, v.voltage});
}

SweepSpec sweep_from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw FormatError("sweep must be a JSON array of [time, voltage] pairs");
    std::vector<SweepVertex> vertices;
    for (const auto& item : j) {
        if (!item.is_array() || item.size() != 2 || !item[0].is_number() || !item[1].is_number()) {
            throw FormatError("sweep entries must be [time, voltage] number pairs");
        }
        vertices.push_back({item[0].get<double>(), item[1].get<double>()});
    }
    return SweepSpec(std::move(vertices));
}

}  // namespace ifmem
