#include "ifmem/variation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "ifmem/errors.hpp"
#include "ifmem/objective.hpp"
#include "ifmem/parallel.hpp"

namespace ifmem {
namespace {

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr double kOnsetMargin = 1e-9;

std::string percent_text(double change) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", 100.0 * change);
    return buf;
}

}  // namespace

ModelParameters sample_parameters(const GaussianParamSet& dist, std::uint64_t seed) {
    validate(dist);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> standard(0.0, 1.0);

    ModelParameters p = dist.means();
    for (ParamId id : kAllParams) {
        const NormalParam& n = dist[id];
        if (n.sd == 0.0) continue;
        int attempt = 0;
        double value = 0.0;
        do {
            if (attempt++ == kMaxRejections) {
                throw InfeasibleDistributionError(
                    "no admissible draw for " + std::string(param_name(id)) + " after " +
                    std::to_string(kMaxRejections) + " attempts");
            }
            value = n.mean + n.sd * standard(rng);
        } while (!admissible(id, value));
        p[id] = value;
    }
    return p;
}

std::uint64_t member_seed(std::uint64_t seed, std::size_t index) {
    return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(index)));
}

std::vector<IVTrace> ensemble(const GaussianParamSet& dist, std::size_t n, const SweepSpec& spec,
                              const SimulationConfig& cfg, std::uint64_t seed, unsigned threads) {
    if (n == 0) throw DomainError("ensemble size must be at least 1");
    const SampledWaveform waveform = sample(spec, cfg.dt);
    std::vector<IVTrace> traces(n);
    parallel_for(n, threads, [&](std::size_t i) {
        traces[i] = simulate(sample_parameters(dist, member_seed(seed, i)), waveform, cfg);
    });
    return traces;
}

// --- sensitivity ------------------------------------------------------------------

double ParamSensitivity::average() const {
    return (decrease.value_or(100.0) + increase.value_or(100.0)) / 2.0;
}

std::vector<ParamId> sensitivity_params() {
    std::vector<ParamId> ids;
    for (ParamId id : kAllParams) {
        if (id != ParamId::V_p && id != ParamId::V_n) ids.push_back(id);
    }
    return ids;
}

double perturbed_mpe(const ModelParameters& params, ParamId id, double signed_change,
                     const SampledWaveform& waveform, const SimulationConfig& cfg,
                     const IVTrace& reference) {
    ModelParameters varied = params;
    double value = params[id] * (1.0 + signed_change);
    if (is_window_onset(id)) value = std::clamp(value, kOnsetMargin, 1.0 - kOnsetMargin);
    varied[id] = std::max(value, 0.0);
    try {
        const IVTrace trace = simulate(varied, waveform, cfg);
        return mpe(std::span<const double>(trace.current),
                   std::span<const double>(reference.current));
    } catch (const NumericalError& e) {
        throw NumericalError("sensitivity probe " + std::string(param_name(id)) + " at change " +
                             percent_text(signed_change) + "%: " + e.what());
    }
}

namespace {

struct DirectionResult {
    Change change;
    std::string warning;
};

DirectionResult search_direction(const ModelParameters& params, ParamId id, double sign,
                                 const SampledWaveform& waveform, const SimulationConfig& cfg,
                                 const IVTrace& reference) {
    auto probe = [&](double d) { return perturbed_mpe(params, id, sign * d, waveform, cfg, reference); };
    const std::string label = std::string(param_name(id)) + (sign < 0 ? " decrease" : " increase");

    const double at_cutoff = probe(1.0);
    if (at_cutoff < kTargetMpe) return {std::nullopt, {}};
    if (std::abs(at_cutoff - kTargetMpe) <= kMpeTolerance) return {1.0, {}};

    // bisection, verifying that probe values stay inside the bracket values
    double lo = 0.0, hi = 1.0;
    double m_lo = 0.0, m_hi = at_cutoff;
    bool monotone = true;
    for (int it = 0; it < kMaxBisections; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double m = probe(mid);
        if (m < m_lo || m > m_hi) {
            monotone = false;
            break;
        }
        if (std::abs(m - kTargetMpe) <= kMpeTolerance) return {mid, {}};
        if (m < kTargetMpe) {
            lo = mid;
            m_lo = m;
        } else {
            hi = mid;
            m_hi = m;
        }
    }
    if (monotone) {
        return {hi, label + ": MPE jumps across 10% near " + percent_text(hi) + "%; reporting the upper bracket"};
    }

    // fall back to a grid scan for the first crossing, then refine inside that cell
    constexpr int kGrid = 200;
    double prev = 0.0;
    for (int k = 1; k <= kGrid; ++k) {
        const double d = static_cast<double>(k) / kGrid;
        const double m = probe(d);
        if (m >= kTargetMpe - kMpeTolerance) {
            lo = prev;
            hi = d;
            for (int it = 0; it < kMaxBisections && std::abs(m - kTargetMpe) > kMpeTolerance; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double mm = probe(mid);
                if (std::abs(mm - kTargetMpe) <= kMpeTolerance) {
                    hi = mid;
                    break;
                }
                (mm < kTargetMpe ? lo : hi) = mid;
            }
            return {hi, label + ": MPE is not monotone in the change; used a grid scan"};
        }
        prev = d;
    }
    return {std::nullopt, label + ": MPE is not monotone in the change; no crossing on the grid"};
}

}  // namespace

SensitivityReport sensitivity_search(const ModelParameters& params, const SweepSpec& spec,
                                     const SimulationConfig& cfg, unsigned threads) {
    validate(params);
    const SampledWaveform waveform = sample(spec, cfg.dt);
    const IVTrace reference = simulate(params, waveform, cfg);

    const std::vector<ParamId> ids = sensitivity_params();
    std::vector<DirectionResult> results(2 * ids.size());
    parallel_for(results.size(), threads, [&](std::size_t j) {
        const double sign = j % 2 == 0 ? -1.0 : 1.0;
        results[j] = search_direction(params, ids[j / 2], sign, waveform, cfg, reference);
    });

    SensitivityReport report;
    auto as_percent = [](const Change& c) -> Change {
        if (!c) return std::nullopt;
        return 100.0 * *c;
    };
    for (std::size_t i = 0; i < ids.size(); ++i) {
        report.params.push_back(
            {ids[i], as_percent(results[2 * i].change), as_percent(results[2 * i + 1].change)});
        for (const auto* r : {&results[2 * i], &results[2 * i + 1]}) {
            if (!r->warning.empty()) report.warnings.push_back(r->warning);
        }
    }
    return report;
}

SensitivityTable rank_sensitivity(const std::vector<std::string>& area_labels,
                                  const std::vector<SensitivityReport>& reports) {
    if (area_labels.size() != reports.size() || reports.empty()) {
        throw ValidationError("need one area label per sensitivity report");
    }
    SensitivityTable table;
    table.area_labels = area_labels;
    for (std::size_t i = 0; i < reports.front().params.size(); ++i) {
        SensitivityTable::Row row{reports.front().params[i].id, {}, 0.0};
        double sum = 0.0;
        for (const auto& report : reports) {
            if (report.params.size() != reports.front().params.size() ||
                report.params[i].id != row.id) {
                throw ValidationError("sensitivity reports list different parameters");
            }
            row.per_area.push_back(report.params[i]);
            sum += report.params[i].average();
        }
        row.average = sum / static_cast<double>(reports.size());
        table.rows.push_back(std::move(row));
    }
    std::stable_sort(table.rows.begin(), table.rows.end(),
                     [](const auto& a, const auto& b) { return a.average < b.average; });
    return table;
}

std::string sensitivity_csv(const SensitivityTable& table) {
    auto cell = [](const Change& c) {
        if (!c) return std::string(">100.0");
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.1f", *c);
        return std::string(buf);
    };
    std::string out = "parameter";
    for (const auto& label : table.area_labels) {
        out += "," + label + " decrease %," + label + " increase %";
    }
    out += ",average %\n";
    for (const auto& row : table.rows) {
        out += param_name(row.id);
        for (const auto& s : row.per_area) out += "," + cell(s.decrease) + "," + cell(s.increase);
        char buf[32];
        std::snprintf(buf, sizeof buf, ",%.2f\n", row.average);
        out += buf;
    }
    return out;
}

nlohmann::json sensitivity_json(const SensitivityTable& table) {
    using nlohmann::json;
    auto value = [](const Change& c) -> json {
        if (!c) return "over-cutoff";
        return *c;
    };
    json rows = json::array();
    for (const auto& row : table.rows) {
        json areas = json::array();
        for (std::size_t a = 0; a < row.per_area.size(); ++a) {
            areas.push_back({{"area", table.area_labels[a]},
                             {"decrease_percent", value(row.per_area[a].decrease)},
                             {"increase_percent", value(row.per_area[a].increase)}});
        }
        rows.push_back({{"parameter", std::string(param_name(row.id))},
                        {"areas", areas},
                        {"average_percent", row.average}});
    }
    return json{{"target_mpe_percent", kTargetMpe}, {"areas", table.area_labels}, {"ranking", rows}};
}

// --- trends -----------------------------------------------------------------------

std::string_view trend_name(Trend t) {
    switch (t) {
        case Trend::decreasing: return "decreasing";
        case Trend::increasing: return "increasing";
        case Trend::flat: return "flat";
        case Trend::non_monotonic: return "non-monotonic";
    }
    return "non-monotonic";
}

std::vector<TrendEntry> trend_check(const std::vector<GaussianParamSet>& sets) {
    if (sets.size() < 2) throw ValidationError("trend check needs at least two parameter sets");
    std::vector<TrendEntry> out;
    for (ParamId id : kAllParams) {
        double lo = sets.front()[id].mean, hi = lo, scale = 0.0;
        bool increasing = true, decreasing = true;
        for (std::size_t k = 0; k < sets.size(); ++k) {
            const double m = sets[k][id].mean;
            lo = std::min(lo, m);
            hi = std::max(hi, m);
            scale = std::max(scale, std::abs(m));
            if (k > 0) {
                const double prev = sets[k - 1][id].mean;
                increasing = increasing && m > prev;
                decreasing = decreasing && m < prev;
            }
        }
        Trend t = Trend::non_monotonic;
        if (scale == 0.0 || (hi - lo) / scale < kFlatSpread) {
            t = Trend::flat;
        } else if (increasing) {
            t = Trend::increasing;
        } else if (decreasing) {
            t = Trend::decreasing;
        }
        out.push_back({id, t});
    }
    return out;
}

}  // namespace ifmem
