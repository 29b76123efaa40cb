#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "ifmem/data_io.hpp"
#include "ifmem/params.hpp"
#include "ifmem/simulator.hpp"
#include "ifmem/waveform.hpp"

namespace ifmem {

// --- device-to-device variation -------------------------------------------------

inline constexpr int kMaxRejections = 1000;

/// Draws every parameter independently from its normal distribution,
/// redrawing values outside the parameter's admissible range. sd = 0 yields
/// the mean exactly. Deterministic in `seed`.
ModelParameters sample_parameters(const GaussianParamSet& dist, std::uint64_t seed);

/// Seed of ensemble member `index`.
std::uint64_t member_seed(std::uint64_t seed, std::size_t index);

/// `n` simulations with independently sampled parameters; member i uses
/// member_seed(seed, i).
std::vector<IVTrace> ensemble(const GaussianParamSet& dist, std::size_t n, const SweepSpec& spec,
                              const SimulationConfig& cfg, std::uint64_t seed,
                              unsigned threads = 0);

// --- one-at-a-time sensitivity ------------------------------------------------------

inline constexpr double kTargetMpe = 10.0;       // %
inline constexpr double kMpeTolerance = 0.1;     // %
inline constexpr int kMaxBisections = 60;

/// Relative change needed in one direction; nullopt means more than 100 %.
using Change = std::optional<double>;

struct ParamSensitivity {
    ParamId id;
    Change decrease;  // percent
    Change increase;  // percent

    double average() const;  // over-cutoff counts as 100
};

struct SensitivityReport {
    std::vector<ParamSensitivity> params;  // fixed parameter order
    std::vector<std::string> warnings;
};

/// Parameters perturbed by the search (everything except V_p and V_n).
std::vector<ParamId> sensitivity_params();

/// Scales each parameter by (1 - d) and (1 + d) and bisects d in (0, 1] for
/// the change giving 10 % MPE against the unperturbed trace.
SensitivityReport sensitivity_search(const ModelParameters& params, const SweepSpec& spec,
                                     const SimulationConfig& cfg, unsigned threads = 0);

/// MPE of the trace with one parameter scaled by (1 + signed_change) against
/// `reference`. Window onsets are kept inside (0, 1).
double perturbed_mpe(const ModelParameters& params, ParamId id, double signed_change,
                     const SampledWaveform& waveform, const SimulationConfig& cfg,
                     const IVTrace& reference);

/// Several device areas side by side, ranked by average change (ascending).
struct SensitivityTable {
    struct Row {
        ParamId id;
        std::vector<ParamSensitivity> per_area;
        double average;
    };
    std::vector<std::string> area_labels;
    std::vector<Row> rows;
};

SensitivityTable rank_sensitivity(const std::vector<std::string>& area_labels,
                                  const std::vector<SensitivityReport>& reports);

std::string sensitivity_csv(const SensitivityTable& table);
nlohmann::json sensitivity_json(const SensitivityTable& table);

// --- area trends -----------------------------------------------------------------

enum class Trend { decreasing, increasing, flat, non_monotonic };

std::string_view trend_name(Trend t);

struct TrendEntry {
    ParamId id;
    Trend trend;
};

inline constexpr double kFlatSpread = 1e-6;

/// Classifies each parameter's mean across sets ordered small to large area.
std::vector<TrendEntry> trend_check(const std::vector<GaussianParamSet>& sets);

}  // namespace ifmem
