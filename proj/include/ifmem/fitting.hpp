#pragma once

#include <array>
#include <bitset>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ifmem/data_io.hpp"
#include "ifmem/params.hpp"
#include "ifmem/simulator.hpp"

namespace ifmem {

struct Bounds {
    double low = 0.0;
    double high = 0.0;
};

using ParamMask = std::bitset<kParamCount>;

inline std::size_t index_of(ParamId id) { return static_cast<std::size_t>(id); }

struct FitConfig {
    ModelParameters theta0;
    /// Held at their theta0 value. V_p and V_n are frozen regardless.
    ParamMask frozen;
    std::array<Bounds, kParamCount> bounds{};
    /// Relative MAE tolerance of the simplex search.
    double objective_tolerance = 1e-6;
    /// Simplex size at convergence, in searched coordinates (log units for magnitudes).
    double parameter_tolerance = 1e-4;
    int max_evaluations = 80000;
    /// Simplex restarts around the incumbent (see NelderMeadOptions).
    int max_restarts = 10;
    double restart_step = 0.5;
    int restart_patience = 2;
    /// Share of max_evaluations spent on the separable prefit, which searches
    /// the nonlinear parameters with the amplitudes g_* solved by least squares.
    double prefit_share = 0.4;
    /// Final stage minimizing MAE * (1 + proximity_weight * |z - z0|^2), with
    /// z the search coordinates and z0 those of theta0. Settles directions
    /// the data cannot resolve near theta0. Uses selection_share of the
    /// budget; 0 disables.
    double proximity_weight = 1e-3;
    double selection_share = 0.25;
    /// Independent seeded starts sharing max_evaluations (see NelderMeadOptions).
    int starts = 4;
    double start_spread = 0.5;
    /// Integration step; 0 takes the mean sample spacing of the measured trace.
    double dt = 0.0;
    std::uint64_t seed = 0;
};

/// Throws DomainError when bounds do not contain theta0 or tolerances are
/// not positive.
void validate(const FitConfig& cfg);

/// Fitting defaults: theta0 is the cross-area average of the given means,
/// bounds are [0, 10 x largest mean] for magnitudes and (0, 1) for window
/// onsets, V_p and V_n frozen.
FitConfig default_fit_config(std::span<const GaussianParamSet> reference_sets);

struct FitResult {
    ModelParameters theta_hat;
    double mae = 0.0;  // A
    double mpe = 0.0;  // %
    int evaluations = 0;
    bool converged = false;
};

/// Minimises MAE between the model driven by the measured voltages and the
/// measured currents, over the non-frozen parameters. Magnitudes are searched
/// in log space. Deterministic for fixed inputs and seed.
FitResult fit_single(const IVTrace& measured, const FitConfig& cfg);

struct TwoStepFitResult {
    /// One per input area, in input order.
    std::vector<GaussianParamSet> areas;
    /// Step-1 cross-area averages of A_p, alpha_p, x_p (other fields are theta0).
    ModelParameters frozen_values;
    std::vector<std::vector<FitResult>> step1;
    std::vector<std::vector<FitResult>> step2;

    bool all_converged() const;
};

/// Fit every trace, freeze the area-independent switching parameters at
/// their cross-area averages, refit, then summarise each area by per-
/// parameter sample mean and SD. `threads` = 0 uses the hardware
/// concurrency; output does not depend on the thread count.
TwoStepFitResult two_step_fit(std::span<const MeasurementSet> datasets, const FitConfig& cfg,
                              unsigned threads = 0);

/// Sample mean and SD (n - 1 denominator; SD is 0 for a single value).
NormalParam gaussian_summary(std::span<const double> values);

/// Parameters frozen between the two regression steps.
inline constexpr std::array<ParamId, 3> kAreaIndependent = {ParamId::A_p, ParamId::alpha_p,
                                                            ParamId::x_p};

/// Table-1-style text report (mean and SD per parameter, one column pair per area).
std::string format_fit_report(const TwoStepFitResult& result);

}  // namespace ifmem
