#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace ifmem {

struct NelderMeadOptions {
    int max_evaluations = 20000;
    /// Stop when the simplex value spread is below f_rel_tol * |f_best| + f_abs_tol
    /// and every vertex is within x_tol of the best (infinity norm).
    double f_rel_tol = 1e-9;
    double f_abs_tol = 0.0;
    double x_tol = 1e-7;
    /// Edge length of the initial simplex along each axis.
    double initial_step = 0.25;
    /// Fresh simplices built around the incumbent after convergence, with
    /// edge length restart_step. Restarting stops after `patience`
    /// consecutive restarts without a significant improvement.
    int max_restarts = 4;
    double restart_step = 0.25;
    int patience = 1;
    /// Independent searches sharing the evaluation budget: the first from
    /// `start`, the others from `start` plus seeded normal offsets of
    /// standard deviation start_spread (projected onto the box).
    int starts = 1;
    double start_spread = 0.5;
    /// Orients restart simplices and draws start offsets; the search is
    /// otherwise deterministic.
    std::uint64_t seed = 0;
};

struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
    int evaluations = 0;
    bool converged = false;
};

using Objective = std::function<double(std::span<const double>)>;

/// Box-constrained Nelder-Mead with dimension-adaptive coefficients. Trial
/// points are projected onto [lower, upper]. The first evaluation is at
/// `start`, and the returned value never exceeds f(start). Non-finite
/// objective values are treated as +infinity.
NelderMeadResult minimize_nelder_mead(const Objective& f, std::vector<double> start,
                                      std::span<const double> lower,
                                      std::span<const double> upper,
                                      const NelderMeadOptions& options = {});

}  // namespace ifmem
