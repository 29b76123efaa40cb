#include "ifmem/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "ifmem/errors.hpp"
#include "ifmem/model.hpp"
#include "ifmem/nelder_mead.hpp"
#include "ifmem/objective.hpp"
#include "ifmem/parallel.hpp"

namespace ifmem {
namespace {

constexpr double kOnsetMargin = 1e-9;
// Lower edge of a log-scaled coordinate whose bound is 0, relative to its upper bound.
constexpr double kLogFloor = 1e-12;

// Mean shifted by the first value: exact when all values are equal.
double shifted_mean(std::span<const double> values) {
    double offset = 0.0;
    for (double v : values) offset += v - values.front();
    return values.front() + offset / static_cast<double>(values.size());
}

bool always_frozen(ParamId id) { return id == ParamId::V_p || id == ParamId::V_n; }

// One searched coordinate: either ln(value) or the value itself.
struct Coordinate {
    ParamId id;
    bool log_scale;
    double lower;
    double upper;

    double encode(double value) const { return log_scale ? std::log(value) : value; }
    double decode(double z) const { return log_scale ? std::exp(z) : z; }
};

std::vector<Coordinate> coordinates(const FitConfig& cfg) {
    std::vector<Coordinate> coords;
    for (ParamId id : kAllParams) {
        if (always_frozen(id) || cfg.frozen.test(index_of(id))) continue;
        Bounds b = cfg.bounds[index_of(id)];
        if (is_window_onset(id)) {
            b.low = std::max(b.low, kOnsetMargin);
            b.high = std::min(b.high, 1.0 - kOnsetMargin);
        }
        if (cfg.theta0[id] > 0.0 && b.high > 0.0) {
            const double low = std::max(b.low, b.high * kLogFloor);
            coords.push_back({id, true, std::log(low), std::log(b.high)});
        } else {
            coords.push_back({id, false, b.low, b.high});
        }
    }
    return coords;
}

double uniform_step(const IVTrace& measured) {
    if (measured.size() < 2) throw ValidationError("measured trace needs at least two samples");
    const double dt = measured.dt > 0.0
                          ? measured.dt
                          : (measured.time.back() - measured.time.front()) /
                                static_cast<double>(measured.size() - 1);
    for (std::size_t i = 0; i < measured.size(); ++i) {
        const double expected = measured.time.front() + static_cast<double>(i) * dt;
        if (std::abs(measured.time[i] - expected) > dt / 2.0) {
            throw ValidationError("measured trace is not uniformly sampled (sample " +
                                  std::to_string(i) + ")");
        }
    }
    return dt;
}

struct Box {
    std::vector<double> start;
    std::vector<double> lower;
    std::vector<double> upper;
};

Box box_of(const std::vector<Coordinate>& coords, const ModelParameters& theta0) {
    Box box;
    for (const auto& c : coords) {
        box.lower.push_back(c.lower);
        box.upper.push_back(c.upper);
        box.start.push_back(std::clamp(c.encode(theta0[c.id]), c.lower, c.upper));
    }
    return box;
}

ModelParameters decode(const std::vector<Coordinate>& coords, const ModelParameters& theta0,
                       std::span<const double> z) {
    ModelParameters theta = theta0;
    for (std::size_t k = 0; k < coords.size(); ++k) theta[coords[k].id] = coords[k].decode(z[k]);
    // the log round trip must not move values the search never touched
    for (ParamId id : kAllParams) {
        if (!admissible(id, theta[id])) theta[id] = theta0[id];
    }
    return theta;
}

bool is_amplitude(ParamId id) {
    return id == ParamId::g_max_p || id == ParamId::g_min_p || id == ParamId::g_max_n ||
           id == ParamId::g_min_n;
}

// Least-squares sums for y ~ g1 a + g2 c.
struct Sums {
    double aa = 0, ac = 0, cc = 0, ay = 0, cy = 0;
};

struct Amplitude {
    bool fixed;
    double value;  // when fixed
    Bounds bounds;
};

// Minimises the quadratic over the box, fixed amplitudes held. Candidates are
// the interior optimum and every optimum with one or both at a bound.
std::array<double, 2> bounded_least_squares(const Sums& s, const std::array<Amplitude, 2>& g) {
    auto sse = [&](double g1, double g2) {
        return g1 * g1 * s.aa + 2.0 * g1 * g2 * s.ac + g2 * g2 * s.cc - 2.0 * (g1 * s.ay + g2 * s.cy);
    };
    auto along = [&](int which, double other) {
        const double diag = which == 0 ? s.aa : s.cc;
        const double rhs = (which == 0 ? s.ay : s.cy) - other * s.ac;
        const double v = diag > 0.0 ? rhs / diag : g[which].bounds.low;
        return std::clamp(v, g[which].bounds.low, g[which].bounds.high);
    };
    std::array<double, 2> best{g[0].fixed ? g[0].value : g[0].bounds.low,
                               g[1].fixed ? g[1].value : g[1].bounds.low};
    double best_sse = sse(best[0], best[1]);
    auto consider = [&](double g1, double g2) {
        const double e = sse(g1, g2);
        if (e < best_sse) {
            best_sse = e;
            best = {g1, g2};
        }
    };
    auto choices = [&](int which) {
        if (g[which].fixed) return std::vector<double>{g[which].value};
        return std::vector<double>{g[which].bounds.low, g[which].bounds.high};
    };
    for (double g2 : choices(1)) {
        if (!g[0].fixed) consider(along(0, g2), g2);
        for (double g1 : choices(0)) consider(g1, g2);
    }
    if (!g[1].fixed) {
        for (double g1 : choices(0)) consider(g1, along(1, g1));
    }
    if (!g[0].fixed && !g[1].fixed) {
        const double det = s.aa * s.cc - s.ac * s.ac;
        if (det > 1e-12 * s.aa * s.cc) {
            const double g1 = (s.ay * s.cc - s.cy * s.ac) / det;
            const double g2 = (s.cy * s.aa - s.ay * s.ac) / det;
            if (g1 >= g[0].bounds.low && g1 <= g[0].bounds.high && g2 >= g[1].bounds.low &&
                g2 <= g[1].bounds.high) {
                consider(g1, g2);
            }
        }
    }
    return best;
}

// The current is linear in g_max_p, g_min_p (v >= 0) and g_max_n, g_min_n
// (v < 0) once the state trajectory and the exponents are known. solve()
// integrates the state, fits the free amplitudes by bounded least squares,
// stores them in theta and returns the resulting MAE.
class AmplitudeSolver {
public:
    AmplitudeSolver(const FitConfig& cfg, double dt, std::span<const double> voltages,
                    std::span<const double> exp_v, std::span<const double> exp_neg_v,
                    std::span<const double> measured)
        : cfg_(cfg), dt_(dt), v_(voltages), exp_v_(exp_v), exp_neg_v_(exp_neg_v), y_(measured),
          a_(voltages.size()), c_(voltages.size()) {}

    double solve(ModelParameters& theta) const {
        const detail::Kernel kernel(theta);
        Sums pos, neg;
        double x = theta.x0;
        for (std::size_t i = 0; i < v_.size(); ++i) {
            const double v = v_[i];
            if (v >= 0.0) {
                a_[i] = std::sinh(theta.b_max_p * v) * x;
                c_[i] = -std::expm1(-theta.b_min_p * v) * (1.0 - x);
            } else {
                a_[i] = -std::expm1(-theta.b_max_n * v) * x;
                c_[i] = std::sinh(theta.b_min_n * v) * (1.0 - x);
            }
            Sums& s = v >= 0.0 ? pos : neg;
            s.aa += a_[i] * a_[i];
            s.ac += a_[i] * c_[i];
            s.cc += c_[i] * c_[i];
            s.ay += a_[i] * y_[i];
            s.cy += c_[i] * y_[i];
            x = std::clamp(x + dt_ * kernel.derivative(v, x, exp_v_[i], exp_neg_v_[i]), 0.0, 1.0);
        }
        const auto gp = bounded_least_squares(pos, {amplitude(ParamId::g_max_p, theta),
                                                    amplitude(ParamId::g_min_p, theta)});
        const auto gn = bounded_least_squares(neg, {amplitude(ParamId::g_max_n, theta),
                                                    amplitude(ParamId::g_min_n, theta)});
        theta.g_max_p = gp[0];
        theta.g_min_p = gp[1];
        theta.g_max_n = gn[0];
        theta.g_min_n = gn[1];

        double sum = 0.0;
        for (std::size_t i = 0; i < v_.size(); ++i) {
            const auto& g = v_[i] >= 0.0 ? gp : gn;
            sum += std::abs(g[0] * a_[i] + g[1] * c_[i] - y_[i]);
        }
        const double value = sum / static_cast<double>(v_.size());
        return std::isfinite(value) ? value : std::numeric_limits<double>::infinity();
    }

private:
    Amplitude amplitude(ParamId id, const ModelParameters& theta) const {
        const bool fixed = cfg_.frozen.test(index_of(id));
        return {fixed, theta[id], cfg_.bounds[index_of(id)]};
    }

    const FitConfig& cfg_;
    double dt_;
    std::span<const double> v_, exp_v_, exp_neg_v_, y_;
    mutable std::vector<double> a_, c_;
};

// MAE of the model driven by `voltages` against `measured`, integrated as in
// simulate() but without storing the trace. exp(v) and exp(-v) per sample are
// supplied by the caller since the waveform is fixed during a fit.
double simulated_mae(const ModelParameters& theta, double dt, std::span<const double> voltages,
                     std::span<const double> exp_v, std::span<const double> exp_neg_v,
                     std::span<const double> measured) {
    const detail::Kernel kernel(theta);
    double x = theta.x0;
    double sum = 0.0;
    for (std::size_t i = 0; i < voltages.size(); ++i) {
        const double v = voltages[i];
        sum += std::abs(kernel.current(v, x) - measured[i]);
        x = std::clamp(x + dt * kernel.derivative(v, x, exp_v[i], exp_neg_v[i]), 0.0, 1.0);
    }
    const double value = sum / static_cast<double>(voltages.size());
    return std::isfinite(value) ? value : std::numeric_limits<double>::infinity();
}

}  // namespace

void validate(const FitConfig& cfg) {
    validate(cfg.theta0);
    if (!(cfg.objective_tolerance > 0.0)) throw DomainError("objective tolerance must be positive");
    if (!(cfg.parameter_tolerance > 0.0)) throw DomainError("parameter tolerance must be positive");
    if (!(cfg.prefit_share >= 0.0 && cfg.selection_share >= 0.0 &&
          cfg.prefit_share + cfg.selection_share < 1.0)) {
        throw DomainError("prefit and selection shares must be >= 0 and sum below 1");
    }
    if (!(cfg.proximity_weight >= 0.0)) throw DomainError("proximity weight must be >= 0");
    if (cfg.max_evaluations <= 0) throw DomainError("max evaluations must be positive");
    if (!(cfg.dt >= 0.0) || !std::isfinite(cfg.dt)) throw DomainError("dt must be >= 0");
    for (ParamId id : kAllParams) {
        const Bounds& b = cfg.bounds[index_of(id)];
        const double v = cfg.theta0[id];
        if (!(b.low <= v && v <= b.high)) {
            throw DomainError("bounds of " + std::string(param_name(id)) + " do not contain theta0");
        }
    }
}

FitConfig default_fit_config(std::span<const GaussianParamSet> reference_sets) {
    if (reference_sets.empty()) throw ValidationError("need at least one reference parameter set");
    FitConfig cfg;
    cfg.theta0.eta = reference_sets.front().eta;
    cfg.theta0.x0 = reference_sets.front().x0;
    for (ParamId id : kAllParams) {
        std::vector<double> means;
        for (const auto& set : reference_sets) means.push_back(set[id].mean);
        cfg.theta0[id] = shifted_mean(means);
        const double largest = *std::max_element(means.begin(), means.end());
        cfg.bounds[index_of(id)] = is_window_onset(id) ? Bounds{0.0, 1.0} : Bounds{0.0, 10.0 * largest};
    }
    cfg.frozen.set(index_of(ParamId::V_p));
    cfg.frozen.set(index_of(ParamId::V_n));
    return cfg;
}

FitResult fit_single(const IVTrace& measured, const FitConfig& cfg) {
    validate(cfg);
    const double dt = cfg.dt > 0.0 ? cfg.dt : uniform_step(measured);
    if (measured.current.size() != measured.voltage.size() || measured.voltage.empty()) {
        throw ValidationError("measured trace columns differ in length");
    }
    const SampledWaveform waveform{dt, measured.voltage};
    validate(waveform);
    const SimulationConfig sim_cfg{.dt = dt};
    const std::size_t n = waveform.voltages.size();

    double mean_abs = 0.0;
    for (double c : measured.current) mean_abs += std::abs(c);
    mean_abs /= static_cast<double>(n);

    std::vector<double> exp_v(n);
    std::vector<double> exp_neg_v(n);
    for (std::size_t i = 0; i < n; ++i) {
        exp_v[i] = std::exp(waveform.voltages[i]);
        exp_neg_v[i] = std::exp(-waveform.voltages[i]);
    }

    NelderMeadOptions options;
    options.f_rel_tol = cfg.objective_tolerance;
    options.f_abs_tol = cfg.objective_tolerance * mean_abs;
    options.x_tol = cfg.parameter_tolerance;
    options.max_restarts = cfg.max_restarts;
    options.restart_step = cfg.restart_step;
    options.patience = cfg.restart_patience;
    options.starts = cfg.starts;
    options.start_spread = cfg.start_spread;
    options.seed = cfg.seed;

    const std::vector<Coordinate> coords = coordinates(cfg);
    const Box box = box_of(coords, cfg.theta0);
    ModelParameters start_theta = cfg.theta0;
    int evaluations = 0;

    // Stage 1: search the nonlinear parameters with the amplitudes solved in
    // closed form. Skipped when every amplitude is frozen.
    std::vector<Coordinate> nonlinear;
    for (const auto& c : coords) {
        if (!is_amplitude(c.id)) nonlinear.push_back(c);
    }
    const int prefit_budget = nonlinear.size() < coords.size()
                                  ? static_cast<int>(cfg.prefit_share * cfg.max_evaluations)
                                  : 0;
    if (prefit_budget > 0) {
        const AmplitudeSolver solver(cfg, dt, waveform.voltages, exp_v, exp_neg_v, measured.current);
        const Box nl_box = box_of(nonlinear, cfg.theta0);
        auto theta_of = [&](std::span<const double> z) { return decode(nonlinear, cfg.theta0, z); };
        const Objective projected = [&](std::span<const double> z) {
            ModelParameters theta = theta_of(z);
            return solver.solve(theta);
        };
        NelderMeadOptions prefit = options;
        prefit.max_evaluations = prefit_budget;
        const NelderMeadResult r = minimize_nelder_mead(projected, nl_box.start, nl_box.lower, nl_box.upper, prefit);
        evaluations += r.evaluations;
        start_theta = theta_of(r.x);
        solver.solve(start_theta);
        options.starts = 1;  // the prefit already explored; what follows is a polish
    }

    // Stage 2: every free parameter, exact MAE.
    const int selection_budget =
        cfg.proximity_weight > 0.0 ? static_cast<int>(cfg.selection_share * cfg.max_evaluations) : 0;
    options.max_evaluations = std::max(1, cfg.max_evaluations - evaluations - selection_budget);
    std::vector<double> start(coords.size());
    for (std::size_t k = 0; k < coords.size(); ++k) {
        start[k] = std::clamp(coords[k].encode(start_theta[coords[k].id]), box.lower[k], box.upper[k]);
    }
    const Objective objective = [&](std::span<const double> z) {
        return simulated_mae(decode(coords, cfg.theta0, z), dt, waveform.voltages, exp_v, exp_neg_v,
                             measured.current);
    };
    if (prefit_budget > 0 && start != box.start) {
        // the prefit amplitudes are not exact; never start worse than theta0
        evaluations += 2;
        if (objective(box.start) <= objective(start)) start = box.start;
    }
    options.max_evaluations = std::max(1, cfg.max_evaluations - evaluations - selection_budget);
    NelderMeadResult best = minimize_nelder_mead(objective, start, box.lower, box.upper, options);
    evaluations += best.evaluations;
    const bool converged = best.converged;

    // Stage 3: MAE weighted by (1 + w * squared distance to theta0 in search
    // coordinates), started from the stage 2 optimum. Directions the data
    // cannot resolve drift back toward theta0 instead of wandering with noise.
    if (selection_budget > 2 && !coords.empty()) {
        const Objective proximal = [&](std::span<const double> z) {
            double d = 0.0;
            for (std::size_t k = 0; k < z.size(); ++k) d += (z[k] - box.start[k]) * (z[k] - box.start[k]);
            return objective(z) * (1.0 + cfg.proximity_weight * d);
        };
        NelderMeadOptions select = options;
        select.max_evaluations = selection_budget - 2;  // 2 for the final guard
        select.starts = 1;
        const NelderMeadResult chosen = minimize_nelder_mead(proximal, best.x, box.lower, box.upper, select);
        evaluations += chosen.evaluations;
        // never end worse than theta0
        evaluations += 2;
        if (objective(chosen.x) <= objective(box.start)) best.x = chosen.x;
    }

    FitResult result;
    result.theta_hat = decode(coords, cfg.theta0, best.x);
    // exact theta0 values for coordinates that ended where theta0 encodes to
    for (std::size_t k = 0; k < coords.size(); ++k) {
        if (best.x[k] == box.start[k]) result.theta_hat[coords[k].id] = cfg.theta0[coords[k].id];
    }
    const IVTrace sim = simulate(result.theta_hat, waveform, sim_cfg);
    result.mae = mae(std::span<const double>(sim.current), std::span<const double>(measured.current));
    result.mpe = mpe(std::span<const double>(sim.current), std::span<const double>(measured.current));
    result.evaluations = evaluations;
    result.converged = converged;
    return result;
}

NormalParam gaussian_summary(std::span<const double> values) {
    if (values.empty()) throw ValidationError("cannot summarise an empty sample");
    const double n = static_cast<double>(values.size());
    const double mean = shifted_mean(values);
    if (values.size() == 1) return {mean, 0.0};
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / (n - 1.0))};
}

bool TwoStepFitResult::all_converged() const {
    for (const auto* step : {&step1, &step2}) {
        for (const auto& area : *step) {
            for (const auto& r : area) {
                if (!r.converged) return false;
            }
        }
    }
    return true;
}

namespace {

// Fits every trace of every area with `cfg`; results keep the input layout.
std::vector<std::vector<FitResult>> fit_all(std::span<const MeasurementSet> datasets,
                                            const FitConfig& cfg, unsigned threads) {
    struct Job {
        std::size_t area;
        std::size_t trace;
    };
    std::vector<Job> jobs;
    std::vector<std::vector<FitResult>> results(datasets.size());
    for (std::size_t a = 0; a < datasets.size(); ++a) {
        results[a].resize(datasets[a].traces.size());
        for (std::size_t t = 0; t < datasets[a].traces.size(); ++t) jobs.push_back({a, t});
    }
    parallel_for(jobs.size(), threads, [&](std::size_t j) {
        const Job& job = jobs[j];
        results[job.area][job.trace] = fit_single(datasets[job.area].traces[job.trace], cfg);
    });
    return results;
}

std::vector<double> column(const std::vector<FitResult>& fits, ParamId id) {
    std::vector<double> out;
    out.reserve(fits.size());
    for (const auto& f : fits) out.push_back(f.theta_hat[id]);
    return out;
}

}  // namespace

TwoStepFitResult two_step_fit(std::span<const MeasurementSet> datasets, const FitConfig& cfg,
                              unsigned threads) {
    validate(cfg);
    if (datasets.empty()) throw ValidationError("no measurement sets given");
    for (const auto& set : datasets) {
        if (set.traces.empty()) {
            throw ValidationError("area '" + set.device_area_label + "' has no traces");
        }
    }

    TwoStepFitResult out;
    out.step1 = fit_all(datasets, cfg, threads);

    // cross-area average of the per-area means
    FitConfig refit = cfg;
    out.frozen_values = cfg.theta0;
    for (ParamId id : kAreaIndependent) {
        std::vector<double> area_means;
        for (const auto& area : out.step1) area_means.push_back(gaussian_summary(column(area, id)).mean);
        const double average = shifted_mean(area_means);
        out.frozen_values[id] = average;
        refit.theta0[id] = average;
        refit.frozen.set(index_of(id));
    }

    out.step2 = fit_all(datasets, refit, threads);

    for (std::size_t a = 0; a < datasets.size(); ++a) {
        GaussianParamSet g;
        g.area_label = datasets[a].device_area_label;
        g.eta = cfg.theta0.eta;
        g.x0 = cfg.theta0.x0;
        for (ParamId id : kAllParams) {
            if (always_frozen(id) || refit.frozen.test(index_of(id))) {
                g[id] = {refit.theta0[id], 0.0};
            } else {
                g[id] = gaussian_summary(column(out.step2[a], id));
            }
        }
        out.areas.push_back(std::move(g));
    }
    return out;
}

std::string format_fit_report(const TwoStepFitResult& result) {
    std::string out;
    char buf[64];
    out += "parameter";
    for (const auto& g : result.areas) {
        std::snprintf(buf, sizeof buf, "  %-10s %-10s", (g.area_label + " mean").c_str(), "SD");
        out += buf;
    }
    out += "\n";

    auto row = [&](ParamId id) {
        std::snprintf(buf, sizeof buf, "%-9s", std::string(param_name(id)).c_str());
        out += buf;
        for (const auto& g : result.areas) {
            std::snprintf(buf, sizeof buf, "  %-10.3g %-10.3g", g[id].mean, g[id].sd);
            out += buf;
        }
        out += "\n";
    };

    auto area_independent = [](ParamId id) {
        return always_frozen(id) ||
               std::find(kAreaIndependent.begin(), kAreaIndependent.end(), id) != kAreaIndependent.end();
    };
    for (ParamId id : kAllParams) {
        if (!area_independent(id)) row(id);
    }
    out += "-- frozen across areas --\n";
    for (ParamId id : {ParamId::A_p, ParamId::V_p, ParamId::V_n, ParamId::x_p, ParamId::alpha_p}) row(id);

    int total = 0;
    int failed = 0;
    for (const auto* step : {&result.step1, &result.step2}) {
        for (const auto& area : *step) {
            for (const auto& r : area) {
                ++total;
                if (!r.converged) ++failed;
            }
        }
    }
    std::snprintf(buf, sizeof buf, "fits: %d, not converged: %d\n", total, failed);
    out += buf;
    return out;
}

}  // namespace ifmem
