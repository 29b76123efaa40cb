#include "ifmem/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace ifmem {
namespace {

using Point = std::vector<double>;

class Search {
public:
    Search(const Objective& f, std::span<const double> lower, std::span<const double> upper,
           const NelderMeadOptions& opt)
        : f_(f), lower_(lower), upper_(upper), opt_(opt), n_(lower.size()),
          limit_(opt.max_evaluations) {
        const double dim = static_cast<double>(n_);
        reflect_ = 1.0;
        expand_ = 1.0 + 2.0 / dim;
        contract_ = 0.75 - 1.0 / (2.0 * dim);
        shrink_ = 1.0 - 1.0 / dim;
    }

    bool exhausted() const { return evaluations_ >= limit_; }
    void set_limit(int limit) { limit_ = std::min(limit, opt_.max_evaluations); }
    int evaluations() const { return evaluations_; }

    double evaluate(Point& x) {
        project(x);
        ++evaluations_;
        const double v = f_(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    }

    // Runs one simplex from `base` until convergence or budget exhaustion.
    // Returns true on convergence. `base`/`base_value` receive the best vertex.
    bool run(Point& base, double& base_value, std::mt19937_64* orient) {
        std::vector<Point> simplex{base};
        std::vector<double> values{base_value};
        for (std::size_t i = 0; i < n_ && !exhausted(); ++i) {
            double step = orient == nullptr ? opt_.initial_step : opt_.restart_step;
            if (orient != nullptr && ((*orient)() & 1U)) step = -step;
            Point p = base;
            p[i] += step;
            project(p);
            if (p[i] == base[i]) {
                p[i] = base[i] - step;
                project(p);
            }
            values.push_back(evaluate(p));
            simplex.push_back(std::move(p));
        }
        if (simplex.size() != n_ + 1) {
            keep_best(simplex, values, base, base_value);
            return false;
        }

        std::vector<std::size_t> order(n_ + 1);
        bool converged = false;
        while (!exhausted()) {
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::stable_sort(order.begin(), order.end(),
                             [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
            reorder(simplex, values, order);
            if (small_enough(simplex, values)) {
                converged = true;
                break;
            }

            Point centroid(n_, 0.0);
            for (std::size_t v = 0; v < n_; ++v) {
                for (std::size_t k = 0; k < n_; ++k) centroid[k] += simplex[v][k];
            }
            for (double& c : centroid) c /= static_cast<double>(n_);

            const Point& worst = simplex[n_];
            Point reflected = along(centroid, worst, -reflect_);
            const double fr = evaluate(reflected);

            if (fr < values[0]) {
                Point expanded = along(centroid, worst, -reflect_ * expand_);
                const double fe = exhausted() ? std::numeric_limits<double>::infinity()
                                              : evaluate(expanded);
                if (fe < fr) {
                    replace_worst(simplex, values, std::move(expanded), fe);
                } else {
                    replace_worst(simplex, values, std::move(reflected), fr);
                }
            } else if (fr < values[n_ - 1]) {
                replace_worst(simplex, values, std::move(reflected), fr);
            } else if (!exhausted()) {
                const bool outside = fr < values[n_];
                Point contracted = outside ? along(centroid, worst, -reflect_ * contract_)
                                           : along(centroid, worst, contract_);
                const double fc = evaluate(contracted);
                if ((outside && fc <= fr) || (!outside && fc < values[n_])) {
                    replace_worst(simplex, values, std::move(contracted), fc);
                } else {
                    for (std::size_t v = 1; v <= n_ && !exhausted(); ++v) {
                        for (std::size_t k = 0; k < n_; ++k) {
                            simplex[v][k] = simplex[0][k] + shrink_ * (simplex[v][k] - simplex[0][k]);
                        }
                        values[v] = evaluate(simplex[v]);
                    }
                }
            }
        }
        keep_best(simplex, values, base, base_value);
        return converged;
    }

    bool improved_enough(double before, double after) const {
        return before - after > opt_.f_rel_tol * std::abs(after) + opt_.f_abs_tol;
    }

private:
    void project(Point& x) const {
        for (std::size_t k = 0; k < n_; ++k) x[k] = std::clamp(x[k], lower_[k], upper_[k]);
    }

    // centroid + t * (towards - centroid)
    static Point along(const Point& centroid, const Point& towards, double t) {
        Point p(centroid.size());
        for (std::size_t k = 0; k < p.size(); ++k) p[k] = centroid[k] + t * (towards[k] - centroid[k]);
        return p;
    }

    void replace_worst(std::vector<Point>& s, std::vector<double>& v, Point p, double value) const {
        s[n_] = std::move(p);
        v[n_] = value;
    }

    static void reorder(std::vector<Point>& s, std::vector<double>& v,
                        const std::vector<std::size_t>& order) {
        std::vector<Point> s2;
        std::vector<double> v2;
        s2.reserve(s.size());
        v2.reserve(v.size());
        for (std::size_t i : order) {
            s2.push_back(std::move(s[i]));
            v2.push_back(v[i]);
        }
        s = std::move(s2);
        v = std::move(v2);
    }

    bool small_enough(const std::vector<Point>& s, const std::vector<double>& v) const {
        const double spread = v[n_] - v[0];
        if (!(spread <= opt_.f_rel_tol * std::abs(v[0]) + opt_.f_abs_tol)) return false;
        for (std::size_t i = 1; i <= n_; ++i) {
            for (std::size_t k = 0; k < n_; ++k) {
                if (std::abs(s[i][k] - s[0][k]) > opt_.x_tol) return false;
            }
        }
        return true;
    }

    static void keep_best(const std::vector<Point>& s, const std::vector<double>& v, Point& best,
                          double& best_value) {
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (v[i] < best_value) {
                best_value = v[i];
                best = s[i];
            }
        }
    }

    const Objective& f_;
    std::span<const double> lower_;
    std::span<const double> upper_;
    const NelderMeadOptions& opt_;
    std::size_t n_;
    int evaluations_ = 0;
    int limit_ = 0;
    double reflect_, expand_, contract_, shrink_;
};

}  // namespace

NelderMeadResult minimize_nelder_mead(const Objective& f, std::vector<double> start,
                                      std::span<const double> lower,
                                      std::span<const double> upper,
                                      const NelderMeadOptions& options) {
    if (lower.size() != start.size() || upper.size() != start.size()) {
        throw std::invalid_argument("bounds and start point differ in dimension");
    }
    for (std::size_t k = 0; k < start.size(); ++k) {
        if (!(lower[k] <= upper[k])) throw std::invalid_argument("empty bound interval");
    }

    if (options.starts < 1) throw std::invalid_argument("need at least one start");

    Search search(f, lower, upper, options);
    NelderMeadResult result;
    result.x = std::move(start);
    result.value = search.evaluate(result.x);
    if (result.x.empty()) {
        result.evaluations = search.evaluations();
        result.converged = true;
        return result;
    }

    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> offset(0.0, options.start_spread);
    const Point origin = result.x;
    bool converged = false;
    for (int s = 0; s < options.starts && search.evaluations() < options.max_evaluations; ++s) {
        Point x = origin;
        double value = result.value;
        if (s > 0) {
            for (double& c : x) c += offset(rng);
            value = search.evaluate(x);
        }
        const int budget_end = static_cast<int>(
            static_cast<long long>(options.max_evaluations) * (s + 1) / options.starts);
        search.set_limit(budget_end);

        bool run_converged = search.run(x, value, nullptr);
        int stale = 0;
        for (int r = 0; run_converged && r < options.max_restarts && !search.exhausted(); ++r) {
            const double before = value;
            const bool finished = search.run(x, value, &rng);
            const bool improved = search.improved_enough(before, value);
            stale = improved ? 0 : stale + 1;
            // an unfinished restart without significant progress keeps the earlier convergence
            run_converged = finished || !improved;
            if (finished && stale >= options.patience) break;
        }
        if (value < result.value || s == 0) {
            if (value < result.value) {
                result.value = value;
                result.x = x;
            }
            converged = run_converged;
        }
    }
    result.evaluations = search.evaluations();
    result.converged = converged;
    return result;
}

}  // namespace ifmem
