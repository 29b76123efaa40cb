#include "ifmem/model.hpp"

#include <cmath>
#include <string>

#include "ifmem/errors.hpp"

namespace ifmem {
namespace {

void require_finite_voltage(double v) {
    if (!std::isfinite(v)) throw DomainError("voltage must be finite");
}

void require_state(double x) {
    if (!(x >= 0.0 && x <= 1.0)) {
        throw DomainError("state x = " + std::to_string(x) + " outside [0, 1]");
    }
}

// g (1 - exp(-b v)) without cancellation for small b v.
double saturating(double g, double b, double v) { return -g * std::expm1(-b * v); }

double h1_raw(const ModelParameters& p, double v) {
    if (v >= 0.0) return p.g_max_p * std::sinh(p.b_max_p * v);
    return saturating(p.g_max_n, p.b_max_n, v);
}

double h2_raw(const ModelParameters& p, double v) {
    if (v >= 0.0) return saturating(p.g_min_p, p.b_min_p, v);
    return p.g_min_n * std::sinh(p.b_min_n * v);
}

double threshold_raw(const ModelParameters& p, double v) {
    if (v > p.V_p) return p.A_p * (std::exp(v) - std::exp(p.V_p));
    if (v < -p.V_n) return -p.A_n * (std::exp(-v) - std::exp(p.V_n));
    return 0.0;
}

double window_raw(const ModelParameters& p, double x, Motion motion) {
    switch (motion) {
        case Motion::up: {
            if (x < p.x_p) return 1.0;
            const double w_p = (p.x_p - x) / (1.0 - p.x_p) + 1.0;
            return std::exp(-p.alpha_p * (x - p.x_p)) * w_p;
        }
        case Motion::down: {
            if (x > p.x_n) return 1.0;
            const double w_n = x / p.x_n;
            return std::exp(p.alpha_n * (x - p.x_n)) * w_n;
        }
        case Motion::none:
            break;
    }
    return 1.0;
}

Motion motion_of(double drive) {
    if (drive > 0.0) return Motion::up;
    if (drive < 0.0) return Motion::down;
    return Motion::none;
}

}  // namespace

namespace detail {

double current_unchecked(const ModelParameters& p, double v, double x) {
    return h1_raw(p, v) * x + h2_raw(p, v) * (1.0 - x);
}

double derivative_unchecked(const ModelParameters& p, double v, double x) {
    const double drive = sign_of(p.eta) * threshold_raw(p, v);
    if (drive == 0.0) return 0.0;
    return drive * window_raw(p, x, motion_of(drive));
}

Kernel::Kernel(const ModelParameters& p)
    : p_(p), eta_(sign_of(p.eta)), exp_vp_(std::exp(p.V_p)), exp_vn_(std::exp(p.V_n)) {}

double Kernel::current(double v, double x) const { return current_unchecked(p_, v, x); }

double Kernel::drive(double v, double exp_v, double exp_neg_v) const {
    if (v > p_.V_p) return eta_ * (p_.A_p * (exp_v - exp_vp_));
    if (v < -p_.V_n) return eta_ * (-p_.A_n * (exp_neg_v - exp_vn_));
    return 0.0;
}

double Kernel::windowed(double drive, double x) const {
    if (drive == 0.0) return 0.0;
    return drive * window_raw(p_, x, motion_of(drive));
}

double Kernel::derivative(double v, double x) const {
    double d = 0.0;
    if (v > p_.V_p) {
        d = drive(v, std::exp(v), 0.0);
    } else if (v < -p_.V_n) {
        d = drive(v, 0.0, std::exp(-v));
    }
    return windowed(d, x);
}

double Kernel::derivative(double v, double x, double exp_v, double exp_neg_v) const {
    return windowed(drive(v, exp_v, exp_neg_v), x);
}

double mim_current_unchecked(const LegacyMimParams& p, double v, double x) {
    const double a = v >= 0.0 ? p.a1 : p.a2;
    return a * x * std::sinh(p.b * v);
}

}  // namespace detail

double h1(const ModelParameters& p, double v) {
    require_finite_voltage(v);
    return h1_raw(p, v);
}

double h2(const ModelParameters& p, double v) {
    require_finite_voltage(v);
    return h2_raw(p, v);
}

double instantaneous_current(const ModelParameters& p, double v, double x) {
    require_finite_voltage(v);
    require_state(x);
    return detail::current_unchecked(p, v, x);
}

double threshold_g(const ModelParameters& p, double v) {
    require_finite_voltage(v);
    return threshold_raw(p, v);
}

double window_f(const ModelParameters& p, double x, Motion motion) {
    require_state(x);
    return window_raw(p, x, motion);
}

double state_derivative(const ModelParameters& p, double v, double x) {
    require_finite_voltage(v);
    require_state(x);
    return detail::derivative_unchecked(p, v, x);
}

double schottky_reference_current(const PhysicalSchottkyParams& p, double v) {
    require_finite_voltage(v);
    if (!(p.temperature > 0.0) || !std::isfinite(p.temperature)) {
        throw DomainError("temperature must be positive");
    }
    if (!(p.area > 0.0 && p.richardson > 0.0 && p.barrier_height > 0.0 && p.ideality > 0.0) ||
        !std::isfinite(p.area * p.richardson * p.barrier_height * p.ideality)) {
        throw DomainError("Schottky parameters must be finite and positive");
    }
    const double thermal = kBoltzmann * p.temperature;
    // barrier height is in eV, so q * phi is its energy in joules
    const double saturation = p.area * p.richardson * p.temperature * p.temperature *
                              std::exp(-kElementaryCharge * p.barrier_height / thermal);
    return saturation * std::expm1(kElementaryCharge * v / (p.ideality * thermal));
}

double simmons_reference_current(const SimmonsParams& p, double v) {
    require_finite_voltage(v);
    if (!std::isfinite(p.alpha) || !std::isfinite(p.beta) || p.beta < 0.0) {
        throw DomainError("Simmons parameters must be finite with beta >= 0");
    }
    return p.beta * std::sinh(p.alpha * v);
}

double legacy_mim_current(const LegacyMimParams& p, double v, double x) {
    require_finite_voltage(v);
    require_state(x);
    if (!std::isfinite(p.a1) || !std::isfinite(p.a2) || !std::isfinite(p.b) || p.a1 < 0.0 ||
        p.a2 < 0.0) {
        throw DomainError("MIM parameters must be finite with a1, a2 >= 0");
    }
    return detail::mim_current_unchecked(p, v, x);
}

}  // namespace ifmem
