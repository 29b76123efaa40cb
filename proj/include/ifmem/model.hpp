#pragma once

#include "ifmem/params.hpp"

// Pointwise evaluation of the interface-memristor compact model. Every
// function here is pure; state `x` is the dimensionless mixing variable in
// [0, 1] between the low-resistance (h1) and high-resistance (h2)
// transmission branches.

namespace ifmem {

/// LRS transmission: sinh tunnelling in forward bias, saturating
/// Schottky-like branch in reverse bias. The v == 0 point belongs to the
/// forward branch; both branches vanish there.
double h1(const ModelParameters& p, double v);

/// HRS transmission: saturating Schottky-like branch in forward bias,
/// sinh tunnelling in reverse bias.
double h2(const ModelParameters& p, double v);

/// I = h1(v) x + h2(v) (1 - x).
double instantaneous_current(const ModelParameters& p, double v, double x);

/// Threshold function. Zero inside the dead band [-V_n, V_p], positive
/// above V_p and negative below -V_n.
double threshold_g(const ModelParameters& p, double v);

/// Direction the state is being pushed in; selects which window applies.
enum class Motion { down = -1, none = 0, up = 1 };

/// Ion-motion window. Upward motion is damped past x_p and stops at x = 1;
/// downward motion is damped below x_n and stops at x = 0.
double window_f(const ModelParameters& p, double x, Motion motion);

/// dx/dt = eta * g(v) * f(x).
double state_derivative(const ModelParameters& p, double v, double x);

struct PhysicalSchottkyParams {
    double area;            // m^2
    double richardson;      // A m^-2 K^-2
    double temperature;     // K
    double barrier_height;  // eV
    double ideality;        // >= 1
};

struct SimmonsParams {
    double alpha;  // 1/V
    double beta;   // A
};

struct LegacyMimParams {
    double a1;  // A, forward
    double a2;  // A, reverse
    double b;   // 1/V
};

inline constexpr double kElementaryCharge = 1.602176634e-19;  // C
inline constexpr double kBoltzmann = 1.380649e-23;            // J/K

/// Thermionic emission over a Schottky barrier.
double schottky_reference_current(const PhysicalSchottkyParams& p, double v);

/// Generalised Simmons tunnelling current beta * sinh(alpha v).
double simmons_reference_current(const SimmonsParams& p, double v);

/// Single-equation MIM transfer a_{1,2} x sinh(b v), kept for comparison runs.
double legacy_mim_current(const LegacyMimParams& p, double v, double x);

namespace detail {
// Unchecked kernels used by the integrator's inner loop. The caller
// guarantees finite inputs; x may leave [0, 1] when clamping is disabled.
double current_unchecked(const ModelParameters& p, double v, double x);
double derivative_unchecked(const ModelParameters& p, double v, double x);
double mim_current_unchecked(const LegacyMimParams& p, double v, double x);

// Same arithmetic with the parameter-only exponentials evaluated once.
// The second derivative overload takes exp(v) and exp(-v) from the caller.
class Kernel {
public:
    explicit Kernel(const ModelParameters& p);

    double current(double v, double x) const;
    double derivative(double v, double x) const;
    double derivative(double v, double x, double exp_v, double exp_neg_v) const;

private:
    double drive(double v, double exp_v, double exp_neg_v) const;
    double windowed(double drive, double x) const;

    const ModelParameters& p_;
    double eta_;
    double exp_vp_;
    double exp_vn_;
};
}  // namespace detail

}  // namespace ifmem
