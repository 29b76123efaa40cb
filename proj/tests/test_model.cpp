#include "doctest.h"

#include <cmath>
#include <limits>
#include <random>

#include "fixtures.hpp"
#include "ifmem/errors.hpp"
#include "ifmem/model.hpp"

using namespace ifmem;
using ifmem::testing::table1_means;

namespace {

// Reference values from 40-digit evaluations of the closed forms with the
// 10 um reference means.
constexpr double kH1Plus1 = 0.03188372706937095618654;
constexpr double kH1Minus1 = -0.004219819023021499545914;
constexpr double kH2Plus1 = 0.00006681082121590573918118;
constexpr double kH2Minus2 = -0.005513203716554515102602;
constexpr double kGPlusHalf = 0.04605921021970909842625;
constexpr double kGMinus1 = -0.04570629663701060326058;

void check_rel(double actual, double expected, double tol = 1e-13) {
    CHECK(std::abs(actual - expected) <= tol * std::abs(expected));
}

}  // namespace

TEST_CASE("transmission branches match high-precision evaluations") {
    const ModelParameters p = table1_means("10um");
    CHECK(h1(p, 0.0) == 0.0);
    CHECK(h2(p, 0.0) == 0.0);
    check_rel(h1(p, 1.0), kH1Plus1);
    check_rel(h1(p, -1.0), kH1Minus1);
    check_rel(h2(p, 1.0), kH2Plus1);
    check_rel(h2(p, -2.0), kH2Minus2);
}

TEST_CASE("transmission branches are continuous at zero") {
    const ModelParameters p = table1_means("100um");
    double previous = std::numeric_limits<double>::infinity();
    for (double eps = 1e-2; eps > 1e-12; eps /= 10.0) {
        const double worst = std::max({std::abs(h1(p, eps)), std::abs(h1(p, -eps)),
                                       std::abs(h2(p, eps)), std::abs(h2(p, -eps))});
        CHECK(worst < previous);
        previous = worst;
    }
    CHECK(previous < 1e-12);
}

TEST_CASE("HRS forward branch is linear for small arguments") {
    ModelParameters p = table1_means("32um");
    for (double v : {1e-4, 1e-3, 0.01, 0.1}) {
        if (p.b_min_p * v >= 0.01) continue;
        const double linear = p.g_min_p * p.b_min_p * v;
        CHECK(std::abs(h2(p, v) - linear) / linear < 0.01);
    }
}

TEST_CASE("non-finite voltage is a domain error") {
    const ModelParameters p = table1_means("10um");
    const double nan = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(h1(p, nan), DomainError);
    CHECK_THROWS_AS(h2(p, std::numeric_limits<double>::infinity()), DomainError);
    CHECK_THROWS_AS(threshold_g(p, nan), DomainError);
}

TEST_CASE("instantaneous current mixes the branches linearly in x") {
    const ModelParameters p = table1_means("10um");
    for (double v : {-2.0, -0.3, 0.0, 0.7, 1.0}) {
        CHECK(instantaneous_current(p, v, 1.0) == h1(p, v));
        CHECK(instantaneous_current(p, v, 0.0) == h2(p, v));
        CHECK(instantaneous_current(p, v, 0.5) == doctest::Approx((h1(p, v) + h2(p, v)) / 2).epsilon(1e-15));
    }
    for (double x : {0.0, 0.25, 1.0}) CHECK(instantaneous_current(p, 0.0, x) == 0.0);
    CHECK_THROWS_AS(instantaneous_current(p, 0.5, 1.01), DomainError);
    CHECK_THROWS_AS(instantaneous_current(p, 0.5, -1e-9), DomainError);
}

TEST_CASE("threshold function") {
    ModelParameters p = table1_means("10um");
    CHECK(threshold_g(p, 0.0) == 0.0);
    check_rel(threshold_g(p, 0.5), kGPlusHalf);
    check_rel(threshold_g(p, -1.0), kGMinus1);

    SUBCASE("dead band and monotonicity outside it") {
        p.V_p = 0.4;
        p.V_n = 0.6;
        CHECK(threshold_g(p, 0.39) == 0.0);
        CHECK(threshold_g(p, -0.59) == 0.0);
        CHECK(threshold_g(p, 0.4) == 0.0);
        CHECK(threshold_g(p, -0.6) == 0.0);
        double last = 0.0;
        for (double v = 0.41; v < 1.5; v += 0.05) {
            const double g = threshold_g(p, v);
            CHECK(g > last);
            last = g;
        }
        last = 0.0;
        for (double v = -0.61; v > -2.5; v -= 0.05) {
            const double g = threshold_g(p, v);
            CHECK(g < last);
            last = g;
        }
    }
}

TEST_CASE("window function boundaries") {
    const ModelParameters p = table1_means("10um");
    CHECK(window_f(p, p.x_p, Motion::up) == 1.0);
    CHECK(window_f(p, 1.0, Motion::up) == 0.0);
    CHECK(window_f(p, 0.0, Motion::down) == 0.0);
    CHECK(window_f(p, 0.5 * p.x_p, Motion::up) == 1.0);
    CHECK(window_f(p, 0.5, Motion::down) == 1.0);
    CHECK(window_f(p, 0.3, Motion::none) == 1.0);
    CHECK_THROWS_AS(window_f(p, 1.5, Motion::up), DomainError);
}

TEST_CASE("window function is bounded and non-negative") {
    for (const auto& label : ifmem::testing::area_labels()) {
        const ModelParameters p = table1_means(label);
        for (int i = 0; i <= 1000; ++i) {
            const double x = i / 1000.0;
            const double up = window_f(p, x, Motion::up);
            const double down = window_f(p, x, Motion::down);
            CHECK(up >= 0.0);
            CHECK(up <= 1.0);
            CHECK(down >= 0.0);
            CHECK(down <= 1.0);
        }
    }
}

TEST_CASE("state derivative") {
    ModelParameters p = table1_means("10um");
    SUBCASE("zero inside the dead band") {
        p.V_p = 0.5;
        p.V_n = 0.5;
        for (double x : {0.0, 0.3, 1.0}) {
            CHECK(state_derivative(p, 0.2, x) == 0.0);
            CHECK(state_derivative(p, -0.4, x) == 0.0);
        }
    }
    SUBCASE("ceiling stops upward motion") {
        CHECK(state_derivative(p, 0.8, 1.0) == 0.0);
    }
    SUBCASE("below onset the derivative is g itself") {
        CHECK(state_derivative(p, 0.8, 0.5 * p.x_p) == threshold_g(p, 0.8));
    }
    SUBCASE("negative eta reverses the drive and selects the other window") {
        p.eta = Polarity::negative;
        // positive voltage now pushes the state down: floor at x = 0
        CHECK(state_derivative(p, 0.8, 0.0) == 0.0);
        CHECK(state_derivative(p, 0.8, 0.5) == -threshold_g(p, 0.8));
    }
}

TEST_CASE("windows never flip the sign of the drive") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> volts(-2.5, 1.5);
    std::uniform_real_distribution<double> state(0.0, 1.0);
    for (const auto& label : ifmem::testing::area_labels()) {
        ModelParameters p = table1_means(label);
        for (Polarity eta : {Polarity::positive, Polarity::negative}) {
            p.eta = eta;
            for (int i = 0; i < 2000; ++i) {
                const double v = volts(rng);
                const double x = state(rng);
                const double drive = sign_of(eta) * threshold_g(p, v);
                const double dx = state_derivative(p, v, x);
                if (drive >= 0.0) CHECK(dx >= 0.0);
                if (drive <= 0.0) CHECK(dx <= 0.0);
            }
        }
    }
}

TEST_CASE("Schottky reference current") {
    const PhysicalSchottkyParams p{1e-10, 1.2e6, 300.0, 0.8, 1.3};
    CHECK(schottky_reference_current(p, 0.0) == 0.0);

    // direct transcription of the thermionic-emission formula
    const double q = 1.602176634e-19;
    const double kb = 1.380649e-23;
    for (int i = 0; i <= 300; ++i) {
        const double v = -2.0 + i * 0.01;
        const double direct = p.area * p.richardson * p.temperature * p.temperature *
                              std::exp(-q * p.barrier_height / (kb * p.temperature)) *
                              (std::exp(q * v / (p.ideality * kb * p.temperature)) - 1.0);
        const double got = schottky_reference_current(p, v);
        if (direct == 0.0) {
            CHECK(got == 0.0);
        } else {
            CHECK(std::abs(got - direct) <= 1e-12 * std::abs(direct));
        }
    }

    const double saturation = -p.area * p.richardson * p.temperature * p.temperature *
                              std::exp(-q * p.barrier_height / (kb * p.temperature));
    CHECK(schottky_reference_current(p, -5.0) == doctest::Approx(saturation).epsilon(1e-12));

    PhysicalSchottkyParams doubled = p;
    doubled.area *= 2.0;
    for (double v : {-1.0, 0.2, 0.7}) {
        CHECK(schottky_reference_current(doubled, v) == 2.0 * schottky_reference_current(p, v));
    }

    PhysicalSchottkyParams cold = p;
    cold.temperature = 0.0;
    CHECK_THROWS_AS(schottky_reference_current(cold, 0.1), DomainError);
}

TEST_CASE("Simmons reference current") {
    const SimmonsParams unit{1.0, 1.0};
    CHECK(simmons_reference_current(unit, 0.0) == 0.0);
    check_rel(simmons_reference_current(unit, 1.0), 1.175201193643801456882);
    const SimmonsParams p{3.3, 1.5e-5};
    for (double v = 0.05; v < 2.5; v += 0.1) {
        CHECK(simmons_reference_current(p, -v) == -simmons_reference_current(p, v));
    }
}

TEST_CASE("legacy MIM current") {
    const LegacyMimParams p{2e-3, 5e-4, 3.0};
    CHECK(legacy_mim_current(p, 0.0, 0.7) == 0.0);
    for (double v : {-1.5, 0.3, 1.0}) CHECK(legacy_mim_current(p, v, 0.0) == 0.0);
    const LegacyMimParams sym{1e-3, 1e-3, 2.0};
    for (double v = 0.1; v < 2.0; v += 0.3) {
        CHECK(legacy_mim_current(sym, -v, 0.4) == -legacy_mim_current(sym, v, 0.4));
    }
    CHECK(legacy_mim_current(p, 1.0, 0.5) == doctest::Approx(2e-3 * 0.5 * std::sinh(3.0)));
    CHECK(legacy_mim_current(p, -1.0, 0.5) == doctest::Approx(5e-4 * 0.5 * std::sinh(-3.0)));
    CHECK_THROWS_AS(legacy_mim_current(p, 1.0, 2.0), DomainError);
}

TEST_CASE("parameter validation") {
    ModelParameters p = table1_means("10um");
    CHECK_NOTHROW(validate(p));
    p.g_max_p = -1e-4;
    CHECK_THROWS_AS(validate(p), DomainError);
    p = table1_means("10um");
    p.x_p = 1.0;
    CHECK_THROWS_AS(validate(p), DomainError);
    p = table1_means("10um");
    p.x0 = 1.2;
    CHECK_THROWS_AS(validate(p), DomainError);
    p = table1_means("10um");
    p.alpha_n = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(validate(p), DomainError);
}
