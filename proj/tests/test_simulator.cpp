#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "fixtures.hpp"
#include "ifmem/errors.hpp"
#include "ifmem/simulator.hpp"

using namespace ifmem;
using ifmem::testing::table1_means;

TEST_CASE("zero-rate parameters keep the state at x0") {
    ModelParameters p = table1_means("10um");
    p.A_p = 0.0;
    p.A_n = 0.0;
    p.x0 = 0.37;
    const IVTrace t = simulate(p, standard_sweep(1.0, -2.0, 4.0), {.dt = 4e-3});
    for (double x : t.state) CHECK(x == 0.37);
}

TEST_CASE("grounded waveform gives zero current and a frozen state") {
    ModelParameters p = table1_means("32um");
    p.x0 = 0.2;
    const SampledWaveform w{0.01, std::vector<double>(500, 0.0)};
    const IVTrace t = simulate(p, w);
    for (std::size_t i = 0; i < t.size(); ++i) {
        CHECK(t.current[i] == 0.0);
        CHECK(t.state[i] == 0.2);
    }
}

TEST_CASE("mean models trace a pinched hysteresis loop") {
    for (const auto& label : ifmem::testing::area_labels()) {
        const ModelParameters p = table1_means(label);
        const IVTrace t = simulate(p, standard_sweep());
        REQUIRE(t.size() == 10001);
        double at_max = 0.0, at_min = 0.0;
        for (std::size_t i = 0; i < t.size(); ++i) {
            CHECK(t.state[i] >= 0.0);
            CHECK(t.state[i] <= 1.0);
            if (t.voltage[i] == 0.0) CHECK(t.current[i] == 0.0);
            at_max = std::max(at_max, t.current[i]);
            at_min = std::min(at_min, t.current[i]);
        }
        CHECK(at_max > 0.0);
        CHECK(at_min < 0.0);
        CHECK(std::abs(loop_area(t)) > 0.0);
    }
    // 10 um reverse current stays in the 1e-2 A range at -2 V
    const IVTrace small = simulate(table1_means("10um"), standard_sweep());
    const double at_min = *std::min_element(small.current.begin(), small.current.end());
    CHECK(at_min < 0.0);
    CHECK(std::abs(at_min) < 1e-2);
}

TEST_CASE("simulation is bit-reproducible") {
    const ModelParameters p = table1_means("100um");
    const IVTrace a = simulate(p, standard_sweep());
    const IVTrace b = simulate(p, standard_sweep());
    CHECK(a == b);
}

TEST_CASE("time column is uniform") {
    const IVTrace t = simulate(table1_means("10um"), standard_sweep(1.0, -2.0, 4.0), {.dt = 0.01});
    for (std::size_t i = 0; i < t.size(); ++i) CHECK(t.time[i] == static_cast<double>(i) * 0.01);
}

TEST_CASE("unclamped overshoot from an in-range state is bounded by one step of the drive") {
    ModelParameters p = table1_means("10um");
    p.A_p = 50.0;
    p.alpha_p = 0.0;
    p.x_p = 0.9;
    const SweepSpec s = standard_sweep(1.0, -2.0, 4.0);
    const double dt = 0.01;
    SimulationConfig cfg{.dt = dt, .clamp_state = false};
    const IVTrace free_run = simulate(p, s, cfg);
    double max_g = 0.0;
    for (double v : free_run.voltage) max_g = std::max(max_g, std::abs(threshold_g(p, v)));
    bool overshoots = false;
    for (std::size_t i = 0; i + 1 < free_run.size(); ++i) {
        const double x = free_run.state[i];
        const double next = free_run.state[i + 1];
        if (x < 0.0 || x > 1.0) continue;  // the window is only bounded by 1 inside [0, 1]
        overshoots = overshoots || next > 1.0 || next < 0.0;
        CHECK(next <= 1.0 + dt * max_g);
        CHECK(next >= -dt * max_g);
    }
    CHECK(overshoots);
    cfg.clamp_state = true;
    const IVTrace clamped = simulate(p, s, cfg);
    for (double x : clamped.state) {
        CHECK(x >= 0.0);
        CHECK(x <= 1.0);
    }
}

TEST_CASE("mirrored drive reproduces the state trajectory and negates MIM current") {
    ModelParameters p = table1_means("32um");
    p.x0 = 0.3;
    ModelParameters mirrored = p;
    mirrored.eta = Polarity::negative;
    std::swap(mirrored.A_p, mirrored.A_n);
    std::swap(mirrored.V_p, mirrored.V_n);
    std::swap(mirrored.g_max_p, mirrored.g_max_n);
    std::swap(mirrored.b_max_p, mirrored.b_max_n);
    std::swap(mirrored.g_min_p, mirrored.g_min_n);
    std::swap(mirrored.b_min_p, mirrored.b_min_n);

    SampledWaveform w = sample(standard_sweep(1.0, -2.0, 20.0), 0.01);
    SampledWaveform negated = w;
    for (double& v : negated.voltages) v = -v;

    SimulationConfig cfg{.dt = 0.01, .transmission = TransmissionModel::legacy_mim};
    cfg.mim = {1e-3, 4e-4, 2.5};
    SimulationConfig mirrored_cfg = cfg;
    std::swap(mirrored_cfg.mim.a1, mirrored_cfg.mim.a2);

    const IVTrace a = simulate(p, w, cfg);
    const IVTrace b = simulate(mirrored, negated, mirrored_cfg);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.state[i] == b.state[i]);
        CHECK(a.current[i] == -b.current[i]);
    }
}

TEST_CASE("legacy MIM transmission is selectable") {
    const ModelParameters p = table1_means("10um");
    SimulationConfig cfg{.dt = 0.01, .transmission = TransmissionModel::legacy_mim};
    cfg.mim = {1e-3, 1e-3, 2.0};
    const IVTrace t = simulate(p, standard_sweep(1.0, -2.0, 4.0), cfg);
    for (std::size_t i = 0; i < t.size(); ++i) {
        CHECK(t.current[i] == legacy_mim_current(cfg.mim, t.voltage[i], t.state[i]));
    }
}

TEST_CASE("invalid inputs") {
    ModelParameters p = table1_means("10um");
    p.g_min_n = -1.0;
    CHECK_THROWS_AS(simulate(p, standard_sweep()), DomainError);
    CHECK_THROWS_AS(simulate(table1_means("10um"), SampledWaveform{0.1, {}}), DomainError);
    CHECK_THROWS_AS(simulate(table1_means("10um"), SampledWaveform{0.0, {0.0}}), DomainError);

    ModelParameters huge = table1_means("10um");
    huge.b_max_p = 2000.0;
    CHECK_THROWS_AS(simulate(huge, standard_sweep()), NumericalError);
}

TEST_CASE("convergence check") {
    ModelParameters p = table1_means("10um");
    SUBCASE("zero-rate parameters have no discretisation error") {
        p.A_p = 0.0;
        p.A_n = 0.0;
        CHECK(convergence_check(p, standard_sweep(), 0.01) == 0.0);
    }
    SUBCASE("first-order refinement") {
        const SweepSpec s = standard_sweep();
        const double dt = s.duration() / 1e4;
        double previous = convergence_check(p, s, dt);
        for (int k = 1; k <= 3; ++k) {
            const double d = convergence_check(p, s, dt / std::pow(2.0, k));
            CHECK(d < previous);
            CHECK(previous / d == doctest::Approx(2.0).epsilon(0.25));
            previous = d;
        }
    }
}

TEST_CASE("current at voltage interpolates within a segment range") {
    IVTrace t;
    t.voltage = {0.0, 0.4, 0.8, 0.4, 0.0};
    t.current = {0.0, 1.0, 2.0, 3.0, 0.0};
    t.time = {0, 1, 2, 3, 4};
    CHECK(*current_at_voltage(t, 0, 3, 0.6) == doctest::Approx(1.5));
    CHECK(*current_at_voltage(t, 2, 5, 0.6) == doctest::Approx(2.5));
    CHECK_FALSE(current_at_voltage(t, 0, 3, 0.9).has_value());
}
