#include "doctest.h"

#include <cmath>
#include <random>

#include "ifmem/errors.hpp"
#include "ifmem/objective.hpp"

using namespace ifmem;

namespace {

IVTrace trace_of(std::vector<double> current, double dt = 0.1) {
    IVTrace t;
    t.dt = dt;
    for (std::size_t i = 0; i < current.size(); ++i) {
        t.time.push_back(static_cast<double>(i) * dt);
        t.voltage.push_back(0.0);
    }
    t.current = std::move(current);
    return t;
}

std::vector<double> random_currents(std::uint64_t seed, std::size_t n) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d(0.0, 1e-3);
    std::vector<double> out(n);
    for (double& c : out) c = d(rng);
    return out;
}

}  // namespace

TEST_CASE("MAE") {
    const IVTrace a = trace_of(random_currents(1, 100));
    CHECK(mae(a, a) == 0.0);

    IVTrace shifted = a;
    for (double& c : shifted.current) c += 0.25;
    CHECK(std::abs(mae(shifted, a) - 0.25) <= 1e-12);

    CHECK(mae(trace_of({1.0, 2.0}), trace_of({0.0, 0.0})) == 1.5);

    const IVTrace b = trace_of(random_currents(2, 100));
    CHECK(mae(a, b) == mae(b, a));
    CHECK(mae(a, b) > 0.0);
}

TEST_CASE("MPE") {
    const IVTrace meas = trace_of(random_currents(3, 257));
    CHECK(mpe(meas, meas) == 0.0);

    IVTrace scaled = meas;
    for (double& c : scaled.current) c *= 1.1;
    CHECK(std::abs(mpe(scaled, meas) - 10.0) <= 1e-12);

    const IVTrace other = trace_of(random_currents(4, 257));
    SUBCASE("scale invariance") {
        IVTrace a = other, b = meas;
        for (double& c : a.current) c *= 37.5;
        for (double& c : b.current) c *= 37.5;
        CHECK(std::abs(mpe(a, b) - mpe(other, meas)) <= 1e-12 * mpe(other, meas));
    }
    SUBCASE("duplicating every sample leaves MPE unchanged") {
        std::vector<double> a2, b2;
        for (std::size_t i = 0; i < meas.size(); ++i) {
            a2.insert(a2.end(), 2, other.current[i]);
            b2.insert(b2.end(), 2, meas.current[i]);
        }
        CHECK(std::abs(mpe(trace_of(a2, 0.05), trace_of(b2, 0.05)) - mpe(other, meas)) <=
              1e-12 * mpe(other, meas));
    }
    SUBCASE("not symmetric") {
        CHECK(mpe(other, meas) != mpe(meas, other));
    }
    CHECK_THROWS_AS(mpe(meas, trace_of(std::vector<double>(257, 0.0))), NormalizationError);
}

TEST_CASE("alignment errors") {
    CHECK_THROWS_AS(mae(trace_of({1, 2, 3}), trace_of({1, 2})), AlignmentError);
    CHECK_THROWS_AS(mpe(trace_of({1, 2, 3}), trace_of({1, 2})), AlignmentError);
    IVTrace late = trace_of({1, 2, 3});
    for (double& t : late.time) t += 0.06;
    CHECK_THROWS_AS(mae(late, trace_of({1, 2, 3})), AlignmentError);
    for (double& t : late.time) t -= 0.02;
    CHECK(mae(late, trace_of({1, 2, 3})) == 0.0);
}
