#include "doctest.h"

#include <filesystem>
#include <random>

#include "fixtures.hpp"
#include "ifmem/data_io.hpp"
#include "ifmem/errors.hpp"

using namespace ifmem;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("ifmem_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string message_of(const auto& fn) {
    try {
        fn();
    } catch (const std::exception& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("measurement CSV parsing") {
    const IVTrace t = parse_trace_csv("time,voltage,current\n0,0,0\n0.5,0.25,1e-6\n1.0,0.5,2.5e-6\n");
    CHECK(t.size() == 3);
    CHECK(t.current[2] == 2.5e-6);
    CHECK(t.dt == 0.5);
    CHECK_FALSE(t.has_state());

    SUBCASE("CRLF and blank lines") {
        const IVTrace c = parse_trace_csv("time,voltage,current\r\n0,0,0\r\n\r\n1,1,1\r\n");
        CHECK(c.size() == 2);
    }
    SUBCASE("state column is optional") {
        const IVTrace s = parse_trace_csv("time,voltage,current,state\n0,0,0,0.1\n1,1,1,0.2\n");
        CHECK(s.state == std::vector<double>{0.1, 0.2});
    }
    SUBCASE("misnamed header") {
        CHECK_THROWS_AS(parse_trace_csv("t,v,i\n0,0,0\n"), FormatError);
        CHECK(message_of([] { parse_trace_csv("t,v,i\n0,0,0\n", "x.csv"); }).find("x.csv:1") !=
              std::string::npos);
    }
    SUBCASE("non-monotonic time") {
        CHECK_THROWS_AS(parse_trace_csv("time,voltage,current\n0,0,0\n1,0,0\n1,0,0\n"),
                        ValidationError);
        CHECK(message_of([] { parse_trace_csv("time,voltage,current\n0,0,0\n1,0,0\n1,0,0\n"); })
                  .find("non-monotonic at row 3") != std::string::npos);
    }
    SUBCASE("non-finite values") {
        CHECK_THROWS_AS(parse_trace_csv("time,voltage,current\n0,0,nan\n"), ValidationError);
        CHECK_THROWS_AS(parse_trace_csv("time,voltage,current\n0,inf,0\n"), ValidationError);
    }
    SUBCASE("malformed rows") {
        CHECK_THROWS_AS(parse_trace_csv("time,voltage,current\n0,0\n"), FormatError);
        CHECK_THROWS_AS(parse_trace_csv("time,voltage,current\n0,abc,0\n"), FormatError);
        CHECK_THROWS_AS(parse_trace_csv(""), FormatError);
    }
}

TEST_CASE("trace CSV round trip is exact") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> n(0.0, 1e-3);
    IVTrace t;
    t.dt = 1.0 / 3.0;
    for (int i = 0; i < 200; ++i) {
        t.time.push_back(i * t.dt);
        t.voltage.push_back(std::sin(i * 0.1));
        t.current.push_back(n(rng));
        t.state.push_back(std::abs(n(rng)) * 100);
    }
    const IVTrace back = parse_trace_csv(format_trace_csv(t));
    CHECK(back.time == t.time);
    CHECK(back.voltage == t.voltage);
    CHECK(back.current == t.current);
    CHECK(back.state == t.state);
}

TEST_CASE("measurement directories") {
    const fs::path dir = scratch_dir("measure");
    for (const char* area : {"100um", "10um", "32um"}) {
        fs::create_directories(dir / area);
        write_file_atomic(dir / area / "b.csv", "time,voltage,current\n0,0,0\n1,1,1\n");
        write_file_atomic(dir / area / "a.csv", "time,voltage,current\n0,0,0\n1,1,2\n");
    }
    const auto sets = load_measurement_dir(dir);
    REQUIRE(sets.size() == 3);
    CHECK(sets[0].device_area_label == "10um");
    CHECK(sets[1].device_area_label == "32um");
    CHECK(sets[2].device_area_label == "100um");
    CHECK(sets[0].traces.size() == 2);
    CHECK(sets[0].traces[0].current[1] == 2.0);  // a.csv first

    const MeasurementSet single = load_measurements(dir / "32um" / "a.csv");
    CHECK(single.device_area_label == "32um");
    CHECK(single.traces.size() == 1);

    const fs::path empty = scratch_dir("measure_empty");
    CHECK_THROWS_AS(load_measurement_dir(empty), ValidationError);
    CHECK_THROWS_AS(load_measurement_dir(empty / "missing"), ValidationError);
}

TEST_CASE("reference distribution fixtures load exactly as typed") {
    const GaussianParamSet g10 = ifmem::testing::table1("10um");
    CHECK(g10.area_label == "10um");
    CHECK(g10[ParamId::A_n].mean == 2.66e-2);
    CHECK(g10[ParamId::A_n].sd == 1.70e-3);
    CHECK(g10[ParamId::b_max_p].mean == 4.99);
    CHECK(g10[ParamId::g_min_n].sd == 9.75e-7);
    CHECK(g10[ParamId::x_n].sd == 0.0);
    const GaussianParamSet g32 = ifmem::testing::table1("32um");
    CHECK(g32[ParamId::g_min_p].mean == 5.99e-2);
    CHECK(g32[ParamId::b_min_p].sd == 4.40e-1);
    const GaussianParamSet g100 = ifmem::testing::table1("100um");
    CHECK(g100[ParamId::x_n].mean == 9.87e-2);
    CHECK(g100[ParamId::g_min_n].mean == 1.67e-3);
    for (const auto& g : {g10, g32, g100}) {
        CHECK(g[ParamId::A_p].mean == 7.10e-2);
        CHECK(g[ParamId::x_p].mean == 1.10e-1);
        CHECK(g[ParamId::alpha_p].mean == 9.20);
        CHECK(g[ParamId::V_p].mean == 0.0);
        CHECK(g[ParamId::V_n].mean == 0.0);
        for (ParamId id : {ParamId::A_p, ParamId::x_p, ParamId::alpha_p, ParamId::V_p, ParamId::V_n}) {
            CHECK(g[id].sd == 0.0);
        }
        CHECK(g.eta == Polarity::positive);
        CHECK(g.x0 == 0.0);
    }
}

TEST_CASE("parameter JSON round trip") {
    const fs::path dir = scratch_dir("params");
    const ModelParameters p = ifmem::testing::table1_means("10um");
    save_params(dir / "p.json", p);
    CHECK(read_text_file(dir / "p.json").find("\"A_n\": 0.0266") != std::string::npos);
    CHECK(load_params(dir / "p.json") == p);

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 50; ++k) {
        ModelParameters q;
        for (ParamId id : kAllParams) q[id] = is_window_onset(id) ? u(rng) * 0.98 + 0.01 : std::exp(-30 * u(rng));
        q.eta = k % 2 ? Polarity::negative : Polarity::positive;
        q.x0 = u(rng);
        CHECK(params_from_json(nlohmann::json::parse(params_to_json(q).dump())) == q);

        GaussianParamSet g;
        g.area_label = "area" + std::to_string(k);
        for (ParamId id : kAllParams) g[id] = {q[id], std::exp(-20 * u(rng))};
        CHECK(gaussian_from_json(nlohmann::json::parse(gaussian_to_json(g).dump())) == g);
    }
}

TEST_CASE("parameter JSON errors") {
    nlohmann::json j = params_to_json(ifmem::testing::table1_means("10um"));
    SUBCASE("missing and unknown keys are listed") {
        j.erase("b_min_n");
        j["bogus"] = 1;
        const std::string msg = message_of([&] { params_from_json(j); });
        CHECK(msg.find("b_min_n") != std::string::npos);
        CHECK(msg.find("bogus") != std::string::npos);
        CHECK_THROWS_AS(params_from_json(j), FormatError);
    }
    SUBCASE("negative magnitude violates the invariants") {
        j["g_max_p"] = -4.34e-4;
        CHECK_THROWS_AS(params_from_json(j), DomainError);
    }
    SUBCASE("eta must be a unit sign") {
        j["eta"] = 0;
        CHECK_THROWS_AS(params_from_json(j), DomainError);
    }
    SUBCASE("missing sd is named") {
        nlohmann::json g = gaussian_to_json(ifmem::testing::table1("10um"));
        g["parameters"]["A_n"].erase("sd");
        CHECK_THROWS_AS(gaussian_from_json(g), FormatError);
        CHECK(message_of([&] { gaussian_from_json(g); }).find("A_n.sd") != std::string::npos);
    }
    SUBCASE("negative sd") {
        nlohmann::json g = gaussian_to_json(ifmem::testing::table1("10um"));
        g["parameters"]["A_n"]["sd"] = -1.0;
        CHECK_THROWS_AS(gaussian_from_json(g), ValidationError);
    }
}

TEST_CASE("atomic writes leave no temporary file") {
    const fs::path dir = scratch_dir("atomic");
    write_file_atomic(dir / "sub" / "f.txt", "one");
    write_file_atomic(dir / "sub" / "f.txt", "two");
    CHECK(read_text_file(dir / "sub" / "f.txt") == "two");
    CHECK_FALSE(fs::exists(dir / "sub" / "f.txt.tmp"));
}
