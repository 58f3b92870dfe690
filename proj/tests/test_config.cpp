#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <unistd.h>

#include "tdh/config.hpp"
#include "tdh/csv.hpp"
#include "tdh/errors.hpp"

using namespace tdh;

namespace {

std::string write_temp(const char* suffix, const std::string& body) {
    const std::string path =
        "/tmp/tdh_cfg_" + std::to_string(::getpid()) + "_" + suffix;
    std::ofstream out(path);
    out << body;
    return path;
}

}  // namespace

TEST_CASE("toml subset parses sections, scalars, arrays, and comments") {
    const auto doc = config::toml_subset_to_json(R"(
# comment line
[run]
board = "board2"   # trailing comment
seed = 7
out_dir = "results"

[sweep]
bias_start = 0.01
bias_stop = 0.25
adaptive_duration = false

[link]
harmonics = [[727.2e6, -11.8], [1454.4e6, -25.0]]
)",
                                                 "test");
    CHECK(doc["run"]["board"] == "board2");
    CHECK(doc["run"]["seed"] == 7.0);
    CHECK(doc["sweep"]["bias_start"] == 0.01);
    CHECK(doc["sweep"]["adaptive_duration"] == false);
    CHECK(doc["link"]["harmonics"][1][0] == 1454.4e6);
}

TEST_CASE("toml subset reports malformed lines with line numbers") {
    try {
        config::toml_subset_to_json("[run]\nboard board1\n", "cfg.toml");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.line == 2);
    }
    CHECK_THROWS_AS(config::toml_subset_to_json("[run\n", "c"), ConfigError);
    CHECK_THROWS_AS(config::toml_subset_to_json("[run]\nkey = \"unterminated\n", "c"),
                    ConfigError);
}

TEST_CASE("config file round trip with overrides") {
    const auto path = write_temp("a.toml", R"(
[run]
board = "board3"
seed = 99

[circuit]
bias_voltage = 0.21

[sweep]
trace_samples = 16384
noise_floor_dbm = -75
window = "blackmanharris"

[link]
tag_consumption_w = 20e-6
)");
    const auto cfg = config::load_config(path);
    CHECK(cfg.board == "board3");
    CHECK(cfg.seed == 99);
    CHECK(cfg.sweep.seed == 99);
    CHECK(cfg.circuit.bias_voltage == doctest::Approx(0.21));
    CHECK(cfg.sweep.trace_samples == 16384);
    CHECK(cfg.sweep.noise_floor_dbm == doctest::Approx(-75.0));
    CHECK(cfg.sweep.window == spectral::Window::BlackmanHarris);
    CHECK(cfg.forward_link.tag_consumption_w == doctest::Approx(20e-6));
    // The board3 preset came through underneath the overrides.
    CHECK(cfg.circuit.lead_inductance == doctest::Approx(10.2e-9));
    std::remove(path.c_str());
}

TEST_CASE("json configs are accepted as an equivalent format") {
    const auto path = write_temp("b.json", R"({
  "run": {"board": "board4", "seed": 3},
  "sweep": {"bias_step": 0.002}
})");
    const auto cfg = config::load_config(path);
    CHECK(cfg.board == "board4");
    CHECK(cfg.sweep.bias_step_v == doctest::Approx(0.002));
    std::remove(path.c_str());
}

TEST_CASE("unknown sections and keys are rejected with their path") {
    const auto path = write_temp("c.toml", "[sweep]\nbias_sart = 0.01\n");
    try {
        config::load_config(path);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.field_path == "sweep.bias_sart");
    }
    std::remove(path.c_str());

    const auto path2 = write_temp("d.toml", "[swep]\nbias_start = 0.01\n");
    CHECK_THROWS_AS(config::load_config(path2), ConfigError);
    std::remove(path2.c_str());
}

TEST_CASE("validation names the offending field") {
    config::RunConfig cfg;
    cfg.circuit.bias_voltage = 0.9;
    try {
        config::validate(cfg);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.field_path == "circuit.bias_voltage");
    }
}

TEST_CASE("config hash is stable and sensitive") {
    config::RunConfig a;
    config::RunConfig b;
    CHECK(config::config_hash(a) == config::config_hash(b));
    CHECK(config::config_hash(a).size() == 16);
    b.seed = 2;
    CHECK(config::config_hash(a) != config::config_hash(b));
    config::RunConfig c;
    c.circuit.bias_voltage = 0.199;
    CHECK(config::config_hash(a) != config::config_hash(c));
}

TEST_CASE("iv curve csv round trip with provenance comment") {
    diode::IvCurve curve;
    for (int i = 0; i <= 20; ++i)
        curve.points.emplace_back(i * 0.02, diode::iv_current(diode::DiodeParams{}, i * 0.02));
    const auto path = write_temp("iv.csv", "");
    csv::write_iv_curve(path, curve, "config_hash=deadbeef seed=1");
    const auto loaded = csv::read_iv_curve(path);
    REQUIRE(loaded.points.size() == curve.points.size());
    for (std::size_t i = 0; i < curve.points.size(); ++i) {
        CHECK(loaded.points[i].first == curve.points[i].first);
        CHECK(loaded.points[i].second == curve.points[i].second);
    }
    std::remove(path.c_str());
}

TEST_CASE("iv curve csv validates its header and monotone voltages") {
    const auto bad_header = write_temp("ivbad.csv", "volts,amps\n0.1,0.001\n");
    CHECK_THROWS_AS(csv::read_iv_curve(bad_header), SchemaError);
    std::remove(bad_header.c_str());

    const auto bad_order =
        write_temp("ivorder.csv", "voltage_V,current_A\n0.2,1e-3\n0.1,2e-3\n");
    CHECK_THROWS_AS(csv::read_iv_curve(bad_order), SchemaError);
    std::remove(bad_order.c_str());
}

TEST_CASE("format_double round-trips exactly") {
    for (double v : {0.0, 1.0 / 3.0, 727.2e6, -11.8, 2.85e-3, 1e-300}) {
        const auto s = csv::format_double(v);
        CHECK(std::stod(s) == v);
    }
}
