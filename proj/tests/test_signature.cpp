#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <unistd.h>

#include "tdh/errors.hpp"
#include "tdh/presets.hpp"
#include "tdh/signature.hpp"

using namespace tdh;
using signature::SignatureMap;
using signature::SweepConfig;

namespace {

SweepConfig small_sweep(double start, double stop, double step, std::uint64_t seed) {
    SweepConfig cfg;
    cfg.bias_start_v = start;
    cfg.bias_stop_v = stop;
    cfg.bias_step_v = step;
    cfg.trace_samples = 16384;
    cfg.max_trace_samples = 65536;
    cfg.seed = seed;
    return cfg;
}

std::string temp_path(const char* name) {
    return std::string("/tmp/tdh_test_") + std::to_string(::getpid()) + "_" + name;
}

}  // namespace

TEST_CASE("sweeps are deterministic for a fixed seed") {
    const auto circuit = presets::board("board1");
    const auto cfg = small_sweep(0.18, 0.20, 0.005, 42);
    const auto a = signature::sweep_bias(circuit, cfg, "board1");
    const auto b = signature::sweep_bias(circuit, cfg, "board1");
    REQUIRE(a.power_dbm.size() == b.power_dbm.size());
    for (std::size_t i = 0; i < a.power_dbm.size(); ++i) CHECK(a.power_dbm[i] == b.power_dbm[i]);

    auto reseeded_cfg = cfg;
    reseeded_cfg.seed = 43;
    const auto c = signature::sweep_bias(circuit, reseeded_cfg, "board1");
    bool any_diff = false;
    for (std::size_t i = 0; i < a.power_dbm.size(); ++i)
        if (a.power_dbm[i] != c.power_dbm[i]) any_diff = true;
    CHECK(any_diff);
}

TEST_CASE("a sub-range sweep reproduces the matching rows of the full sweep") {
    const auto circuit = presets::board("board1");
    const auto full = signature::sweep_bias(circuit, small_sweep(0.16, 0.22, 0.01, 7), "b");
    const auto part = signature::sweep_bias(circuit, small_sweep(0.18, 0.20, 0.01, 7), "b");
    REQUIRE(part.rows() == 3);
    REQUIRE(full.cols() == part.cols());
    for (std::size_t r = 0; r < part.rows(); ++r) {
        const std::size_t full_r = r + 2;  // 0.18 starts two rows into the full grid
        CHECK(part.bias_v[r] == doctest::Approx(full.bias_v[full_r]));
        for (std::size_t c = 0; c < part.cols(); ++c)
            CHECK(part.at(r, c) == full.at(full_r, c));
    }
}

TEST_CASE("rows below the oscillation onset sit at the noise floor") {
    const auto circuit = presets::board("board1");
    const auto cfg = small_sweep(0.02, 0.06, 0.02, 3);
    const auto map = signature::sweep_bias(circuit, cfg, "b");
    for (std::size_t r = 0; r < map.rows(); ++r)
        for (std::size_t c = 0; c < map.cols(); ++c)
            CHECK(map.at(r, c) <= cfg.noise_floor_dbm + 3.0);
    CHECK(signature::onset_bias(map, cfg.noise_floor_dbm) == -1.0);
}

TEST_CASE("fundamental jitter near onset exceeds the deep-NDR jitter") {
    auto circuit = presets::board("board5");
    auto onset_cfg = small_sweep(0.132, 0.150, 0.002, 11);
    onset_cfg.trace_samples = 32768;
    onset_cfg.repeatability_drift = 0.0;
    auto deep_cfg = small_sweep(0.200, 0.218, 0.002, 11);
    deep_cfg.trace_samples = 32768;
    deep_cfg.repeatability_drift = 0.0;

    auto step_variance = [&](const SignatureMap& map) {
        const auto track = signature::fundamental_track(map, -80.0);
        REQUIRE(track.size() >= 3);
        std::vector<double> steps;
        for (std::size_t i = 1; i < track.size(); ++i)
            steps.push_back(track[i].frequency_hz - track[i - 1].frequency_hz);
        double mean = 0.0;
        for (double s : steps) mean += s;
        mean /= steps.size();
        double var = 0.0;
        for (double s : steps) var += (s - mean) * (s - mean);
        return var / steps.size();
    };

    const double onset_var =
        step_variance(signature::sweep_bias(circuit, onset_cfg, "b5"));
    const double deep_var = step_variance(signature::sweep_bias(circuit, deep_cfg, "b5"));
    CHECK(onset_var > deep_var);
}

TEST_CASE("onset bias of an oscillating sweep lies inside the inflated NDR interval") {
    const auto circuit = presets::board("board1");
    const auto cfg = small_sweep(0.10, 0.22, 0.01, 5);
    const auto map = signature::sweep_bias(circuit, cfg, "b");
    const double onset = signature::onset_bias(map, cfg.noise_floor_dbm);
    REQUIRE(onset > 0.0);
    const auto [lo, hi] = diode::ndr_region(circuit.diode);
    CHECK(onset >= lo - 0.010);
    CHECK(onset <= hi + 0.010);
}

TEST_CASE("map save/load round-trips exactly") {
    const auto circuit = presets::board("board2");
    auto map = signature::sweep_bias(circuit, small_sweep(0.19, 0.21, 0.01, 9), "board2");
    map.provenance.config_hash = "0123456789abcdef";
    const auto path = temp_path("roundtrip.json");
    signature::save_map(map, path);
    const auto loaded = signature::load_map(path);
    CHECK(loaded.board_id == map.board_id);
    CHECK(loaded.bias_v == map.bias_v);
    CHECK(loaded.frequency_hz == map.frequency_hz);
    CHECK(loaded.power_dbm == map.power_dbm);
    CHECK(loaded.faulted_rows == map.faulted_rows);
    CHECK(loaded.provenance.config_hash == map.provenance.config_hash);
    CHECK(loaded.provenance.seed == map.provenance.seed);
    std::remove(path.c_str());
}

TEST_CASE("malformed map files raise SchemaError naming the field") {
    const auto path = temp_path("bad.json");
    {
        std::ofstream out(path);
        out << R"({"schema_version":2,"board_id":"x","bias_v":[0.1,0.2],)"
            << R"("frequency_hz":[1e6,2e6,3e6],"power_dbm":[1,2,3,4,5]})";
    }
    try {
        signature::load_map(path);
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        CHECK(e.field_path == "power_dbm");
    }
    std::remove(path.c_str());
}

TEST_CASE("a version-1 file loads with defaulted fields") {
    const auto path = temp_path("v1.json");
    {
        std::ofstream out(path);
        out << R"({"schema_version":1,"bias_v":[0.1],"frequency_hz":[1e6,2e6],)"
            << R"("power_dbm":[-80,-75],"provenance":{"config_hash":"aa","seed":4}})";
    }
    const auto map = signature::load_map(path);
    CHECK(map.board_id.empty());
    CHECK(map.faulted_rows.empty());
    CHECK(map.provenance.seed == 4);
    CHECK(map.power_dbm.size() == 2);
    std::remove(path.c_str());

    const auto path2 = temp_path("v9.json");
    {
        std::ofstream out(path2);
        out << R"({"schema_version":9,"bias_v":[],"frequency_hz":[],"power_dbm":[]})";
    }
    CHECK_THROWS_AS(signature::load_map(path2), SchemaError);
    std::remove(path2.c_str());
}

TEST_CASE("feature vector of an all-floor map is zeroed with a sentinel onset") {
    SignatureMap map;
    map.bias_v = {0.1, 0.2};
    map.frequency_hz = {100e6, 200e6, 300e6};
    map.power_dbm.assign(6, -80.0);
    const auto features = signature::feature_vector(map, -80.0);
    REQUIRE(features.size() == 3 * 2 + 2);
    for (std::size_t i = 0; i < 6; ++i) CHECK(features[i] == 0.0);
    CHECK(features[6] == 0.0);    // tunable range
    CHECK(features[7] == -1.0);   // onset sentinel
}

TEST_CASE("a uniform dB offset leaves the fundamental-frequency features unchanged") {
    SignatureMap map;
    map.bias_v = {0.1, 0.2, 0.3};
    map.frequency_hz = {100e6, 200e6, 300e6, 400e6};
    map.power_dbm.assign(12, -80.0);
    map.power_dbm[0 * 4 + 1] = -20.0;
    map.power_dbm[1 * 4 + 2] = -25.0;
    map.power_dbm[2 * 4 + 2] = -24.0;

    auto f1 = signature::feature_vector(map, -80.0);
    for (auto& p : map.power_dbm) p += 5.0;
    auto f2 = signature::feature_vector(map, -80.0);
    for (std::size_t row = 0; row < 3; ++row)
        CHECK(f1[3 * row] == f2[3 * row]);  // fundamental frequency slots
}

TEST_CASE("different boards produce different onset and fundamental features") {
    auto cfg = small_sweep(0.14, 0.22, 0.02, 5);
    const auto m1 = signature::sweep_bias(presets::board("board1"), cfg, "board1");
    const auto m5 = signature::sweep_bias(presets::board("board5"), cfg, "board5");
    const auto f1 = signature::feature_vector(m1, cfg.noise_floor_dbm);
    const auto f5 = signature::feature_vector(m5, cfg.noise_floor_dbm);
    REQUIRE(f1.size() == f5.size());
    // Fundamental positions differ by hundreds of MHz wherever both oscillate.
    bool fundamental_differs = false;
    for (std::size_t row = 0; row < m1.rows(); ++row) {
        if (f1[3 * row] > 0 && f5[3 * row] > 0 &&
            std::fabs(f1[3 * row] - f5[3 * row]) > 100e6)
            fundamental_differs = true;
    }
    CHECK(fundamental_differs);
    CHECK(signature::onset_bias(m5, cfg.noise_floor_dbm) <
          signature::onset_bias(m1, cfg.noise_floor_dbm));
}

TEST_CASE("rows that blow up are recorded as faulted, not fatal") {
    // A heavy thermal term makes the junction stiff beyond ~0.15 V source
    // bias while low biases integrate fine.
    auto circuit = presets::board("board1");
    circuit.diode.saturation_current = 1e-5;
    circuit.diode.thermal_voltage = 0.012;

    auto cfg = small_sweep(0.02, 0.26, 0.06, 4);
    cfg.adaptive_duration = false;
    const auto map = signature::sweep_bias(circuit, cfg, "stiff");
    REQUIRE(map.rows() == 5);
    CHECK(!map.faulted_rows.empty());
    CHECK(map.faulted_rows.size() < map.rows());
    for (std::size_t r : map.faulted_rows)
        for (std::size_t c = 0; c < map.cols(); ++c)
            CHECK(map.at(r, c) == cfg.noise_floor_dbm);

    // Faulted rows survive persistence.
    const auto path = temp_path("faulted.json");
    signature::save_map(map, path);
    CHECK(signature::load_map(path).faulted_rows == map.faulted_rows);
    std::remove(path.c_str());
}

TEST_CASE("tunable range grows with the capacitance voltage coefficient") {
    std::vector<double> ranges;
    for (double coeff : {0.0, 0.6, 1.2}) {
        auto circuit = presets::board("board1");
        circuit.diode.capacitance_voltage_coeff = coeff;
        auto cfg = small_sweep(0.17, 0.27, 0.02, 6);
        cfg.repeatability_drift = 0.0;
        cfg.trace_samples = 65536;  // fine bins so residual pulling resolves
        const auto map = signature::sweep_bias(circuit, cfg, "b1");
        const auto track = signature::fundamental_track(map, cfg.noise_floor_dbm);
        REQUIRE(track.size() >= 2);
        std::vector<std::pair<double, double>> points;
        for (const auto& p : track) points.emplace_back(p.bias_v, p.frequency_hz);
        ranges.push_back(spectral::tunable_range_hz(points));
    }
    CHECK(ranges[0] > 0.0);
    CHECK(ranges[1] > ranges[0]);
    CHECK(ranges[2] > ranges[1]);
}
