#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <unistd.h>

#include "tdh/errors.hpp"
#include "tdh/fingerprint.hpp"
#include "tdh/presets.hpp"
#include "tdh/rng.hpp"
#include "tdh/signature.hpp"

using namespace tdh;
using fingerprint::FingerprintDb;
using signature::SignatureMap;

namespace {

constexpr double kFloor = -80.0;

// Synthetic map: rows with a sharp peak walking across the grid.
SignatureMap synth_map(std::size_t rows, std::size_t cols, std::size_t peak_col,
                       double peak_dbm = -15.0, std::size_t quiet_rows = 0) {
    SignatureMap m;
    for (std::size_t r = 0; r < rows; ++r) m.bias_v.push_back(0.10 + 0.01 * r);
    for (std::size_t c = 0; c < cols; ++c) m.frequency_hz.push_back(50e6 + 10e6 * c);
    m.power_dbm.assign(rows * cols, kFloor);
    for (std::size_t r = quiet_rows; r < rows; ++r) {
        const std::size_t col = (peak_col + r) % cols;
        m.power_dbm[r * cols + col] = peak_dbm;
        if (col + 1 < cols) m.power_dbm[r * cols + col + 1] = peak_dbm - 12.0;
    }
    return m;
}

signature::SweepConfig mini_cfg(std::uint64_t seed) {
    signature::SweepConfig cfg;
    cfg.bias_start_v = 0.16;
    cfg.bias_stop_v = 0.24;
    cfg.bias_step_v = 0.01;
    cfg.trace_samples = 16384;
    cfg.max_trace_samples = 32768;
    cfg.seed = seed;
    cfg.repeatability_drift = 2e-3;
    return cfg;
}

}  // namespace

TEST_CASE("a map matches itself perfectly") {
    const auto m = synth_map(8, 64, 5, -15.0, 3);
    CHECK(fingerprint::match_score(m, m, kFloor) == doctest::Approx(1.0));
}

TEST_CASE("a pure noise-floor map scores near zero") {
    const auto m = synth_map(8, 64, 5);
    SignatureMap quiet = m;
    quiet.power_dbm.assign(quiet.power_dbm.size(), kFloor);
    CHECK(fingerprint::match_score(m, quiet, kFloor) <= 0.05);
}

TEST_CASE("match_score is symmetric") {
    SplitMix64 rng(5);
    auto a = synth_map(6, 48, 3);
    auto b = synth_map(6, 48, 17);
    for (auto& p : a.power_dbm) p += 3.0 * rng.next_double();
    for (auto& p : b.power_dbm) p += 3.0 * rng.next_double();
    CHECK(fingerprint::match_score(a, b, kFloor) ==
          doctest::Approx(fingerprint::match_score(b, a, kFloor)));
}

TEST_CASE("disjoint peak positions score near zero, overlapping ones high") {
    const auto a = synth_map(8, 64, 5);
    const auto near = synth_map(8, 64, 5, -18.0);  // same stripes, lower level
    const auto far = synth_map(8, 64, 37);
    CHECK(fingerprint::match_score(a, near, kFloor) > 0.95);
    CHECK(fingerprint::match_score(a, far, kFloor) < 0.1);
}

TEST_CASE("incompatible grids raise GridMismatch") {
    const auto a = synth_map(8, 64, 5);
    auto shifted = synth_map(8, 64, 5);
    for (auto& f : shifted.frequency_hz) f += 300e6;
    CHECK_THROWS_AS(fingerprint::match_score(a, shifted, kFloor), GridMismatch);

    auto other_biases = synth_map(8, 64, 5);
    for (auto& b : other_biases.bias_v) b += 1.0;
    CHECK_THROWS_AS(fingerprint::match_score(a, other_biases, kFloor), GridMismatch);
}

TEST_CASE("resampling bridges different grid densities over the same span") {
    const auto a = synth_map(6, 64, 10);
    SignatureMap dense;
    dense.bias_v = a.bias_v;
    for (std::size_t c = 0; c < 127; ++c) dense.frequency_hz.push_back(50e6 + 5e6 * c);
    dense.power_dbm.assign(dense.bias_v.size() * 127, kFloor);
    for (std::size_t r = 0; r < dense.bias_v.size(); ++r) {
        const std::size_t col = 2 * ((10 + r) % 64);
        dense.power_dbm[r * 127 + col] = -15.0;
    }
    CHECK(fingerprint::match_score(a, dense, kFloor) > 0.7);
}

TEST_CASE("enrollment statistics and guards") {
    FingerprintDb db;
    const auto m = synth_map(8, 64, 5);
    const auto fp = fingerprint::enroll(db, "b1", {m, m, m}, kFloor);
    CHECK(fp.intra_mean == doctest::Approx(1.0));
    CHECK(fp.intra_deviation == doctest::Approx(0.0));
    CHECK(fp.threshold() == doctest::Approx(1.0));

    CHECK_THROWS_AS(fingerprint::enroll(db, "b1", {m, m, m}, kFloor), DuplicateId);
    FingerprintDb db2;
    CHECK_THROWS_AS(fingerprint::enroll(db2, "x", {m, m}, kFloor), TooFewSweeps);
}

TEST_CASE("identify returns the enrolled template at score 1") {
    FingerprintDb db;
    fingerprint::enroll(db, "b1", {synth_map(8, 64, 5), synth_map(8, 64, 5), synth_map(8, 64, 5)},
                        kFloor);
    fingerprint::enroll(db, "b2",
                        {synth_map(8, 64, 30), synth_map(8, 64, 30), synth_map(8, 64, 30)},
                        kFloor);
    const auto report = fingerprint::identify(db, db.fingerprints()[0].template_map, kFloor);
    CHECK(report.known);
    CHECK(report.matched_id == "b1");
    CHECK(report.ranked.front().score == doctest::Approx(1.0));
    CHECK(report.ranked.size() == 2);
    CHECK(report.ranked[0].score >= report.ranked[1].score);

    FingerprintDb empty;
    CHECK_THROWS_AS(fingerprint::identify(empty, synth_map(4, 16, 2), kFloor), EmptyDatabase);
}

TEST_CASE("a uniform dB offset on the query does not change the ranking") {
    FingerprintDb db;
    fingerprint::enroll(db, "b1", {synth_map(8, 64, 5), synth_map(8, 64, 5), synth_map(8, 64, 5)},
                        kFloor);
    fingerprint::enroll(db, "b2",
                        {synth_map(8, 64, 40), synth_map(8, 64, 40), synth_map(8, 64, 40)},
                        kFloor);
    auto query = synth_map(8, 64, 5, -20.0);
    const auto before = fingerprint::identify(db, query, kFloor);
    for (auto& p : query.power_dbm)
        if (p > kFloor) p += 5.0;
    const auto after = fingerprint::identify(db, query, kFloor);
    REQUIRE(before.ranked.size() == after.ranked.size());
    for (std::size_t i = 0; i < before.ranked.size(); ++i)
        CHECK(before.ranked[i].board_id == after.ranked[i].board_id);
}

TEST_CASE("median template is robust to one faulted sweep row") {
    auto a = synth_map(8, 64, 5);
    auto b = synth_map(8, 64, 5);
    auto broken = synth_map(8, 64, 5);
    for (std::size_t c = 0; c < broken.cols(); ++c)
        broken.power_dbm[3 * broken.cols() + c] = kFloor;  // row 3 faulted
    FingerprintDb db;
    const auto fp = fingerprint::enroll(db, "b", {a, b, broken}, kFloor);
    CHECK(fingerprint::match_score(fp.template_map, a, kFloor) == doctest::Approx(1.0));
}

TEST_CASE("simulated boards separate: reseeded self-score beats cross-board score") {
    const auto b1a = signature::sweep_bias(presets::board("board1"), mini_cfg(100), "board1");
    const auto b1b = signature::sweep_bias(presets::board("board1"), mini_cfg(200), "board1");
    const auto b2 = signature::sweep_bias(presets::board("board2"), mini_cfg(300), "board2");

    const double self_score = fingerprint::match_score(b1a, b1b, kFloor);
    const double cross_score = fingerprint::match_score(b1a, b2, kFloor);
    CHECK(self_score > 0.8);
    CHECK(cross_score < self_score);
    CHECK(cross_score < 0.5);
}

TEST_CASE("tamper delta: unchanged boards read near zero, perturbed ones stand out") {
    FingerprintDb db;
    std::vector<SignatureMap> sweeps;
    for (std::uint64_t s : {11, 22, 33})
        sweeps.push_back(signature::sweep_bias(presets::board("board3"), mini_cfg(s), "board3"));
    const auto fp = fingerprint::enroll(db, "board3", sweeps, kFloor);

    const auto same =
        signature::sweep_bias(presets::board("board3"), mini_cfg(44), "board3");
    const double delta_same = fingerprint::tamper_delta(fp, same, kFloor);
    CHECK(delta_same < 0.15);

    auto tampered_circuit = presets::board("board3");
    tampered_circuit.diode.junction_capacitance *= 1.10;
    const auto tampered = signature::sweep_bias(tampered_circuit, mini_cfg(55), "board3");
    const double delta_tampered = fingerprint::tamper_delta(fp, tampered, kFloor);
    CHECK(delta_tampered > 3.0 * fp.intra_deviation);
    CHECK(delta_tampered > delta_same);

    const auto other =
        signature::sweep_bias(presets::board("board5"), mini_cfg(66), "board5");
    CHECK(fingerprint::tamper_delta(fp, other, kFloor) > 0.5);
}

TEST_CASE("database save/load preserves fingerprints") {
    FingerprintDb db;
    fingerprint::enroll(db, "b1", {synth_map(6, 32, 4), synth_map(6, 32, 4), synth_map(6, 32, 4)},
                        kFloor);
    const std::string path =
        "/tmp/tdh_test_db_" + std::to_string(::getpid()) + ".json";
    db.save(path);
    const auto loaded = FingerprintDb::load(path);
    REQUIRE(loaded.fingerprints().size() == 1);
    CHECK(loaded.fingerprints()[0].board_id == "b1");
    CHECK(loaded.fingerprints()[0].intra_mean == doctest::Approx(1.0));
    CHECK(fingerprint::match_score(loaded.fingerprints()[0].template_map,
                                   db.fingerprints()[0].template_map, kFloor) ==
          doctest::Approx(1.0));
    std::remove(path.c_str());
}
