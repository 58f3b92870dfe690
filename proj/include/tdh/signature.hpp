#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tdh/circuit.hpp"
#include "tdh/spectral.hpp"

namespace tdh::signature {

struct SweepConfig {
    double bias_start_v = 0.003;
    double bias_stop_v = 0.300;
    double bias_step_v = 0.001;
    std::pair<double, double> span_hz{50e3, 3e9};
    int points_per_spectrum = 10001;
    std::uint64_t seed = 0;

    spectral::Window window = spectral::Window::Hann;
    double noise_floor_dbm = -80.0;

    // Optional instrument-style resolution-bandwidth pass applied to each
    // row before pooling (0 keeps the native bin width).  Wider settings
    // trade frequency detail for robustness of row-to-row comparison.
    double rbw_hz = 0.0;

    // Trace length per row, in output samples (7 GS/s grid).  Rows whose
    // small-signal growth is slow get extended up to max_trace_samples so the
    // oscillation has time to reach its limit cycle.
    std::size_t trace_samples = 65536;
    std::size_t max_trace_samples = 262144;
    bool adaptive_duration = true;

    // Per-sweep repeatability: the junction capacitance is dithered by this
    // relative sigma (seed-derived, one draw per sweep), emulating run-to-run
    // drift of a physical measurement session.  Zero disables it.
    double repeatability_drift = 1e-3;

    // Per-row jitter on the junction capacitance (relative sigma, one draw
    // per bias point), emulating supply ripple and settling between points.
    // Independent across rows, so map-to-map scores average over it.
    double row_jitter = 0.0;

    int workers = 0;  // 0 = TDH_NUM_WORKERS env or hardware concurrency
};

struct Provenance {
    std::string config_hash;  // 16 hex chars
    std::uint64_t seed = 0;
};

// Bias x frequency power map (the spectrum-vs-voltage color map).
struct SignatureMap {
    std::string board_id;
    std::vector<double> bias_v;        // rows
    std::vector<double> frequency_hz;  // columns, uniform
    std::vector<double> power_dbm;     // row-major, bias_v.size()*frequency_hz.size()
    std::vector<std::size_t> faulted_rows;  // rows that failed integration
    Provenance provenance;

    double at(std::size_t row, std::size_t col) const {
        return power_dbm[row * frequency_hz.size() + col];
    }
    std::size_t rows() const { return bias_v.size(); }
    std::size_t cols() const { return frequency_hz.size(); }
};

// One spectrum row per bias point.  Row seeds derive from (seed, bias in uV)
// so a sub-range sweep reproduces the matching rows of a full sweep exactly.
// Rows where the integration blows up are recorded at the noise floor and
// listed in faulted_rows rather than aborting the sweep.
SignatureMap sweep_bias(const circuit::OscillatorCircuit& circuit, const SweepConfig& config,
                        const std::string& board_id = "");

// Fixed-length descriptor: per row [fundamental_hz, power-above-floor_db,
// harmonic_count], then [tunable_range_hz, onset_bias_v] (-1 sentinel when the
// map never rises above the floor).
std::vector<double> feature_vector(const SignatureMap& map, double noise_floor_dbm);

// First bias whose row rises above the noise floor; -1 if none.
double onset_bias(const SignatureMap& map, double noise_floor_dbm);

// (bias, fundamental_hz, power_dbm) for every row with signal.
struct FundamentalPoint {
    double bias_v;
    double frequency_hz;
    double power_dbm;
};
std::vector<FundamentalPoint> fundamental_track(const SignatureMap& map, double noise_floor_dbm);

// JSON persistence.  save/load round-trip losslessly, provenance included.
// Older minor schema versions load with defaults filled in; malformed files
// raise SchemaError naming the offending field.
void save_map(const SignatureMap& map, const std::string& path);
SignatureMap load_map(const std::string& path);

}  // namespace tdh::signature
