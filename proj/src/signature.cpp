#include "tdh/signature.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "tdh/errors.hpp"
#include "tdh/rng.hpp"

namespace tdh::signature {

namespace {

constexpr int kMapSchemaVersion = 2;

int resolve_workers(int requested, std::size_t jobs) {
    int n = requested;
    if (n <= 0) {
        if (const char* env = std::getenv("TDH_NUM_WORKERS")) n = std::atoi(env);
    }
    if (n <= 0) n = static_cast<int>(std::thread::hardware_concurrency());
    if (n <= 0) n = 1;
    return static_cast<int>(std::min<std::size_t>(n, jobs));
}

std::vector<std::int64_t> bias_grid_uv(const SweepConfig& cfg) {
    if (!(cfg.bias_step_v > 0.0)) throw InvalidInput("bias_step must be > 0");
    const std::int64_t start = std::llround(cfg.bias_start_v * 1e6);
    const std::int64_t stop = std::llround(cfg.bias_stop_v * 1e6);
    const std::int64_t step = std::llround(cfg.bias_step_v * 1e6);
    if (step <= 0 || stop < start) throw InvalidInput("invalid bias range");
    std::vector<std::int64_t> grid;
    for (std::int64_t uv = start; uv <= stop; uv += step) grid.push_back(uv);
    return grid;
}

// Downsample a spectrum row to at most `target` points by max-pooling, which
// keeps peaks intact.  Returns the pooled frequency grid on first use.
void pool_row(const std::vector<double>& freq, const std::vector<double>& power, int target,
              std::vector<double>* out_freq, std::vector<double>& out_power) {
    const std::size_t n = freq.size();
    if (target <= 0 || n <= static_cast<std::size_t>(target)) {
        if (out_freq) *out_freq = freq;
        out_power = power;
        return;
    }
    const std::size_t groups = static_cast<std::size_t>(target);
    out_power.resize(groups);
    if (out_freq) out_freq->resize(groups);
    for (std::size_t g = 0; g < groups; ++g) {
        const std::size_t lo = g * n / groups;
        const std::size_t hi = (g + 1) * n / groups;
        double best = power[lo];
        for (std::size_t i = lo + 1; i < hi; ++i) best = std::max(best, power[i]);
        out_power[g] = best;
        if (out_freq) (*out_freq)[g] = 0.5 * (freq[lo] + freq[hi - 1]);
    }
}

}  // namespace

SignatureMap sweep_bias(const circuit::OscillatorCircuit& circuit, const SweepConfig& cfg,
                        const std::string& board_id) {
    const auto grid_uv = bias_grid_uv(cfg);
    const std::size_t n_rows = grid_uv.size();
    if (cfg.trace_samples < (1u << 14))
        throw InvalidInput("trace_samples must be >= 2^14 for spectral analysis");

    // One capacitance drift draw per sweep, from the master seed.
    circuit::OscillatorCircuit base = circuit;
    if (cfg.repeatability_drift > 0.0) {
        SplitMix64 rng(derive_seed(cfg.seed, -1));
        base.diode.junction_capacitance *=
            1.0 + cfg.repeatability_drift * rng.next_gaussian();
    }

    circuit::SimOptions sim_opts;
    const double dt_out = 1.0 / sim_opts.output_sample_rate_hz;

    SignatureMap map;
    map.board_id = board_id;
    map.bias_v.resize(n_rows);
    for (std::size_t i = 0; i < n_rows; ++i) map.bias_v[i] = grid_uv[i] * 1e-6;
    map.provenance.seed = cfg.seed;

    std::vector<std::vector<double>> rows(n_rows);
    std::vector<std::uint8_t> faulted(n_rows, 0);
    std::vector<double> pooled_freq;
    std::mutex freq_mutex;
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::string failure;
    std::mutex failure_mutex;

    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n_rows || failed.load()) break;
            try {
                circuit::OscillatorCircuit c = base;
                c.bias_voltage = grid_uv[i] * 1e-6;
                if (cfg.row_jitter > 0.0) {
                    SplitMix64 jitter_rng(derive_seed(derive_seed(cfg.seed, grid_uv[i]), 7));
                    c.diode.junction_capacitance *=
                        1.0 + cfg.row_jitter * jitter_rng.next_gaussian();
                }

                std::size_t n_samples = cfg.trace_samples;
                if (cfg.adaptive_duration) {
                    const auto sv = circuit::startup_check(c);
                    if (sv.oscillating) {
                        // Give the envelope ~30 e-folds to climb out of the
                        // picovolt-scale startup noise.
                        const double t_need = 30.0 * sv.growth_time_constant_s;
                        const auto want =
                            static_cast<std::size_t>(std::ceil(t_need / dt_out));
                        n_samples = std::clamp(want, cfg.trace_samples, cfg.max_trace_samples);
                    }
                }

                std::vector<double> row;
                try {
                    const auto trace = circuit::simulate_transient(
                        c, static_cast<double>(n_samples) * dt_out,
                        derive_seed(cfg.seed, grid_uv[i]), sim_opts);
                    auto spec = spectral::compute_spectrum(trace, cfg.window,
                                                           c.load_resistance, cfg.span_hz);
                    if (cfg.rbw_hz > 0.0) spec = spectral::apply_rbw(spec, cfg.rbw_hz);
                    std::vector<double> freq_local;
                    pool_row(spec.frequency_hz, spec.power_dbm, cfg.points_per_spectrum,
                             &freq_local, row);
                    {
                        std::lock_guard<std::mutex> lock(freq_mutex);
                        if (pooled_freq.empty()) pooled_freq = freq_local;
                    }
                    for (double& p : row) p = std::max(p, cfg.noise_floor_dbm);
                } catch (const StepUnstable&) {
                    faulted[i] = 1;  // recorded, not fatal for the sweep
                    row.clear();
                }
                rows[i] = std::move(row);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                failure = e.what();
                failed.store(true);
            }
        }
    };

    const int n_workers = resolve_workers(cfg.workers, n_rows);
    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_workers);
        for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failed.load()) throw Error("sweep failed: " + failure);

    if (pooled_freq.empty())
        throw Error("sweep produced no usable rows");

    map.frequency_hz = pooled_freq;
    const std::size_t n_cols = map.frequency_hz.size();
    map.power_dbm.assign(n_rows * n_cols, cfg.noise_floor_dbm);
    for (std::size_t i = 0; i < n_rows; ++i) {
        if (faulted[i]) {
            map.faulted_rows.push_back(i);
            continue;
        }
        if (rows[i].size() != n_cols) throw Error("inconsistent row length in sweep");
        std::copy(rows[i].begin(), rows[i].end(), map.power_dbm.begin() + i * n_cols);
    }
    return map;
}

namespace {

// Row-level peak/harmonic scan against a pooled grid.
struct RowPeaks {
    bool has_signal = false;
    double fundamental_hz = 0.0;
    double fundamental_dbm = 0.0;
    int harmonic_count = 0;
};

RowPeaks scan_row(const SignatureMap& map, std::size_t row, double floor_dbm) {
    RowPeaks out;
    const std::size_t n = map.cols();
    double best = -1e300;
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (map.frequency_hz[i] < 1e6) continue;
        const double p = map.at(row, i);
        if (p > best) {
            best = p;
            best_i = i;
        }
    }
    if (best <= floor_dbm + 1e-9) return out;
    out.has_signal = true;
    out.fundamental_hz = map.frequency_hz[best_i];
    out.fundamental_dbm = best;

    const double f1 = out.fundamental_hz;
    const double f_last = map.frequency_hz.back();
    for (int k = 2; k * f1 * 0.98 <= f_last; ++k) {
        const double lo = k * f1 * 0.98, hi = k * f1 * 1.02;
        bool found = false;
        for (std::size_t i = 0; i < n && !found; ++i) {
            if (map.frequency_hz[i] >= lo && map.frequency_hz[i] <= hi &&
                map.at(row, i) > floor_dbm + 1e-9)
                found = true;
        }
        if (found) ++out.harmonic_count;
    }
    return out;
}

}  // namespace

double onset_bias(const SignatureMap& map, double noise_floor_dbm) {
    for (std::size_t r = 0; r < map.rows(); ++r) {
        for (std::size_t c = 0; c < map.cols(); ++c) {
            if (map.at(r, c) > noise_floor_dbm + 3.0) return map.bias_v[r];
        }
    }
    return -1.0;
}

std::vector<FundamentalPoint> fundamental_track(const SignatureMap& map,
                                                double noise_floor_dbm) {
    std::vector<FundamentalPoint> track;
    for (std::size_t r = 0; r < map.rows(); ++r) {
        const RowPeaks peaks = scan_row(map, r, noise_floor_dbm);
        if (peaks.has_signal)
            track.push_back({map.bias_v[r], peaks.fundamental_hz, peaks.fundamental_dbm});
    }
    return track;
}

std::vector<double> feature_vector(const SignatureMap& map, double noise_floor_dbm) {
    std::vector<double> features;
    features.reserve(3 * map.rows() + 2);
    std::vector<std::pair<double, double>> track;
    for (std::size_t r = 0; r < map.rows(); ++r) {
        const RowPeaks peaks = scan_row(map, r, noise_floor_dbm);
        if (peaks.has_signal) {
            features.push_back(peaks.fundamental_hz);
            features.push_back(std::max(peaks.fundamental_dbm - noise_floor_dbm, 0.0));
            features.push_back(static_cast<double>(peaks.harmonic_count));
            track.emplace_back(map.bias_v[r], peaks.fundamental_hz);
        } else {
            features.push_back(0.0);
            features.push_back(0.0);
            features.push_back(0.0);
        }
    }
    features.push_back(track.size() >= 2 ? spectral::tunable_range_hz(track) : 0.0);
    features.push_back(onset_bias(map, noise_floor_dbm));
    return features;
}

void save_map(const SignatureMap& map, const std::string& path) {
    nlohmann::json j;
    j["schema_version"] = kMapSchemaVersion;
    j["board_id"] = map.board_id;
    j["bias_v"] = map.bias_v;
    j["frequency_hz"] = map.frequency_hz;
    j["power_dbm"] = map.power_dbm;
    j["faulted_rows"] = map.faulted_rows;
    j["provenance"] = {{"config_hash", map.provenance.config_hash},
                       {"seed", map.provenance.seed}};
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << j.dump(1) << "\n";
}

SignatureMap load_map(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError(path, "cannot open file");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw SchemaError(path, std::string("invalid JSON: ") + e.what());
    }

    auto require = [&](const char* key) -> const nlohmann::json& {
        if (!j.contains(key)) throw SchemaError(key, "missing required field");
        return j.at(key);
    };

    const int version = j.value("schema_version", 0);
    if (version < 1 || version > kMapSchemaVersion)
        throw SchemaError("schema_version",
                          "unsupported version " + std::to_string(version));

    SignatureMap map;
    try {
        require("bias_v").get_to(map.bias_v);
        require("frequency_hz").get_to(map.frequency_hz);
        require("power_dbm").get_to(map.power_dbm);
    } catch (const SchemaError&) {
        throw;
    } catch (const std::exception& e) {
        throw SchemaError(path, std::string("bad field type: ") + e.what());
    }

    // Version 1 predates faulted_rows / board_id; fill defaults.
    if (version >= 2) {
        if (j.contains("board_id")) j.at("board_id").get_to(map.board_id);
        if (j.contains("faulted_rows")) j.at("faulted_rows").get_to(map.faulted_rows);
    } else {
        map.board_id = j.value("board_id", "");
    }
    if (j.contains("provenance")) {
        const auto& p = j.at("provenance");
        map.provenance.config_hash = p.value("config_hash", "");
        map.provenance.seed = p.value("seed", std::uint64_t{0});
    }

    if (map.power_dbm.size() != map.bias_v.size() * map.frequency_hz.size())
        throw SchemaError("power_dbm",
                          "matrix size " + std::to_string(map.power_dbm.size()) +
                              " does not match " + std::to_string(map.bias_v.size()) + "x" +
                              std::to_string(map.frequency_hz.size()));
    for (double p : map.power_dbm)
        if (!std::isfinite(p)) throw SchemaError("power_dbm", "non-finite entry");
    for (std::size_t r : map.faulted_rows)
        if (r >= map.bias_v.size()) throw SchemaError("faulted_rows", "row index out of range");
    return map;
}

}  // namespace tdh::signature
