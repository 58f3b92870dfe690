// tdh: command-line driver for tunnel-diode board simulation, signature
// sweeps, fingerprinting, and link budgets.  Every output embeds the resolved
// config hash and seed so a rerun can be diffed byte for byte.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tdh/circuit.hpp"
#include "tdh/config.hpp"
#include "tdh/csv.hpp"
#include "tdh/errors.hpp"
#include "tdh/fingerprint.hpp"
#include "tdh/link_budget.hpp"
#include "tdh/presets.hpp"
#include "tdh/signature.hpp"
#include "tdh/spectral.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kToolVersion = "tdharmonic-0.1.0";

struct CommonFlags {
    std::string config_path;
    std::string board;
    double bias = -1.0;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string out_dir;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config_path, "Config file (TOML subset or JSON)");
    cmd->add_option("--board", f.board, "Board preset (board1..board5) or 'custom'");
    cmd->add_option("--bias", f.bias, "Bias voltage in volts");
    cmd->add_option("--seed", f.seed, "Master seed")->each([&](const std::string&) {
        f.seed_set = true;
    });
    cmd->add_option("--out", f.out_dir, "Output directory");
}

tdh::config::RunConfig resolve(const CommonFlags& f) {
    tdh::config::RunConfig cfg;
    cfg.circuit = tdh::presets::board(cfg.board);
    if (!f.config_path.empty()) cfg = tdh::config::load_config(f.config_path);
    if (!f.board.empty()) {
        cfg.board = f.board;
        if (f.board != "custom") cfg.circuit = tdh::presets::board(f.board);
    }
    if (f.bias >= 0.0) cfg.circuit.bias_voltage = f.bias;
    if (f.seed_set) {
        cfg.seed = f.seed;
        cfg.sweep.seed = f.seed;
    }
    if (!f.out_dir.empty()) cfg.out_dir = f.out_dir;
    tdh::config::validate(cfg);
    return cfg;
}

std::string provenance_line(const tdh::config::RunConfig& cfg) {
    return "config_hash=" + tdh::config::config_hash(cfg) +
           " seed=" + std::to_string(cfg.seed) + " tool=" + kToolVersion;
}

json provenance_json(const tdh::config::RunConfig& cfg) {
    return {{"config_hash", tdh::config::config_hash(cfg)},
            {"seed", cfg.seed},
            {"tool", kToolVersion}};
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw tdh::Error("cannot write " + path.string());
    out << j.dump(1) << "\n";
}

const char* regime_name(tdh::circuit::Regime r) {
    switch (r) {
        case tdh::circuit::Regime::Quiescent: return "quiescent";
        case tdh::circuit::Regime::SteadyOscillation: return "steady";
        case tdh::circuit::Regime::Bursty: return "bursty";
    }
    return "?";
}

// ---------------------------------------------------------------------------

int cmd_simulate(const CommonFlags& flags) {
    auto cfg = resolve(flags);
    fs::create_directories(cfg.out_dir);
    const std::string prov = provenance_line(cfg);

    tdh::circuit::SimOptions sim_opts;
    const double dt = 1.0 / sim_opts.output_sample_rate_hz;
    const double duration = cfg.simulate_duration_s > 0.0
                                ? cfg.simulate_duration_s
                                : static_cast<double>(cfg.sweep.trace_samples) * dt;

    const auto verdict = tdh::circuit::startup_check(cfg.circuit);
    const auto trace = tdh::circuit::simulate_transient(cfg.circuit, duration, cfg.seed, sim_opts);
    const auto regime = tdh::circuit::classify_regime(trace);
    auto spectrum = tdh::spectral::compute_spectrum(trace, cfg.sweep.window,
                                                    cfg.circuit.load_resistance,
                                                    cfg.sweep.span_hz);
    if (cfg.rbw_hz > 0.0) spectrum = tdh::spectral::apply_rbw(spectrum, cfg.rbw_hz);

    tdh::csv::write_trace(fs::path(cfg.out_dir) / "trace.csv", trace, prov);
    tdh::csv::write_spectrum(fs::path(cfg.out_dir) / "spectrum.csv", spectrum, prov);

    json report;
    report["provenance"] = provenance_json(cfg);
    report["board"] = cfg.board;
    report["bias_voltage_v"] = cfg.circuit.bias_voltage;
    report["startup"] = {{"oscillating", verdict.oscillating},
                         {"net_resistance_ohms", verdict.net_resistance_ohms}};
    if (verdict.resonant_frequency_hz)
        report["startup"]["resonant_frequency_hz"] = *verdict.resonant_frequency_hz;
    report["regime"] = {{"label", regime_name(regime.regime)},
                        {"envelope_mean_v", regime.envelope_mean},
                        {"envelope_variance_v2", regime.envelope_variance},
                        {"burst_rate_hz", regime.burst_rate_hz}};
    const double vj = tdh::circuit::dc_operating_point(cfg.circuit);
    const double p_dc = tdh::diode::dc_power(cfg.circuit.diode, vj);
    report["dc"] = {{"junction_voltage_v", vj}, {"power_w", p_dc}};

    json harmonics_doc;
    harmonics_doc["provenance"] = provenance_json(cfg);
    try {
        const auto [f1, p1] = tdh::spectral::find_fundamental(spectrum, cfg.sweep.noise_floor_dbm);
        const auto set =
            tdh::spectral::extract_harmonics(spectrum, f1, 0.02, cfg.sweep.noise_floor_dbm);
        report["fundamental"] = {{"frequency_hz", f1}, {"power_dbm", p1}};
        const double p_fund_w = std::pow(10.0, p1 / 10.0) * 1e-3;
        report["dc_rf_efficiency"] = tdh::spectral::dc_rf_efficiency(p_fund_w, p_dc);
        harmonics_doc["fundamental"] = {{"frequency_hz", set.fundamental_frequency_hz},
                                        {"power_dbm", set.fundamental_power_dbm}};
        auto& arr = harmonics_doc["harmonics"] = json::array();
        for (const auto& h : set.harmonics)
            arr.push_back({{"order", h.order},
                           {"frequency_hz", h.frequency_hz},
                           {"power_dbm", h.power_dbm}});
    } catch (const tdh::NoSignal&) {
        report["fundamental"] = nullptr;
        harmonics_doc["fundamental"] = nullptr;
        harmonics_doc["harmonics"] = json::array();
    }
    write_json(fs::path(cfg.out_dir) / "harmonics.json", harmonics_doc);
    write_json(fs::path(cfg.out_dir) / "report.json", report);
    std::printf("simulate: %s bias=%.4g V regime=%s -> %s\n", cfg.board.c_str(),
                cfg.circuit.bias_voltage, regime_name(regime.regime), cfg.out_dir.c_str());
    return 0;
}

int cmd_sweep(const CommonFlags& flags, double b_start, double b_stop, double b_step) {
    auto cfg = resolve(flags);
    if (b_start >= 0) cfg.sweep.bias_start_v = b_start;
    if (b_stop >= 0) cfg.sweep.bias_stop_v = b_stop;
    if (b_step > 0) cfg.sweep.bias_step_v = b_step;
    tdh::config::validate(cfg);
    fs::create_directories(cfg.out_dir);
    const std::string prov = provenance_line(cfg);

    auto map = tdh::signature::sweep_bias(cfg.circuit, cfg.sweep, cfg.board);
    map.provenance.config_hash = tdh::config::config_hash(cfg);

    tdh::signature::save_map(map, (fs::path(cfg.out_dir) / "map.json").string());
    tdh::csv::write_map_raster((fs::path(cfg.out_dir) / "colormap.csv").string(), map, prov);
    const auto track = tdh::signature::fundamental_track(map, cfg.sweep.noise_floor_dbm);
    tdh::csv::write_fundamental_track(
        (fs::path(cfg.out_dir) / "fundamental_vs_bias.csv").string(), track, prov);

    std::printf("sweep: %s rows=%zu faulted=%zu -> %s\n", cfg.board.c_str(), map.rows(),
                map.faulted_rows.size(), cfg.out_dir.c_str());
    return 0;
}

int cmd_linkbudget(const CommonFlags& flags) {
    auto cfg = resolve(flags);
    fs::create_directories(cfg.out_dir);
    const std::string prov = provenance_line(cfg);

    if (cfg.reverse_link.harmonics.empty()) {
        // Reference emission set: the strongest board's fundamental plus the
        // measured-order falloff used in the reverse-budget examples.
        cfg.reverse_link.harmonics = {{727.2e6, -11.80},
                                      {1454.4e6, -25.0},
                                      {2181.6e6, -42.0},
                                      {2908.8e6, -45.0}};
    }

    std::vector<double> distances;
    for (double d = 0.5; d <= 1024.0; d *= std::pow(2.0, 0.25)) distances.push_back(d);

    json summary;
    summary["provenance"] = provenance_json(cfg);
    auto& rev = summary["reverse"] = json::array();
    const auto ranges = tdh::linkbudget::reverse_range(cfg.reverse_link);
    for (std::size_t i = 0; i < ranges.size(); ++i) {
        rev.push_back({{"frequency_hz", ranges[i].frequency_hz},
                       {"power_dbm", cfg.reverse_link.harmonics[i].power_dbm},
                       {"max_distance_m", ranges[i].max_distance_m}});
        const auto curve = tdh::linkbudget::reverse_link_curve(
            cfg.reverse_link, cfg.reverse_link.harmonics[i], distances);
        char name[64];
        std::snprintf(name, sizeof name, "reverse_curve_h%zu.csv", i + 1);
        tdh::csv::write_link_curve((fs::path(cfg.out_dir) / name).string(), curve, prov);
    }

    const double fwd = tdh::linkbudget::forward_range(cfg.forward_link);
    summary["forward"] = {{"max_distance_m", fwd},
                          {"tag_consumption_w", cfg.forward_link.tag_consumption_w},
                          {"carrier_frequency_hz", cfg.forward_link.carrier_frequency_hz},
                          {"carrier_frequency_inferred", true}};
    tdh::csv::write_link_curve((fs::path(cfg.out_dir) / "forward_curve.csv").string(),
                               tdh::linkbudget::forward_link_curve(cfg.forward_link, distances),
                               prov);
    write_json(fs::path(cfg.out_dir) / "summary.json", summary);
    std::printf("linkbudget: forward %.3g m, fundamental reverse %.3g m -> %s\n", fwd,
                ranges.empty() ? 0.0 : ranges.front().max_distance_m, cfg.out_dir.c_str());
    return 0;
}

int cmd_fingerprint_enroll(const std::string& db_path, const std::string& id,
                           const std::vector<std::string>& map_paths, double noise_floor) {
    tdh::fingerprint::FingerprintDb db;
    if (fs::exists(db_path)) db = tdh::fingerprint::FingerprintDb::load(db_path);
    std::vector<tdh::signature::SignatureMap> sweeps;
    for (const auto& p : map_paths) sweeps.push_back(tdh::signature::load_map(p));
    const auto fp = tdh::fingerprint::enroll(db, id, sweeps, noise_floor);
    db.save(db_path);
    std::printf("enrolled %s from %zu sweeps (intra mean %.4f, dev %.4g, threshold %.4f)\n",
                id.c_str(), sweeps.size(), fp.intra_mean, fp.intra_deviation, fp.threshold());
    return 0;
}

int cmd_fingerprint_identify(const std::string& db_path, const std::string& map_path,
                             const std::string& out_path, double noise_floor) {
    const auto db = tdh::fingerprint::FingerprintDb::load(db_path);
    const auto query = tdh::signature::load_map(map_path);
    const auto report = tdh::fingerprint::identify(db, query, noise_floor);

    json j;
    j["query_id"] = report.query_id;
    j["decision"] = report.known ? "known" : "unknown";
    if (report.known) j["matched_id"] = report.matched_id;
    j["threshold_used"] = report.threshold_used;
    auto& arr = j["ranked_scores"] = json::array();
    for (const auto& r : report.ranked)
        arr.push_back({{"board_id", r.board_id}, {"score", r.score}});
    if (!out_path.empty()) write_json(out_path, j);
    std::printf("identify: %s (top %s %.4f, threshold %.4f)\n",
                report.known ? report.matched_id.c_str() : "UNKNOWN",
                report.ranked.front().board_id.c_str(), report.ranked.front().score,
                report.threshold_used);
    return 0;
}

int cmd_fingerprint_tamper(const std::string& db_path, const std::string& id,
                           const std::string& map_path, double noise_floor) {
    const auto db = tdh::fingerprint::FingerprintDb::load(db_path);
    const auto* fp = db.find(id);
    if (!fp) throw tdh::InvalidInput("board_id not enrolled: " + id);
    const auto after = tdh::signature::load_map(map_path);
    const double delta = tdh::fingerprint::tamper_delta(*fp, after, noise_floor);
    const bool flagged = delta > 3.0 * fp->intra_deviation + (1.0 - fp->intra_mean);
    std::printf("tamper delta %.6f (intra mean %.4f dev %.4g) -> %s\n", delta, fp->intra_mean,
                fp->intra_deviation, flagged ? "CHANGED" : "consistent");
    return flagged ? 3 : 0;
}

int cmd_export(const CommonFlags& flags, const std::string& map_path, const std::string& what,
               const std::string& out_path) {
    auto cfg = resolve(flags);
    const std::string prov = provenance_line(cfg);
    if (what == "ivcurve") {
        tdh::diode::IvCurve curve;
        for (int i = 0; i <= 400; ++i) {
            const double v = i * 1e-3;
            curve.points.emplace_back(v, tdh::diode::iv_current(cfg.circuit.diode, v));
        }
        tdh::csv::write_iv_curve(out_path, curve, prov);
    } else if (what == "raster") {
        const auto map = tdh::signature::load_map(map_path);
        tdh::csv::write_map_raster(out_path, map, prov);
    } else if (what == "features") {
        const auto map = tdh::signature::load_map(map_path);
        const auto features =
            tdh::signature::feature_vector(map, cfg.sweep.noise_floor_dbm);
        std::ofstream out(out_path);
        if (!out) throw tdh::Error("cannot write " + out_path);
        out << "# " << prov << "\nindex,value\n";
        for (std::size_t i = 0; i < features.size(); ++i)
            out << i << "," << tdh::csv::format_double(features[i]) << "\n";
    } else {
        throw tdh::InvalidInput("unknown export target: " + what +
                                " (expected ivcurve|raster|features)");
    }
    std::printf("export %s -> %s\n", what.c_str(), out_path.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tunnel-diode harmonic signature toolkit"};
    app.require_subcommand(1);

    CommonFlags sim_flags, sweep_flags, link_flags, export_flags;

    auto* simulate = app.add_subcommand("simulate", "Transient + spectrum at one bias");
    add_common(simulate, sim_flags);

    auto* sweep = app.add_subcommand("sweep", "Bias sweep into a signature map");
    add_common(sweep, sweep_flags);
    double b_start = -1, b_stop = -1, b_step = -1;
    sweep->add_option("--bias-start", b_start, "Sweep start (V)");
    sweep->add_option("--bias-stop", b_stop, "Sweep stop (V)");
    sweep->add_option("--bias-step", b_step, "Sweep step (V)");

    auto* fingerprint = app.add_subcommand("fingerprint", "Enroll / identify / tamper-check");
    fingerprint->require_subcommand(1);
    std::string db_path = "fingerprints.json", fp_id, fp_out;
    std::vector<std::string> fp_maps;
    double noise_floor = -80.0;

    auto* enroll = fingerprint->add_subcommand("enroll", "Enroll a board from sweeps");
    enroll->add_option("--db", db_path, "Fingerprint database path");
    enroll->add_option("--id", fp_id, "Board id")->required();
    enroll->add_option("--maps", fp_maps, "Signature map files (>= 3)")->required();
    enroll->add_option("--noise-floor", noise_floor, "Clip floor (dBm)");

    auto* identify = fingerprint->add_subcommand("identify", "Identify a query map");
    identify->add_option("--db", db_path, "Fingerprint database path");
    identify->add_option("--map", fp_maps, "Query map file")->required();
    identify->add_option("--out", fp_out, "Write the ranked report here");
    identify->add_option("--noise-floor", noise_floor, "Clip floor (dBm)");

    auto* tamper = fingerprint->add_subcommand("tamper", "Compare a map to an enrolled board");
    tamper->add_option("--db", db_path, "Fingerprint database path");
    tamper->add_option("--id", fp_id, "Enrolled board id")->required();
    tamper->add_option("--map", fp_maps, "Map to compare")->required();
    tamper->add_option("--noise-floor", noise_floor, "Clip floor (dBm)");

    auto* linkbudget = app.add_subcommand("linkbudget", "Reverse/forward link budgets");
    add_common(linkbudget, link_flags);

    auto* exporter = app.add_subcommand("export", "Export data products as CSV");
    add_common(exporter, export_flags);
    std::string export_what = "ivcurve", export_map, export_out = "export.csv";
    exporter->add_option("--what", export_what, "ivcurve | raster | features");
    exporter->add_option("--map", export_map, "Signature map (for raster/features)");
    exporter->add_option("--file", export_out, "Output file");

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) return cmd_simulate(sim_flags);
        if (sweep->parsed()) return cmd_sweep(sweep_flags, b_start, b_stop, b_step);
        if (linkbudget->parsed()) return cmd_linkbudget(link_flags);
        if (exporter->parsed())
            return cmd_export(export_flags, export_map, export_what, export_out);
        if (fingerprint->parsed()) {
            if (enroll->parsed())
                return cmd_fingerprint_enroll(db_path, fp_id, fp_maps, noise_floor);
            if (identify->parsed())
                return cmd_fingerprint_identify(db_path, fp_maps.at(0), fp_out, noise_floor);
            if (tamper->parsed())
                return cmd_fingerprint_tamper(db_path, fp_id, fp_maps.at(0), noise_floor);
        }
    } catch (const tdh::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const tdh::InvalidInput& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 2;
    } catch (const tdh::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
