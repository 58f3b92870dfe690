#include "tdh/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "tdh/errors.hpp"
#include "tdh/presets.hpp"
#include "tdh/spectral.hpp"

namespace tdh::config {

namespace {

// ---------------------------------------------------------------------------
// TOML subset -> JSON
// ---------------------------------------------------------------------------

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

// Strip a trailing comment, respecting quoted strings.
std::string strip_comment(const std::string& s) {
    bool in_str = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"') in_str = !in_str;
        if (s[i] == '#' && !in_str) return s.substr(0, i);
    }
    return s;
}

nlohmann::json parse_scalar(const std::string& raw, const std::string& where, int line) {
    const std::string v = trim(raw);
    if (v.empty()) throw ConfigError(where, line, "empty value");
    if (v.front() == '"') {
        if (v.size() < 2 || v.back() != '"')
            throw ConfigError(where, line, "unterminated string");
        return v.substr(1, v.size() - 2);
    }
    if (v == "true") return true;
    if (v == "false") return false;
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError(where, line, "cannot parse value '" + v + "'");
    }
}

nlohmann::json parse_value(const std::string& raw, const std::string& where, int line) {
    const std::string v = trim(raw);
    if (!v.empty() && v.front() == '[') {
        if (v.back() != ']') throw ConfigError(where, line, "unterminated array");
        nlohmann::json arr = nlohmann::json::array();
        std::string body = v.substr(1, v.size() - 2);
        std::string cell;
        int depth = 0;
        bool in_str = false;
        for (char ch : body) {
            if (ch == '"') in_str = !in_str;
            if (!in_str && ch == '[') ++depth;
            if (!in_str && ch == ']') --depth;
            if (ch == ',' && depth == 0 && !in_str) {
                if (!trim(cell).empty()) arr.push_back(parse_value(cell, where, line));
                cell.clear();
            } else {
                cell += ch;
            }
        }
        if (!trim(cell).empty()) arr.push_back(parse_value(cell, where, line));
        return arr;
    }
    return parse_scalar(v, where, line);
}

}  // namespace

nlohmann::json toml_subset_to_json(const std::string& text, const std::string& source_name) {
    nlohmann::json doc = nlohmann::json::object();
    nlohmann::json* section = &doc;
    std::string section_name;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(strip_comment(line));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(source_name, line_no, "malformed section header");
            section_name = trim(line.substr(1, line.size() - 2));
            if (section_name.empty())
                throw ConfigError(source_name, line_no, "empty section name");
            section = &doc[section_name];
            if (!section->is_object()) *section = nlohmann::json::object();
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(source_name, line_no, "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError(source_name, line_no, "empty key");
        const std::string where =
            section_name.empty() ? key : section_name + "." + key;
        (*section)[key] = parse_value(line.substr(eq + 1), where, line_no);
    }
    return doc;
}

namespace {

// ---------------------------------------------------------------------------
// Schema application
// ---------------------------------------------------------------------------

double as_number(const nlohmann::json& v, const std::string& where) {
    if (!v.is_number()) throw ConfigError(where, 0, "expected a number");
    return v.get<double>();
}

std::string as_string(const nlohmann::json& v, const std::string& where) {
    if (!v.is_string()) throw ConfigError(where, 0, "expected a string");
    return v.get<std::string>();
}

template <typename F>
void for_each_key(const nlohmann::json& obj, const std::string& section, F&& handler) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        const std::string where = section.empty() ? it.key() : section + "." + it.key();
        if (!handler(it.key(), it.value(), where))
            throw ConfigError(where, 0, "unknown key");
    }
}

void apply_diode(diode::DiodeParams& d, const nlohmann::json& obj, const std::string& section) {
    for_each_key(obj, section, [&](const std::string& k, const nlohmann::json& v,
                                   const std::string& where) {
        if (k == "peak_current") d.peak_current = as_number(v, where);
        else if (k == "peak_voltage") d.peak_voltage = as_number(v, where);
        else if (k == "valley_current") d.valley_current = as_number(v, where);
        else if (k == "valley_voltage") d.valley_voltage = as_number(v, where);
        else if (k == "saturation_current") d.saturation_current = as_number(v, where);
        else if (k == "thermal_voltage") d.thermal_voltage = as_number(v, where);
        else if (k == "excess_coefficient") d.excess_coefficient = as_number(v, where);
        else if (k == "junction_capacitance") d.junction_capacitance = as_number(v, where);
        else if (k == "capacitance_voltage_coeff") d.capacitance_voltage_coeff = as_number(v, where);
        else return false;
        return true;
    });
}

void apply_circuit(circuit::OscillatorCircuit& c, const nlohmann::json& obj,
                   const std::string& section) {
    for_each_key(obj, section, [&](const std::string& k, const nlohmann::json& v,
                                   const std::string& where) {
        if (k == "choke_inductance") c.choke_inductance = as_number(v, where);
        else if (k == "smoothing_capacitance") c.smoothing_capacitance = as_number(v, where);
        else if (k == "dc_block_capacitance") c.dc_block_capacitance = as_number(v, where);
        else if (k == "load_resistance") c.load_resistance = as_number(v, where);
        else if (k == "lead_inductance") c.lead_inductance = as_number(v, where);
        else if (k == "series_resistance") c.series_resistance = as_number(v, where);
        else if (k == "bias_voltage") c.bias_voltage = as_number(v, where);
        else return false;
        return true;
    });
}

void apply_sweep(signature::SweepConfig& s, const nlohmann::json& obj,
                 const std::string& section) {
    for_each_key(obj, section, [&](const std::string& k, const nlohmann::json& v,
                                   const std::string& where) {
        if (k == "bias_start") s.bias_start_v = as_number(v, where);
        else if (k == "bias_stop") s.bias_stop_v = as_number(v, where);
        else if (k == "bias_step") s.bias_step_v = as_number(v, where);
        else if (k == "span_start") s.span_hz.first = as_number(v, where);
        else if (k == "span_stop") s.span_hz.second = as_number(v, where);
        else if (k == "points_per_spectrum") s.points_per_spectrum = static_cast<int>(as_number(v, where));
        else if (k == "window") s.window = spectral::window_from_name(as_string(v, where));
        else if (k == "noise_floor_dbm") s.noise_floor_dbm = as_number(v, where);
        else if (k == "rbw_hz") s.rbw_hz = as_number(v, where);
        else if (k == "trace_samples") s.trace_samples = static_cast<std::size_t>(as_number(v, where));
        else if (k == "max_trace_samples") s.max_trace_samples = static_cast<std::size_t>(as_number(v, where));
        else if (k == "adaptive_duration") s.adaptive_duration = v.get<bool>();
        else if (k == "repeatability_drift") s.repeatability_drift = as_number(v, where);
        else if (k == "row_jitter") s.row_jitter = as_number(v, where);
        else if (k == "workers") s.workers = static_cast<int>(as_number(v, where));
        else return false;
        return true;
    });
}

void apply_link(RunConfig& cfg, const nlohmann::json& obj, const std::string& section) {
    for_each_key(obj, section, [&](const std::string& k, const nlohmann::json& v,
                                   const std::string& where) {
        if (k == "tx_power_w") cfg.forward_link.tx_power_w = as_number(v, where);
        else if (k == "tag_gain_dbi") {
            cfg.forward_link.tag_antenna_gain_dbi = as_number(v, where);
            cfg.reverse_link.tag_antenna_gain_dbi = as_number(v, where);
        } else if (k == "reader_gain_dbi") {
            cfg.forward_link.tx_antenna_gain_dbi = as_number(v, where);
            cfg.reverse_link.reader_antenna_gain_dbi = as_number(v, where);
        } else if (k == "reader_sensitivity_dbm") {
            cfg.reverse_link.reader_sensitivity_dbm = as_number(v, where);
        } else if (k == "rectification_efficiency") {
            cfg.forward_link.rectification_efficiency = as_number(v, where);
        } else if (k == "tag_consumption_w") {
            cfg.forward_link.tag_consumption_w = as_number(v, where);
        } else if (k == "carrier_frequency_hz") {
            cfg.forward_link.carrier_frequency_hz = as_number(v, where);
        } else if (k == "harmonics") {
            if (!v.is_array()) throw ConfigError(where, 0, "expected array of [hz, dbm] pairs");
            cfg.reverse_link.harmonics.clear();
            for (const auto& tone : v) {
                if (!tone.is_array() || tone.size() != 2)
                    throw ConfigError(where, 0, "each harmonic must be [frequency_hz, power_dbm]");
                cfg.reverse_link.harmonics.push_back(
                    {tone[0].get<double>(), tone[1].get<double>()});
            }
        } else if (k == "tag_gain_mask") {
            if (!v.is_array()) throw ConfigError(where, 0, "expected array of [hz, dbi] pairs");
            cfg.reverse_link.tag_gain_mask.points.clear();
            for (const auto& pt : v) {
                if (!pt.is_array() || pt.size() != 2)
                    throw ConfigError(where, 0, "each mask point must be [frequency_hz, gain_dbi]");
                cfg.reverse_link.tag_gain_mask.points.emplace_back(pt[0].get<double>(),
                                                                   pt[1].get<double>());
            }
        } else {
            return false;
        }
        return true;
    });
}

}  // namespace

void apply_json(RunConfig& cfg, const nlohmann::json& doc, const std::string& source_name) {
    if (!doc.is_object()) throw ConfigError(source_name, 0, "config root must be a table");

    // [run] first: a board preset resets the circuit before overrides land.
    if (doc.contains("run")) {
        const auto& run = doc.at("run");
        for_each_key(run, "run", [&](const std::string& k, const nlohmann::json& v,
                                     const std::string& where) {
            if (k == "board") {
                cfg.board = as_string(v, where);
                if (cfg.board != "custom") cfg.circuit = presets::board(cfg.board);
            } else if (k == "seed") {
                cfg.seed = static_cast<std::uint64_t>(as_number(v, where));
            } else if (k == "out_dir") {
                cfg.out_dir = as_string(v, where);
            } else if (k == "duration_s") {
                cfg.simulate_duration_s = as_number(v, where);
            } else if (k == "rbw_hz") {
                cfg.rbw_hz = as_number(v, where);
            } else {
                return false;
            }
            return true;
        });
    }
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        const std::string& section = it.key();
        if (section == "run") continue;
        if (section == "diode") apply_diode(cfg.circuit.diode, it.value(), section);
        else if (section == "circuit") apply_circuit(cfg.circuit, it.value(), section);
        else if (section == "sweep") apply_sweep(cfg.sweep, it.value(), section);
        else if (section == "link") apply_link(cfg, it.value(), section);
        else throw ConfigError(section, 0, "unknown section");
    }
    cfg.sweep.seed = cfg.seed;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, 0, "cannot open config file");
    std::stringstream buf;
    buf << in.rdbuf();

    nlohmann::json doc;
    if (path.size() > 5 && path.substr(path.size() - 5) == ".json") {
        try {
            doc = nlohmann::json::parse(buf.str());
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError(path, static_cast<int>(e.byte), std::string("JSON: ") + e.what());
        }
    } else {
        doc = toml_subset_to_json(buf.str(), path);
    }

    RunConfig cfg;
    cfg.circuit = presets::board(cfg.board);
    apply_json(cfg, doc, path);
    return cfg;
}

nlohmann::json to_json(const RunConfig& cfg) {
    const auto& d = cfg.circuit.diode;
    const auto& c = cfg.circuit;
    const auto& s = cfg.sweep;
    // Canonical form: numerically relevant fields only (out_dir is where the
    // results land, not what they are), with nlohmann's sorted object keys.
    nlohmann::json j;
    j["run"] = {{"board", cfg.board},
                {"seed", cfg.seed},
                {"duration_s", cfg.simulate_duration_s},
                {"rbw_hz", cfg.rbw_hz}};
    j["diode"] = {{"peak_current", d.peak_current},
                  {"peak_voltage", d.peak_voltage},
                  {"valley_current", d.valley_current},
                  {"valley_voltage", d.valley_voltage},
                  {"saturation_current", d.saturation_current},
                  {"thermal_voltage", d.thermal_voltage},
                  {"excess_coefficient", d.excess_coefficient},
                  {"junction_capacitance", d.junction_capacitance},
                  {"capacitance_voltage_coeff", d.capacitance_voltage_coeff}};
    j["circuit"] = {{"choke_inductance", c.choke_inductance},
                    {"smoothing_capacitance", c.smoothing_capacitance},
                    {"dc_block_capacitance", c.dc_block_capacitance},
                    {"load_resistance", c.load_resistance},
                    {"lead_inductance", c.lead_inductance},
                    {"series_resistance", c.series_resistance},
                    {"bias_voltage", c.bias_voltage}};
    j["sweep"] = {{"bias_start", s.bias_start_v},
                  {"bias_stop", s.bias_stop_v},
                  {"bias_step", s.bias_step_v},
                  {"span_start", s.span_hz.first},
                  {"span_stop", s.span_hz.second},
                  {"points_per_spectrum", s.points_per_spectrum},
                  {"window", spectral::window_name(s.window)},
                  {"noise_floor_dbm", s.noise_floor_dbm},
                  {"rbw_hz", s.rbw_hz},
                  {"trace_samples", s.trace_samples},
                  {"max_trace_samples", s.max_trace_samples},
                  {"adaptive_duration", s.adaptive_duration},
                  {"repeatability_drift", s.repeatability_drift},
                  {"row_jitter", s.row_jitter}};
    nlohmann::json harmonics = nlohmann::json::array();
    for (const auto& h : cfg.reverse_link.harmonics)
        harmonics.push_back({h.frequency_hz, h.power_dbm});
    nlohmann::json mask = nlohmann::json::array();
    for (const auto& [f, g] : cfg.reverse_link.tag_gain_mask.points) mask.push_back({f, g});
    j["link"] = {{"tx_power_w", cfg.forward_link.tx_power_w},
                 {"tag_gain_dbi", cfg.forward_link.tag_antenna_gain_dbi},
                 {"reader_gain_dbi", cfg.reverse_link.reader_antenna_gain_dbi},
                 {"reader_sensitivity_dbm", cfg.reverse_link.reader_sensitivity_dbm},
                 {"rectification_efficiency", cfg.forward_link.rectification_efficiency},
                 {"tag_consumption_w", cfg.forward_link.tag_consumption_w},
                 {"carrier_frequency_hz", cfg.forward_link.carrier_frequency_hz},
                 {"harmonics", harmonics},
                 {"tag_gain_mask", mask}};
    return j;
}

std::string config_hash(const RunConfig& cfg) {
    const std::string canonical = to_json(cfg).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : canonical) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void validate(const RunConfig& cfg) {
    const auto& c = cfg.circuit;
    if (!(c.bias_voltage >= 0.0 && c.bias_voltage <= 0.4))
        throw ConfigError("circuit.bias_voltage", 0,
                          "value " + std::to_string(c.bias_voltage) + " outside [0, 0.4] V");
    if (!c.diode.valid()) throw ConfigError("diode", 0, "invalid diode parameters");
    if (!c.valid()) throw ConfigError("circuit", 0, "invalid circuit element values");
    if (!(cfg.sweep.bias_step_v > 0.0))
        throw ConfigError("sweep.bias_step", 0, "must be > 0");
    if (cfg.sweep.bias_stop_v < cfg.sweep.bias_start_v)
        throw ConfigError("sweep.bias_stop", 0, "must be >= bias_start");
    if (!(cfg.sweep.span_hz.second > cfg.sweep.span_hz.first && cfg.sweep.span_hz.first > 0))
        throw ConfigError("sweep.span_stop", 0, "span must satisfy 0 < start < stop");
    if (cfg.sweep.trace_samples < (1u << 14))
        throw ConfigError("sweep.trace_samples", 0, "must be >= 16384");
}

}  // namespace tdh::config
