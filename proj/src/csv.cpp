#include "tdh/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "tdh/errors.hpp"

namespace tdh::csv {

std::string format_double(double v) {
    char buf[40];
    // %.17g always round-trips; prefer the shortest representation that does.
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        double back = 0.0;
        std::sscanf(buf, "%lf", &back);
        if (back == v) return buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    return out;
}

void write_header(std::ofstream& out, const std::string& provenance, const char* header) {
    if (!provenance.empty()) out << "# " << provenance << "\n";
    out << header << "\n";
}

// Reads a CSV, skipping leading comment lines and validating the header.
std::vector<std::vector<double>> read_rows(const std::string& path, const std::string& header,
                                           std::size_t n_cols) {
    std::ifstream in(path);
    if (!in) throw SchemaError(path, "cannot open file");
    std::string line;
    int line_no = 0;
    bool saw_header = false;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (!saw_header) {
            if (line != header)
                throw SchemaError(path + ":" + std::to_string(line_no),
                                  "expected header '" + header + "', got '" + line + "'");
            saw_header = true;
            continue;
        }
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw SchemaError(path + ":" + std::to_string(line_no),
                                  "not a number: '" + cell + "'");
            }
        }
        if (row.size() != n_cols)
            throw SchemaError(path + ":" + std::to_string(line_no),
                              "expected " + std::to_string(n_cols) + " columns");
        rows.push_back(std::move(row));
    }
    if (!saw_header) throw SchemaError(path, "missing header line");
    return rows;
}

}  // namespace

void write_iv_curve(const std::string& path, const diode::IvCurve& curve,
                    const std::string& provenance) {
    auto out = open_out(path);
    write_header(out, provenance, "voltage_V,current_A");
    for (const auto& [v, i] : curve.points)
        out << format_double(v) << "," << format_double(i) << "\n";
}

diode::IvCurve read_iv_curve(const std::string& path) {
    diode::IvCurve curve;
    for (const auto& row : read_rows(path, "voltage_V,current_A", 2)) {
        if (!std::isfinite(row[0]) || !std::isfinite(row[1]))
            throw SchemaError(path, "non-finite IV sample");
        curve.points.emplace_back(row[0], row[1]);
    }
    for (std::size_t i = 1; i < curve.points.size(); ++i)
        if (curve.points[i].first <= curve.points[i - 1].first)
            throw SchemaError(path, "voltages must be strictly increasing");
    return curve;
}

void write_trace(const std::string& path, const circuit::TransientTrace& trace,
                 const std::string& provenance) {
    auto out = open_out(path);
    write_header(out, provenance, "time_s,voltage_V");
    for (std::size_t i = 0; i < trace.load_voltage.size(); ++i)
        out << format_double(i * trace.sample_interval) << ","
            << format_double(trace.load_voltage[i]) << "\n";
}

void write_spectrum(const std::string& path, const spectral::Spectrum& s,
                    const std::string& provenance) {
    auto out = open_out(path);
    write_header(out, provenance, "frequency_Hz,power_dBm");
    for (std::size_t i = 0; i < s.frequency_hz.size(); ++i)
        out << format_double(s.frequency_hz[i]) << "," << format_double(s.power_dbm[i]) << "\n";
}

void write_link_curve(const std::string& path, const std::vector<linkbudget::LinkPoint>& curve,
                      const std::string& provenance) {
    auto out = open_out(path);
    write_header(out, provenance, "distance_m,received_dBm,harvested_W");
    for (const auto& p : curve)
        out << format_double(p.distance_m) << "," << format_double(p.received_dbm) << ","
            << format_double(p.harvested_w) << "\n";
}

void write_map_raster(const std::string& path, const signature::SignatureMap& map,
                      const std::string& provenance) {
    auto out = open_out(path);
    write_header(out, provenance, "bias_V,frequency_Hz,power_dBm");
    for (std::size_t r = 0; r < map.rows(); ++r)
        for (std::size_t c = 0; c < map.cols(); ++c)
            out << format_double(map.bias_v[r]) << "," << format_double(map.frequency_hz[c])
                << "," << format_double(map.at(r, c)) << "\n";
}

void write_fundamental_track(const std::string& path,
                             const std::vector<signature::FundamentalPoint>& track,
                             const std::string& provenance) {
    auto out = open_out(path);
    write_header(out, provenance, "bias_V,fundamental_Hz,power_dBm");
    for (const auto& p : track)
        out << format_double(p.bias_v) << "," << format_double(p.frequency_hz) << ","
            << format_double(p.power_dbm) << "\n";
}

}  // namespace tdh::csv
