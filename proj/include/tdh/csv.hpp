#pragma once

#include <string>
#include <vector>

#include "tdh/circuit.hpp"
#include "tdh/diode.hpp"
#include "tdh/link_budget.hpp"
#include "tdh/signature.hpp"
#include "tdh/spectral.hpp"

namespace tdh::csv {

// Shortest decimal form that round-trips a double exactly.
std::string format_double(double v);

// All writers emit an optional leading "# key=value ..." provenance comment,
// then the exact column header.  Readers skip leading '#' lines and validate
// the header.

void write_iv_curve(const std::string& path, const diode::IvCurve& curve,
                    const std::string& provenance = "");
diode::IvCurve read_iv_curve(const std::string& path);

void write_trace(const std::string& path, const circuit::TransientTrace& trace,
                 const std::string& provenance = "");

void write_spectrum(const std::string& path, const spectral::Spectrum& spectrum,
                    const std::string& provenance = "");

void write_link_curve(const std::string& path, const std::vector<linkbudget::LinkPoint>& curve,
                      const std::string& provenance = "");

// bias_V,frequency_Hz,power_dBm triplets, row-major over the map.
void write_map_raster(const std::string& path, const signature::SignatureMap& map,
                      const std::string& provenance = "");

// bias_V,fundamental_Hz,power_dBm for every row with signal.
void write_fundamental_track(const std::string& path,
                             const std::vector<signature::FundamentalPoint>& track,
                             const std::string& provenance = "");

}  // namespace tdh::csv
