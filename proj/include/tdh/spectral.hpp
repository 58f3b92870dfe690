#pragma once

#include <string>
#include <utility>
#include <vector>

#include "tdh/circuit.hpp"

namespace tdh::spectral {

enum class Window { Rectangular, Hann, BlackmanHarris };

Window window_from_name(const std::string& name);
const char* window_name(Window w);

// Power spectrum of the steady-state segment of a transient trace.
// Bin powers carry coherent-gain correction, so the peak bin of a
// bin-centered sinusoid of amplitude A into `load` reads
// 10*log10((A^2/(2*load))/1mW) exactly.  `enbw_bins` is the window's
// equivalent noise bandwidth in bins; total band power must be divided by it
// (band_power_watts does).
struct Spectrum {
    std::vector<double> frequency_hz;  // uniform, strictly increasing
    std::vector<double> power_dbm;     // into load_ohms
    double bin_width_hz = 0.0;
    double resolution_bandwidth_hz = 0.0;  // ENBW of the window (or RBW applied)
    std::pair<double, double> span_hz{50e3, 3e9};
    double enbw_bins = 1.0;
    double load_ohms = 50.0;
    double dc_power_dbm = -300.0;  // reported separately, excluded from bins
};

struct HarmonicPeak {
    int order = 0;  // >= 2
    double frequency_hz = 0.0;
    double power_dbm = 0.0;
};

struct HarmonicSet {
    double fundamental_frequency_hz = 0.0;
    double fundamental_power_dbm = 0.0;
    std::vector<HarmonicPeak> harmonics;  // strictly increasing order
};

struct SpectrumOptions {
    Window window = Window::Hann;
    std::pair<double, double> span_hz{50e3, 3e9};
};

// Analyze the final 25% of the trace (length floored to a power of two).
// Throws TraceTooShort below 2^14 samples.
Spectrum compute_spectrum(const circuit::TransientTrace& trace, Window window, double load_ohms,
                          std::pair<double, double> span_hz = {50e3, 3e9});

// Moving-RMS smoothing to emulate an instrument resolution bandwidth.
Spectrum apply_rbw(const Spectrum& s, double rbw_hz);

// Strongest non-DC bin (frequencies below 1 MHz are treated as bias ripple
// and skipped).  Throws NoSignal if nothing exceeds noise_floor_dbm.
std::pair<double, double> find_fundamental(const Spectrum& s, double noise_floor_dbm);

// Integer harmonics of `fundamental_hz`: for each order k >= 2 whose window
// [k*f*(1-tol), k*f*(1+tol)] intersects the span, the strongest bin above the
// noise floor.  Missing orders are omitted.
HarmonicSet extract_harmonics(const Spectrum& s, double fundamental_hz, double rel_tolerance,
                              double noise_floor_dbm);

// Total band power in watts (DC excluded), ENBW-corrected so it can be
// compared against the time-domain variance over the load.
double band_power_watts(const Spectrum& s);

// Eq.-style ratio of peak single-frequency output power to DC power drawn.
double dc_rf_efficiency(double peak_output_power_w, double dc_power_w);

// max(fundamental) - min(fundamental) over a bias sweep.
double tunable_range_hz(const std::vector<std::pair<double, double>>& bias_fundamental);

// Window coefficients and their coherent gain / ENBW (exposed for tests).
std::vector<double> make_window(Window w, std::size_t n);

}  // namespace tdh::spectral
