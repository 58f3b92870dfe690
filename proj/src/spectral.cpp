#include "tdh/spectral.hpp"

#include <algorithm>
#include <cmath>

#include "tdh/errors.hpp"
#include "tdh/fft.hpp"
#include "tdh/kernels.hpp"

namespace tdh::spectral {

namespace {
constexpr double kTwoPi = 6.28318530717958647692529;
constexpr double kDcExclusionHz = 1e6;   // bias ripple lives well below this
constexpr double kPowerFloorW = 1e-30;   // keeps dBm finite on silent bins
}  // namespace

Window window_from_name(const std::string& name) {
    if (name == "rectangular" || name == "rect") return Window::Rectangular;
    if (name == "hann") return Window::Hann;
    if (name == "blackmanharris" || name == "blackman-harris") return Window::BlackmanHarris;
    throw InvalidInput("unknown window: " + name);
}

const char* window_name(Window w) {
    switch (w) {
        case Window::Rectangular: return "rectangular";
        case Window::Hann: return "hann";
        case Window::BlackmanHarris: return "blackmanharris";
    }
    return "?";
}

std::vector<double> make_window(Window w, std::size_t n) {
    std::vector<double> win(n, 1.0);
    switch (w) {
        case Window::Rectangular:
            break;
        case Window::Hann:
            for (std::size_t i = 0; i < n; ++i)
                win[i] = 0.5 - 0.5 * std::cos(kTwoPi * i / static_cast<double>(n));
            break;
        case Window::BlackmanHarris:
            for (std::size_t i = 0; i < n; ++i) {
                const double t = kTwoPi * i / static_cast<double>(n);
                win[i] = 0.35875 - 0.48829 * std::cos(t) + 0.14128 * std::cos(2.0 * t) -
                         0.01168 * std::cos(3.0 * t);
            }
            break;
    }
    return win;
}

Spectrum compute_spectrum(const circuit::TransientTrace& trace, Window window, double load_ohms,
                          std::pair<double, double> span_hz) {
    const std::size_t n = trace.load_voltage.size();
    if (n < (1u << 14)) throw TraceTooShort("compute_spectrum needs >= 2^14 samples");
    if (!(load_ohms > 0.0)) throw InvalidInput("load must be > 0");

    // Steady-state segment: final 25%, floored to a power of two for the FFT.
    const std::size_t seg = fft::floor_pow2(n / 4);
    const double* x0 = trace.load_voltage.data() + (n - seg);

    std::vector<double> win = make_window(window, seg);
    double win_sum = 0.0, win_sq = 0.0;
    for (double v : win) {
        win_sum += v;
        win_sq += v * v;
    }
    const double coherent_gain = win_sum / static_cast<double>(seg);
    const double enbw_bins = static_cast<double>(seg) * win_sq / (win_sum * win_sum);

    std::vector<double> windowed(seg);
    kernels::multiply(std::span<const double>(x0, seg), win, windowed);
    auto bins = fft::forward_real(windowed);

    // One-sided amplitude: A_k = 2|X_k| / (CG * N); power = A^2 / (2*load).
    const double amp_scale = 2.0 / (coherent_gain * static_cast<double>(seg));
    const double power_scale = amp_scale * amp_scale / (2.0 * load_ohms);

    const double fs = 1.0 / trace.sample_interval;
    const double df = fs / static_cast<double>(seg);

    Spectrum s;
    s.bin_width_hz = df;
    s.resolution_bandwidth_hz = enbw_bins * df;
    s.span_hz = span_hz;
    s.enbw_bins = enbw_bins;
    s.load_ohms = load_ohms;

    const double dc_w =
        std::norm(bins[0]) / (win_sum * win_sum) / load_ohms;  // no one-sided doubling
    s.dc_power_dbm = 10.0 * std::log10(std::max(dc_w, kPowerFloorW) / 1e-3);

    std::size_t k_min = static_cast<std::size_t>(std::ceil(span_hz.first / df));
    if (k_min < 1) k_min = 1;
    std::size_t k_max = static_cast<std::size_t>(std::floor(span_hz.second / df));
    if (k_max > seg / 2 - 1) k_max = seg / 2 - 1;
    if (k_min > k_max) throw InvalidInput("span does not overlap the spectrum grid");

    const std::size_t count = k_max - k_min + 1;
    std::vector<double> lin(count);
    kernels::complex_power(std::span<const std::complex<double>>(bins.data() + k_min, count),
                           power_scale, lin);

    s.frequency_hz.resize(count);
    s.power_dbm.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        s.frequency_hz[i] = static_cast<double>(k_min + i) * df;
        s.power_dbm[i] = 10.0 * std::log10(std::max(lin[i], kPowerFloorW) / 1e-3);
    }
    return s;
}

Spectrum apply_rbw(const Spectrum& s, double rbw_hz) {
    if (!(rbw_hz > 0.0)) throw InvalidInput("rbw must be > 0");
    const std::size_t w = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(rbw_hz / s.bin_width_hz)));
    if (w <= 1) return s;

    const std::size_t n = s.power_dbm.size();
    std::vector<double> lin(n);
    for (std::size_t i = 0; i < n; ++i) lin[i] = std::pow(10.0, s.power_dbm[i] / 10.0);

    // Integrate power across the RBW window (ENBW-normalized), the way an
    // instrument reads it: a CW tone shows its full power, broadband content
    // shows density x RBW.  Bins become correlated, so the result is for
    // display and peak reading; run totals on the raw spectrum.
    Spectrum out = s;
    out.resolution_bandwidth_hz = w * s.bin_width_hz;
    out.enbw_bins = s.enbw_bins * static_cast<double>(w);
    const std::size_t half = w / 2;
    double acc = 0.0;
    std::size_t lo = 0, hi = 0;  // running window [lo, hi)
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t want_lo = i > half ? i - half : 0;
        const std::size_t want_hi = std::min(n, i + half + 1);
        while (hi < want_hi) acc += lin[hi++];
        while (lo < want_lo) acc -= lin[lo++];
        out.power_dbm[i] = 10.0 * std::log10(std::max(acc / s.enbw_bins, 1e-300));
    }
    return out;
}

std::pair<double, double> find_fundamental(const Spectrum& s, double noise_floor_dbm) {
    if (s.power_dbm.empty()) throw InvalidInput("empty spectrum");
    double best = -1e300;
    std::size_t best_i = 0;
    bool found = false;
    for (std::size_t i = 0; i < s.power_dbm.size(); ++i) {
        if (s.frequency_hz[i] < kDcExclusionHz) continue;
        if (s.power_dbm[i] > best) {
            best = s.power_dbm[i];
            best_i = i;
            found = true;
        }
    }
    if (!found || best <= noise_floor_dbm)
        throw NoSignal("no spectral content above the noise floor");
    return {s.frequency_hz[best_i], best};
}

HarmonicSet extract_harmonics(const Spectrum& s, double fundamental_hz, double rel_tolerance,
                              double noise_floor_dbm) {
    if (!(fundamental_hz > 0.0)) throw InvalidInput("fundamental must be > 0");
    if (!(rel_tolerance > 0.0 && rel_tolerance < 0.5))
        throw InvalidInput("rel_tolerance out of range");

    HarmonicSet set;
    set.fundamental_frequency_hz = fundamental_hz;

    auto strongest_in = [&](double f_lo, double f_hi) -> std::pair<const double*, std::size_t> {
        auto begin = std::lower_bound(s.frequency_hz.begin(), s.frequency_hz.end(), f_lo);
        auto end = std::upper_bound(s.frequency_hz.begin(), s.frequency_hz.end(), f_hi);
        if (begin >= end) return {nullptr, 0};
        std::size_t best_i = static_cast<std::size_t>(begin - s.frequency_hz.begin());
        for (auto it = begin; it != end; ++it) {
            const std::size_t i = static_cast<std::size_t>(it - s.frequency_hz.begin());
            if (s.power_dbm[i] > s.power_dbm[best_i]) best_i = i;
        }
        return {&s.power_dbm[best_i], best_i};
    };

    // Fundamental power read off the grid near the given frequency.
    {
        auto [p, i] = strongest_in(fundamental_hz * (1.0 - rel_tolerance),
                                   fundamental_hz * (1.0 + rel_tolerance));
        set.fundamental_power_dbm = p ? *p : -300.0;
    }

    const double f_last = s.frequency_hz.back();
    for (int k = 2;; ++k) {
        const double target = k * fundamental_hz;
        const double f_lo = target * (1.0 - rel_tolerance);
        const double f_hi = target * (1.0 + rel_tolerance);
        if (f_lo > f_last) break;
        auto [p, i] = strongest_in(f_lo, std::min(f_hi, f_last));
        if (p && *p > noise_floor_dbm)
            set.harmonics.push_back({k, s.frequency_hz[i], *p});
    }
    return set;
}

double band_power_watts(const Spectrum& s) {
    double acc = 0.0;
    for (double p : s.power_dbm) acc += std::pow(10.0, p / 10.0) * 1e-3;
    return acc / s.enbw_bins;
}

double dc_rf_efficiency(double peak_output_power_w, double dc_power_w) {
    if (!(dc_power_w > 0.0)) throw ZeroDcPower("DC power must be > 0");
    if (peak_output_power_w < 0.0) throw InvalidInput("output power must be >= 0");
    return peak_output_power_w / dc_power_w;
}

double tunable_range_hz(const std::vector<std::pair<double, double>>& bias_fundamental) {
    if (bias_fundamental.size() < 2)
        throw InsufficientPoints("tunable range needs >= 2 sweep points");
    double lo = bias_fundamental.front().second;
    double hi = lo;
    for (const auto& [bias, f] : bias_fundamental) {
        lo = std::min(lo, f);
        hi = std::max(hi, f);
    }
    return hi - lo;
}

}  // namespace tdh::spectral
