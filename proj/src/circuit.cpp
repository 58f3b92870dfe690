#include "tdh/circuit.hpp"

#include <algorithm>
#include <cmath>

#include "tdh/errors.hpp"
#include "tdh/fft.hpp"
#include "tdh/kernels.hpp"
#include "tdh/rng.hpp"

namespace tdh::circuit {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;
}  // namespace

bool OscillatorCircuit::valid() const {
    return diode.valid() && choke_inductance > 0 && smoothing_capacitance > 0 &&
           dc_block_capacitance > 0 && load_resistance > 0 && lead_inductance > 0 &&
           series_resistance >= 0 && bias_voltage >= 0 && bias_voltage <= 0.4;
}

double dc_operating_point(const OscillatorCircuit& c) {
    if (!c.valid()) throw InvalidInput("invalid oscillator circuit");
    auto f = [&](double v) {
        return c.bias_voltage - v - c.series_resistance * diode::iv_current(c.diode, v);
    };
    double lo = 0.0, hi = std::max(0.6, 2.0 * c.diode.valley_voltage);
    if (f(hi) > 0.0) return c.bias_voltage;  // negligible drop; should not happen
    for (int i = 0; i < 80; ++i) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

std::complex<double> resonator_impedance(const OscillatorCircuit& c, double frequency_hz) {
    if (!(frequency_hz > 0.0)) throw InvalidInput("frequency must be > 0");
    const double w = kTwoPi * frequency_hz;
    const std::complex<double> j(0.0, 1.0);

    // Bias stub behind node A, shunted by the smoothing capacitor.
    const std::complex<double> z_choke = c.series_resistance + j * (w * c.choke_inductance);
    const std::complex<double> z_smooth = 1.0 / (j * (w * c.smoothing_capacitance));
    const std::complex<double> z_stub = (z_smooth * z_choke) / (z_smooth + z_choke);
    const std::complex<double> z_bias_branch = j * (w * c.lead_inductance) + z_stub;

    // Output branch: DC block into the load.
    const std::complex<double> z_load_branch =
        c.load_resistance + 1.0 / (j * (w * c.dc_block_capacitance));

    return (z_bias_branch * z_load_branch) / (z_bias_branch + z_load_branch);
}

std::complex<double> device_impedance(const OscillatorCircuit& c, double frequency_hz) {
    if (!(frequency_hz > 0.0)) throw InvalidInput("frequency must be > 0");
    const double vj = dc_operating_point(c);
    const double g = diode::differential_conductance(c.diode, vj);
    const double cj = c.diode.capacitance_at(vj);
    const std::complex<double> y(g, kTwoPi * frequency_hz * cj);
    return 1.0 / y;
}

std::pair<std::complex<double>, std::complex<double>> small_signal_impedances(
    const OscillatorCircuit& c, double frequency_hz) {
    return {resonator_impedance(c, frequency_hz), device_impedance(c, frequency_hz)};
}

StartupVerdict startup_check(const OscillatorCircuit& c) {
    if (!c.valid()) throw InvalidInput("invalid oscillator circuit");
    const double vj = dc_operating_point(c);
    const double g = diode::differential_conductance(c.diode, vj);
    const double cj = c.diode.capacitance_at(vj);

    auto total = [&](double f) {
        const double w = kTwoPi * f;
        const std::complex<double> zn = 1.0 / std::complex<double>(g, w * cj);
        return resonator_impedance(c, f) + zn;
    };

    // Log-spaced scan for reactance sign changes, then bisection.
    const double f_lo = 1e6, f_hi = 10e9;
    const int n_scan = 4000;
    const double ratio = std::pow(f_hi / f_lo, 1.0 / n_scan);

    StartupVerdict verdict;
    double best_r = 0.0;
    bool have_best = false;

    double f_prev = f_lo;
    double x_prev = total(f_prev).imag();
    double f = f_lo;
    for (int i = 1; i <= n_scan; ++i) {
        f *= ratio;
        const double x = total(f).imag();
        if ((x_prev > 0.0) != (x > 0.0)) {
            double lo = f_prev, hi = f;
            double x_lo = x_prev;
            for (int it = 0; it < 80; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double x_mid = total(mid).imag();
                if ((x_lo > 0.0) != (x_mid > 0.0)) {
                    hi = mid;
                } else {
                    lo = mid;
                    x_lo = x_mid;
                }
            }
            const double f0 = 0.5 * (lo + hi);
            const double r0 = total(f0).real();
            if (!have_best || r0 < best_r) {
                best_r = r0;
                verdict.resonant_frequency_hz = f0;
                have_best = true;
            }
        }
        f_prev = f;
        x_prev = x;
    }

    if (have_best) {
        verdict.net_resistance_ohms = best_r;
        verdict.oscillating = best_r < 0.0;
        // Envelope rate of the resonant mode: sigma = R / (dX/dw), so the
        // e-folding time is dX/dw over |R|.
        const double f0 = *verdict.resonant_frequency_hz;
        const double df = 1e-5 * f0;
        const double slope =
            (total(f0 + df).imag() - total(f0 - df).imag()) / (kTwoPi * 2.0 * df);
        verdict.growth_time_constant_s =
            std::fabs(best_r) > 0.0 ? std::fabs(slope / best_r) : 1e9;
    }
    return verdict;
}

namespace {

// Blackman-windowed sinc low-pass used to decimate the integration grid down
// to the output sample rate without folding harmonics into the span.
std::vector<double> design_decimation_fir(int n_taps, double cutoff_norm) {
    std::vector<double> taps(n_taps);
    const int mid = (n_taps - 1) / 2;
    double sum = 0.0;
    for (int i = 0; i < n_taps; ++i) {
        const int k = i - mid;
        const double sinc =
            (k == 0) ? 2.0 * cutoff_norm
                     : std::sin(kTwoPi * cutoff_norm * k) / (kPi * k);
        const double wpos = static_cast<double>(i) / (n_taps - 1);
        const double win = 0.42 - 0.5 * std::cos(kTwoPi * wpos) + 0.08 * std::cos(2.0 * kTwoPi * wpos);
        taps[i] = sinc * win;
        sum += taps[i];
    }
    for (double& t : taps) t /= sum;  // unity DC gain
    return taps;
}

struct State {
    double i_choke;   // A, through Rs + L_choke
    double v_smooth;  // V, node A
    double i_lead;    // A, through L_lead
    double v_junction;  // V, node B
    double v_block;   // V, across the DC block capacitor
};

}  // namespace

TransientTrace simulate_transient(const OscillatorCircuit& c, double duration_s,
                                  std::uint64_t seed, const SimOptions& opts) {
    if (!c.valid()) throw InvalidInput("invalid oscillator circuit");
    if (!(duration_s > 0.0)) throw InvalidInput("duration must be > 0");

    if (opts.enforce_min_duration) {
        const StartupVerdict sv = startup_check(c);
        if (sv.oscillating && duration_s * *sv.resonant_frequency_hz < 200.0)
            throw InvalidInput("duration must cover >= 200 periods of the resonant frequency");
    }

    const double dt_out = 1.0 / opts.output_sample_rate_hz;
    const double dt = dt_out / opts.oversample;
    const std::size_t n_out = static_cast<std::size_t>(std::ceil(duration_s / dt_out));
    const std::size_t n_raw = n_out * opts.oversample + opts.fir_taps;

    // DC equilibrium, then a seeded kick on the junction voltage.
    const double vj0 = dc_operating_point(c);
    const double id0 = diode::iv_current(c.diode, vj0);
    State y;
    y.i_choke = id0;
    y.v_smooth = c.bias_voltage - c.series_resistance * id0;
    y.i_lead = id0;
    y.v_junction = vj0;
    y.v_block = vj0;  // no DC across the load

    SplitMix64 rng(seed);
    y.v_junction += opts.startup_noise_volts * rng.next_gaussian();

    const double inv_lc = 1.0 / c.choke_inductance;
    const double inv_cs = 1.0 / c.smoothing_capacitance;
    const double inv_ll = 1.0 / c.lead_inductance;
    const double inv_cb = 1.0 / c.dc_block_capacitance;
    const double inv_rl = 1.0 / c.load_resistance;
    const double rs = c.series_resistance;
    const double vbias = c.bias_voltage;
    const diode::DiodeParams& d = c.diode;

    auto deriv = [&](const State& s, State& ds) {
        const double i_load = (s.v_junction - s.v_block) * inv_rl;
        const double vj = s.v_junction < 0.0 ? 0.0 : s.v_junction;
        const double tunnel =
            d.peak_current * (vj / d.peak_voltage) * std::exp(1.0 - vj / d.peak_voltage);
        const double excess =
            d.valley_current * (std::exp(d.excess_coefficient * (vj - d.valley_voltage)) -
                                std::exp(-d.excess_coefficient * d.valley_voltage));
        const double thermal = d.saturation_current * (std::exp(vj / d.thermal_voltage) - 1.0);
        const double i_diode = tunnel + excess + thermal;
        const double cj = d.capacitance_at(s.v_junction);

        ds.i_choke = (vbias - rs * s.i_choke - s.v_smooth) * inv_lc;
        ds.v_smooth = (s.i_choke - s.i_lead) * inv_cs;
        ds.i_lead = (s.v_smooth - s.v_junction) * inv_ll;
        ds.v_junction = (s.i_lead - i_diode - i_load) / cj;
        ds.v_block = i_load * inv_cb;
    };

    std::vector<double> raw(n_raw);
    State k1, k2, k3, k4, tmp;
    for (std::size_t n = 0; n < n_raw; ++n) {
        raw[n] = y.v_junction - y.v_block;

        deriv(y, k1);
        tmp = {y.i_choke + 0.5 * dt * k1.i_choke, y.v_smooth + 0.5 * dt * k1.v_smooth,
               y.i_lead + 0.5 * dt * k1.i_lead, y.v_junction + 0.5 * dt * k1.v_junction,
               y.v_block + 0.5 * dt * k1.v_block};
        deriv(tmp, k2);
        tmp = {y.i_choke + 0.5 * dt * k2.i_choke, y.v_smooth + 0.5 * dt * k2.v_smooth,
               y.i_lead + 0.5 * dt * k2.i_lead, y.v_junction + 0.5 * dt * k2.v_junction,
               y.v_block + 0.5 * dt * k2.v_block};
        deriv(tmp, k3);
        tmp = {y.i_choke + dt * k3.i_choke, y.v_smooth + dt * k3.v_smooth,
               y.i_lead + dt * k3.i_lead, y.v_junction + dt * k3.v_junction,
               y.v_block + dt * k3.v_block};
        deriv(tmp, k4);

        const double s = dt / 6.0;
        y.i_choke += s * (k1.i_choke + 2.0 * (k2.i_choke + k3.i_choke) + k4.i_choke);
        y.v_smooth += s * (k1.v_smooth + 2.0 * (k2.v_smooth + k3.v_smooth) + k4.v_smooth);
        y.i_lead += s * (k1.i_lead + 2.0 * (k2.i_lead + k3.i_lead) + k4.i_lead);
        y.v_junction += s * (k1.v_junction + 2.0 * (k2.v_junction + k3.v_junction) + k4.v_junction);
        y.v_block += s * (k1.v_block + 2.0 * (k2.v_block + k3.v_block) + k4.v_block);

        if ((n & 0xFF) == 0 &&
            (std::fabs(y.v_junction) > 10.0 || std::fabs(y.v_smooth) > 10.0 ||
             std::fabs(y.v_block) > 10.0 || std::fabs(y.i_choke) > 10.0 ||
             std::fabs(y.i_lead) > 10.0 || !std::isfinite(y.v_junction)))
            throw StepUnstable("transient integration diverged");
    }

    const std::vector<double> taps =
        design_decimation_fir(opts.fir_taps, 0.45 / opts.oversample);

    TransientTrace trace;
    trace.sample_interval = dt_out;
    trace.bias_voltage = c.bias_voltage;
    trace.seed = seed;
    trace.load_voltage.resize(n_out);
    kernels::fir_decimate(raw, taps, static_cast<std::size_t>(opts.oversample),
                          trace.load_voltage);
    return trace;
}

namespace {

double rms_ac(const double* x, std::size_t n) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += x[i];
    mean /= static_cast<double>(n);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = x[i] - mean;
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(n));
}

// Dominant non-DC frequency of the steady-state segment, for the envelope
// low-pass corner.
double dominant_frequency(const TransientTrace& t) {
    const std::size_t n = t.load_voltage.size();
    const std::size_t seg = fft::floor_pow2(n / 4);
    std::vector<double> x(t.load_voltage.end() - seg, t.load_voltage.end());
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(seg);
    for (double& v : x) v -= mean;
    auto spec = fft::forward_real(x);
    double best = 0.0;
    std::size_t best_k = 1;
    for (std::size_t k = 1; k < seg / 2; ++k) {
        const double m = std::norm(spec[k]);
        if (m > best) {
            best = m;
            best_k = k;
        }
    }
    return static_cast<double>(best_k) / (static_cast<double>(seg) * t.sample_interval);
}

}  // namespace

RegimeReport classify_regime(const TransientTrace& trace, const RegimeOptions& opts) {
    const std::size_t n = trace.load_voltage.size();
    if (n < (1u << 14)) throw TraceTooShort("classify_regime needs >= 2^14 samples");

    RegimeReport report;

    const std::size_t steady_start = n - n / 4;
    const double steady_rms = rms_ac(trace.load_voltage.data() + steady_start, n - steady_start);
    if (steady_rms < opts.quiescent_rms_volts) {
        report.regime = Regime::Quiescent;
        return report;
    }

    const double f0 = dominant_frequency(trace);
    const double fc = std::max(f0 / 20.0, 1.0 / (trace.sample_interval * n));
    const double alpha = 1.0 - std::exp(-kTwoPi * fc * trace.sample_interval);

    // Envelope over the final 75%: rectify, single-pole low-pass.
    const std::size_t start = n / 4;
    std::vector<double> env(n - start);
    double mean = 0.0;
    for (std::size_t i = start; i < n; ++i) mean += trace.load_voltage[i];
    mean /= static_cast<double>(n - start);
    double e = std::fabs(trace.load_voltage[start] - mean);
    for (std::size_t i = start; i < n; ++i) {
        const double r = std::fabs(trace.load_voltage[i] - mean);
        e += alpha * (r - e);
        env[i - start] = e;
    }

    double env_max = 0.0, env_mean = 0.0;
    for (double v : env) {
        env_max = std::max(env_max, v);
        env_mean += v;
    }
    env_mean /= static_cast<double>(env.size());
    double env_var = 0.0;
    for (double v : env) env_var += (v - env_mean) * (v - env_mean);
    env_var /= static_cast<double>(env.size());
    report.envelope_mean = env_mean;
    report.envelope_variance = env_var;

    // Hysteresis burst counter: a cycle is a rise above hi followed by a
    // decay below lo, with hi/lo equal to the required peak/trough ratio.
    const double hi = 0.5 * env_max;
    const double lo = hi / opts.burst_peak_trough_ratio;
    int cycles = 0;
    bool above = env.front() > hi;
    bool armed = !above;
    for (double v : env) {
        if (!above && v > hi) {
            above = true;
            if (armed) ++cycles;
            armed = false;
        } else if (above && v < lo) {
            above = false;
            armed = true;
        }
    }
    const double window_s = static_cast<double>(env.size()) * trace.sample_interval;
    report.burst_rate_hz = cycles / window_s;

    report.regime =
        (cycles >= opts.min_burst_cycles) ? Regime::Bursty : Regime::SteadyOscillation;
    return report;
}

namespace {

// Fundamental-component (describing function) conductance of the diode for a
// sinusoidal junction swing of the given amplitude about the operating point.
double describing_conductance(const diode::DiodeParams& d, double v0, double amplitude) {
    const int n = 256;
    double acc = 0.0;
    for (int k = 0; k < n; ++k) {
        const double th = kTwoPi * (k + 0.5) / n;
        const double v = std::max(v0 + amplitude * std::sin(th), 0.0);
        acc += diode::iv_current(d, v) * std::sin(th);
    }
    return (2.0 / n) * acc / amplitude;
}

}  // namespace

std::optional<bool> kurokawa_stable(const OscillatorCircuit& c, double amplitude_volts) {
    if (!(amplitude_volts > 0.0)) throw InvalidInput("amplitude must be > 0");
    const StartupVerdict sv = startup_check(c);
    if (!sv.resonant_frequency_hz) return std::nullopt;
    const double f0 = *sv.resonant_frequency_hz;
    const double v0 = dc_operating_point(c);
    const double cj = c.diode.capacitance_at(v0);

    auto z_total = [&](double a, double f) {
        const double g = describing_conductance(c.diode, v0, a);
        const std::complex<double> zn = 1.0 / std::complex<double>(g, kTwoPi * f * cj);
        return resonator_impedance(c, f) + zn;
    };

    const double da = 0.01 * amplitude_volts;
    const double df = 1e-4 * f0;
    const std::complex<double> dz_da =
        (z_total(amplitude_volts + da, f0) - z_total(amplitude_volts - da, f0)) / (2.0 * da);
    const std::complex<double> dz_df =
        (z_total(amplitude_volts, f0 + df) - z_total(amplitude_volts, f0 - df)) / (2.0 * df);

    // dR/dA * dX/dw - dX/dA * dR/dw > 0  at the operating point.
    return dz_da.real() * dz_df.imag() - dz_da.imag() * dz_df.real() > 0.0;
}

}  // namespace tdh::circuit
