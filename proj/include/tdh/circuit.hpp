#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "tdh/diode.hpp"

namespace tdh::circuit {

// One-port oscillator board.  Topology, from the bias supply outward:
//
//   Vbias --[Rs]--[L_choke]--(A)--[L_lead]--(B)--[C_block]--+--> v_out
//                             |              |              |
//                         C_smooth      diode || C_j      R_load
//                             |              |              |
//                            gnd            gnd            gnd
//
// The smoothing capacitor grounds the bias node at RF, so the lead
// inductance resonates against the junction capacitance; the DC block
// couples that resonator into the load.
struct OscillatorCircuit {
    diode::DiodeParams diode;
    double choke_inductance = 18e-9;       // H
    double smoothing_capacitance = 0.1e-6;  // F
    double dc_block_capacitance = 2.4e-12;   // F, effective output coupling
    double load_resistance = 50.0;          // ohm
    double lead_inductance = 7.6e-9;        // H
    double series_resistance = 0.35;        // ohm
    double bias_voltage = 0.2;              // V, supported sweeps cover [0, 0.4]

    bool valid() const;
};

struct TransientTrace {
    double sample_interval = 0.0;       // s
    std::vector<double> load_voltage;   // V across load_resistance
    double bias_voltage = 0.0;          // V
    std::uint64_t seed = 0;
};

struct StartupVerdict {
    bool oscillating = false;
    // Frequency where the loop reactance crosses zero, when one exists.
    std::optional<double> resonant_frequency_hz;
    // Re(Z_res + Z_N) at that frequency; negative when oscillating.
    double net_resistance_ohms = 0.0;
    // |dX/dw / R| at the crossing: e-folding time of the envelope (growth
    // when oscillating, decay otherwise).  Infinite when R is exactly zero.
    double growth_time_constant_s = 0.0;
};

enum class Regime { Quiescent, SteadyOscillation, Bursty };

struct RegimeReport {
    Regime regime = Regime::Quiescent;
    double envelope_mean = 0.0;      // V
    double envelope_variance = 0.0;  // V^2
    double burst_rate_hz = 0.0;      // complete rise/decay cycles per second
};

// Junction voltage solving Vbias = V + Rs*I(V); unique for the supported
// series resistances.
double dc_operating_point(const OscillatorCircuit& c);

// Impedance of the passive network seen from the diode terminals (node B to
// ground, diode and junction capacitance removed).
std::complex<double> resonator_impedance(const OscillatorCircuit& c, double frequency_hz);

// Small-signal device impedance at the DC operating point: the differential
// conductance in parallel with the junction capacitance.
std::complex<double> device_impedance(const OscillatorCircuit& c, double frequency_hz);

std::pair<std::complex<double>, std::complex<double>> small_signal_impedances(
    const OscillatorCircuit& c, double frequency_hz);

// Small-signal startup test: locate the zero of the total loop reactance
// (scanned over 1 MHz..10 GHz, refined by bisection) and check the sign of
// the total loop resistance there.
StartupVerdict startup_check(const OscillatorCircuit& c);

struct SimOptions {
    double output_sample_rate_hz = 7.0e9;  // covers a 3 GHz span with margin
    // Integration runs at output_sample_rate * oversample; 22 keeps the RK4
    // step under 1/(50 * 3 GHz).
    int oversample = 22;
    // Anti-alias FIR applied before decimating to the output rate.
    int fir_taps = 401;
    double startup_noise_volts = 1e-12;  // seed-scaled kick off the equilibrium
    bool enforce_min_duration = true;    // require >= 200 resonant periods
};

// Fixed-step RK4 integration of the board, starting from the DC equilibrium
// plus a seeded picovolt perturbation of the junction voltage.  Deterministic
// for fixed (circuit, duration, seed).  Throws StepUnstable if any state
// exceeds 10 in magnitude.
TransientTrace simulate_transient(const OscillatorCircuit& c, double duration_s,
                                  std::uint64_t seed, const SimOptions& opts = {});

struct RegimeOptions {
    double quiescent_rms_volts = 1e-4;
    double burst_peak_trough_ratio = 10.0;
    int min_burst_cycles = 3;
};

// Label a trace as Quiescent / SteadyOscillation / Bursty.  RMS is taken on
// the final 25% (steady state); burst cycles are counted on the final 75% so
// several quench periods fit in the window.  Envelope = full-wave rectified
// signal through a single-pole low-pass at fundamental/20.
RegimeReport classify_regime(const TransientTrace& trace, const RegimeOptions& opts = {});

// Optional diagnostic: Kurokawa's stability test at the reactance zero, with
// the amplitude dependence taken from the describing function of the diode
// conductance (standard treatment, see Pozar, "Microwave Engineering").
// Returns nullopt when no reactance zero exists.
std::optional<bool> kurokawa_stable(const OscillatorCircuit& c, double amplitude_volts);

}  // namespace tdh::circuit
