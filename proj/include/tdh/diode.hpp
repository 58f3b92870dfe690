#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace tdh::diode {

// Three-term Esaki model: tunnel + excess + thermal current, with the small
// zero-bias offset of the excess term subtracted so i(0) == 0 exactly.
//
//   i(v) = Ip*(v/Vp)*exp(1 - v/Vp)
//        + Iv*(exp(a*(v - Vv)) - exp(-a*Vv))
//        + Is*(exp(v/Vt) - 1)
//
// The defaults are a calibrated stand-in for the AI101E: they reproduce the
// measured DC draw of the reference board (2.623 mA at 200 mV, 2.246 mA at
// 295.9 mV) and place the IV peak/valley at ~0.111 V / ~0.290 V.
struct DiodeParams {
    double peak_current = 2.85e-3;        // A, tunnel-term magnitude
    double peak_voltage = 0.10;           // V
    double valley_current = 1.4194e-3;    // A, excess-term magnitude
    double valley_voltage = 0.30;         // V
    double saturation_current = 9.983e-10;  // A
    double thermal_voltage = 0.026;       // V
    double excess_coefficient = 4.0;      // 1/V
    double junction_capacitance = 2.8e-12;  // F at the 0.2 V reference bias

    // Optional linear bias dependence of the junction capacitance,
    // referenced to 0.2 V:  C(v) = Cj * (1 + coeff*(v - 0.2)), clamped to
    // stay >= 0.25*Cj.  Zero (the default) means a constant capacitance.
    double capacitance_voltage_coeff = 0.0;  // 1/V

    double capacitance_at(double v) const;
    bool valid() const;
};

struct IvCurve {
    // (voltage [V], current [A]) pairs, voltages strictly increasing.
    std::vector<std::pair<double, double>> points;
};

// Static current at forward bias v >= 0.  Throws InvalidInput on non-finite
// or negative v.
double iv_current(const DiodeParams& p, double v);

// Analytic dI/dV; negative exactly inside the NDR region.
double differential_conductance(const DiodeParams& p, double v);

// v * i(v).
double dc_power(const DiodeParams& p, double v);

// Locate the NDR interval: the two roots of dI/dV on (0, 2*valley_voltage),
// refined to 1e-6 V.  Throws NoNdr when the curve is monotone.
std::pair<double, double> ndr_region(const DiodeParams& p);

struct FitResult {
    DiodeParams params;
    double residual_rms = 0.0;  // A
    int iterations = 0;
};

// Least-squares fit of the model to sampled IV points (Levenberg-Marquardt,
// positive parameters fitted in log space).  `initial` seeds the search and
// supplies the (unfitted) capacitance fields.  Requires >= 8 points spanning
// both sides of initial.peak_voltage.  Throws FitDiverged when the residual
// cannot be improved, InsufficientPoints on bad input.
FitResult calibrate_from_samples(const IvCurve& curve, const DiodeParams& initial);

}  // namespace tdh::diode
