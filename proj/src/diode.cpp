#include "tdh/diode.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "tdh/errors.hpp"

namespace tdh::diode {

namespace {

void require_bias(double v) {
    if (!std::isfinite(v)) throw InvalidInput("diode bias voltage must be finite");
    if (v < 0.0) throw InvalidInput("reverse bias is out of scope (v < 0)");
}

double model_current(double v, double ip, double vp, double iv, double vv, double is, double vt,
                     double a) {
    const double tunnel = ip * (v / vp) * std::exp(1.0 - v / vp);
    const double excess = iv * (std::exp(a * (v - vv)) - std::exp(-a * vv));
    const double thermal = is * (std::exp(v / vt) - 1.0);
    return tunnel + excess + thermal;
}

double model_conductance(double v, double ip, double vp, double iv, double vv, double is,
                         double vt, double a) {
    const double x = v / vp;
    const double d_tunnel = (ip / vp) * std::exp(1.0 - x) * (1.0 - x);
    const double d_excess = a * iv * std::exp(a * (v - vv));
    const double d_thermal = (is / vt) * std::exp(v / vt);
    return d_tunnel + d_excess + d_thermal;
}

}  // namespace

double DiodeParams::capacitance_at(double v) const {
    const double scale = 1.0 + capacitance_voltage_coeff * (v - 0.2);
    return junction_capacitance * std::max(scale, 0.25);
}

bool DiodeParams::valid() const {
    return peak_current > 0 && valley_current > 0 && peak_current > valley_current &&
           peak_voltage > 0 && valley_voltage > peak_voltage && saturation_current > 0 &&
           thermal_voltage > 0 && excess_coefficient > 0 && junction_capacitance > 0;
}

double iv_current(const DiodeParams& p, double v) {
    require_bias(v);
    return model_current(v, p.peak_current, p.peak_voltage, p.valley_current, p.valley_voltage,
                         p.saturation_current, p.thermal_voltage, p.excess_coefficient);
}

double differential_conductance(const DiodeParams& p, double v) {
    require_bias(v);
    return model_conductance(v, p.peak_current, p.peak_voltage, p.valley_current,
                             p.valley_voltage, p.saturation_current, p.thermal_voltage,
                             p.excess_coefficient);
}

double dc_power(const DiodeParams& p, double v) { return v * iv_current(p, v); }

std::pair<double, double> ndr_region(const DiodeParams& p) {
    const double v_hi = 2.0 * p.valley_voltage;
    const int n = 4000;
    const double dv = v_hi / n;

    // Dense scan for sign changes of dI/dV, then bisection on each bracket.
    auto g = [&](double v) { return differential_conductance(p, v); };
    std::vector<std::pair<double, double>> brackets;
    double v_prev = dv;
    double g_prev = g(v_prev);
    for (int i = 2; i <= n; ++i) {
        const double v = i * dv;
        const double gv = g(v);
        if ((g_prev > 0.0) != (gv > 0.0)) brackets.emplace_back(v_prev, v);
        v_prev = v;
        g_prev = gv;
    }
    if (brackets.size() < 2) throw NoNdr("IV curve has no negative-slope interval");

    auto refine = [&](double lo, double hi) {
        double g_lo = g(lo);
        while (hi - lo > 1e-6) {
            const double mid = 0.5 * (lo + hi);
            const double g_mid = g(mid);
            if ((g_lo > 0.0) != (g_mid > 0.0)) {
                hi = mid;
            } else {
                lo = mid;
                g_lo = g_mid;
            }
        }
        return 0.5 * (lo + hi);
    };

    const double v_low = refine(brackets.front().first, brackets.front().second);
    const double v_high = refine(brackets[1].first, brackets[1].second);
    if (g(0.5 * (v_low + v_high)) >= 0.0) throw NoNdr("no NDR between slope roots");
    return {v_low, v_high};
}

namespace {

// theta = log of [Ip, Vp, Iv, Is, Vt, a]; log-space keeps every parameter
// positive and conditions the Jacobian across the ~6 decades they span.
// valley_voltage stays pinned to the initial guess: the excess term only
// identifies the combination Iv*exp(-a*Vv), so Vv is a gauge choice.
constexpr int kNumFit = 6;

DiodeParams theta_to_params(const double* th, const DiodeParams& base) {
    DiodeParams p = base;
    p.peak_current = std::exp(th[0]);
    p.peak_voltage = std::exp(th[1]);
    p.valley_current = std::exp(th[2]);
    p.saturation_current = std::exp(th[3]);
    p.thermal_voltage = std::exp(th[4]);
    p.excess_coefficient = std::exp(th[5]);
    return p;
}

double sse(const IvCurve& c, const DiodeParams& p) {
    double s = 0.0;
    for (const auto& [v, i] : c.points) {
        const double r = iv_current(p, v) - i;
        s += r * r;
    }
    return s;
}

// Solve A x = b (n x n, dense) with partial pivoting.  Returns false if
// singular.
bool solve_linear(std::vector<double>& a, std::vector<double>& b, int n) {
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r)
            if (std::fabs(a[r * n + col]) > std::fabs(a[pivot * n + col])) pivot = r;
        if (std::fabs(a[pivot * n + col]) < 1e-300) return false;
        if (pivot != col) {
            for (int k = 0; k < n; ++k) std::swap(a[col * n + k], a[pivot * n + k]);
            std::swap(b[col], b[pivot]);
        }
        const double inv = 1.0 / a[col * n + col];
        for (int r = col + 1; r < n; ++r) {
            const double f = a[r * n + col] * inv;
            if (f == 0.0) continue;
            for (int k = col; k < n; ++k) a[r * n + k] -= f * a[col * n + k];
            b[r] -= f * b[col];
        }
    }
    for (int r = n - 1; r >= 0; --r) {
        double acc = b[r];
        for (int k = r + 1; k < n; ++k) acc -= a[r * n + k] * b[k];
        b[r] = acc / a[r * n + r];
    }
    return true;
}

}  // namespace

FitResult calibrate_from_samples(const IvCurve& curve, const DiodeParams& initial) {
    const auto& pts = curve.points;
    if (pts.size() < 8) throw InsufficientPoints("calibrate_from_samples needs >= 8 points");
    for (std::size_t i = 1; i < pts.size(); ++i)
        if (pts[i].first <= pts[i - 1].first)
            throw InvalidInput("IV curve voltages must be strictly increasing");
    const bool below = pts.front().first < initial.peak_voltage;
    const bool above = pts.back().first > initial.peak_voltage;
    if (!below || !above)
        throw InsufficientPoints("samples must span both sides of the suspected peak");

    const int m = static_cast<int>(pts.size());
    double theta[kNumFit] = {std::log(initial.peak_current),
                             std::log(initial.peak_voltage),
                             std::log(initial.valley_current),
                             std::log(initial.saturation_current),
                             std::log(initial.thermal_voltage),
                             std::log(initial.excess_coefficient)};

    const double sse0 = sse(curve, initial);
    double best = sse0;
    double lambda = 1e-3;
    int iter = 0;
    const int max_iter = 200;

    std::vector<double> jac(static_cast<std::size_t>(m) * kNumFit);
    std::vector<double> resid(m);

    for (; iter < max_iter; ++iter) {
        DiodeParams cur = theta_to_params(theta, initial);
        for (int i = 0; i < m; ++i) resid[i] = iv_current(cur, pts[i].first) - pts[i].second;

        // Numeric Jacobian, central differences in theta.
        for (int j = 0; j < kNumFit; ++j) {
            const double h = 1e-6 * std::max(std::fabs(theta[j]), 1.0);
            double tp[kNumFit], tm[kNumFit];
            std::copy(theta, theta + kNumFit, tp);
            std::copy(theta, theta + kNumFit, tm);
            tp[j] += h;
            tm[j] -= h;
            DiodeParams pp = theta_to_params(tp, initial);
            DiodeParams pm = theta_to_params(tm, initial);
            for (int i = 0; i < m; ++i) {
                jac[static_cast<std::size_t>(i) * kNumFit + j] =
                    (iv_current(pp, pts[i].first) - iv_current(pm, pts[i].first)) / (2.0 * h);
            }
        }

        bool stepped = false;
        for (int attempt = 0; attempt < 12 && !stepped; ++attempt) {
            std::vector<double> jtj(kNumFit * kNumFit, 0.0);
            std::vector<double> jtr(kNumFit, 0.0);
            for (int i = 0; i < m; ++i) {
                const double* row = &jac[static_cast<std::size_t>(i) * kNumFit];
                for (int a = 0; a < kNumFit; ++a) {
                    jtr[a] -= row[a] * resid[i];
                    for (int b = a; b < kNumFit; ++b) jtj[a * kNumFit + b] += row[a] * row[b];
                }
            }
            for (int a = 0; a < kNumFit; ++a) {
                for (int b = 0; b < a; ++b) jtj[a * kNumFit + b] = jtj[b * kNumFit + a];
                jtj[a * kNumFit + a] *= 1.0 + lambda;
            }
            std::vector<double> step = jtr;
            if (!solve_linear(jtj, step, kNumFit)) {
                lambda *= 10.0;
                continue;
            }
            double trial[kNumFit];
            for (int j = 0; j < kNumFit; ++j)
                trial[j] = theta[j] + std::clamp(step[j], -2.0, 2.0);
            const double trial_sse = sse(curve, theta_to_params(trial, initial));
            if (std::isfinite(trial_sse) && trial_sse < best) {
                std::copy(trial, trial + kNumFit, theta);
                best = trial_sse;
                lambda = std::max(lambda / 3.0, 1e-12);
                stepped = true;
            } else {
                lambda *= 10.0;
            }
        }
        if (!stepped) break;                       // stuck: lambda exhausted
        if (best < 1e-24 * m) { ++iter; break; }   // numerically perfect fit
    }

    if (best >= sse0 * (1.0 - 1e-9) && sse0 > 0.0)
        throw FitDiverged("fit failed to improve on the initial parameters");

    FitResult out;
    out.params = theta_to_params(theta, initial);
    out.residual_rms = std::sqrt(best / m);
    out.iterations = iter;
    return out;
}

}  // namespace tdh::diode
