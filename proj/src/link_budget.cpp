#include "tdh/link_budget.hpp"

#include <algorithm>
#include <cmath>

#include "tdh/errors.hpp"

namespace tdh::linkbudget {

namespace {
constexpr double kC = 299792458.0;
constexpr double kFourPi = 4.0 * 3.14159265358979323846;
constexpr double kMinRange = 0.1;  // m, "at contact"

double to_watts(double dbm) { return std::pow(10.0, dbm / 10.0) * 1e-3; }
}  // namespace

double GainMask::gain_at(double frequency_hz, double flat_gain_dbi) const {
    if (points.empty()) return flat_gain_dbi;
    if (frequency_hz <= points.front().first) return points.front().second;
    if (frequency_hz >= points.back().first) return points.back().second;
    for (std::size_t i = 1; i < points.size(); ++i) {
        if (frequency_hz <= points[i].first) {
            const auto& [f0, g0] = points[i - 1];
            const auto& [f1, g1] = points[i];
            const double t = (frequency_hz - f0) / (f1 - f0);
            return g0 + t * (g1 - g0);
        }
    }
    return points.back().second;
}

double fspl_db(double frequency_hz, double distance_m) {
    if (!(frequency_hz > 0.0) || !(distance_m > 0.0))
        throw NonPositiveInput("frequency and distance must be > 0");
    return 20.0 * std::log10(kFourPi * distance_m * frequency_hz / kC);
}

double received_power_dbm(double tx_dbm, double gain1_dbi, double gain2_dbi, double frequency_hz,
                          double distance_m) {
    return tx_dbm + gain1_dbi + gain2_dbi - fspl_db(frequency_hz, distance_m);
}

std::vector<RangePoint> reverse_range(const ReverseLinkParams& p) {
    std::vector<RangePoint> out;
    out.reserve(p.harmonics.size());
    for (const auto& tone : p.harmonics) {
        const double tag_gain = p.tag_gain_mask.gain_at(tone.frequency_hz, p.tag_antenna_gain_dbi);
        const double budget_db =
            tone.power_dbm + tag_gain + p.reader_antenna_gain_dbi - p.reader_sensitivity_dbm;
        // fspl(d) = budget  =>  d = (c / (4 pi f)) * 10^(budget/20)
        const double d = (kC / (kFourPi * tone.frequency_hz)) * std::pow(10.0, budget_db / 20.0);
        out.push_back({tone.frequency_hz, d < kMinRange ? 0.0 : d});
    }
    return out;
}

double forward_range(const ForwardLinkParams& p) {
    if (!(p.tx_power_w > 0.0)) throw NonPositiveInput("tx power must be > 0");
    if (!(p.rectification_efficiency > 0.0 && p.rectification_efficiency <= 1.0))
        throw InvalidInput("rectification efficiency must be in (0, 1]");
    if (!(p.tag_consumption_w > 0.0)) throw NonPositiveInput("tag consumption must be > 0");
    if (!(p.carrier_frequency_hz > 0.0)) throw NonPositiveInput("carrier frequency must be > 0");

    const double g1 = std::pow(10.0, p.tx_antenna_gain_dbi / 10.0);
    const double g2 = std::pow(10.0, p.tag_antenna_gain_dbi / 10.0);
    // eta * P_tx * G1 * G2 * (c/(4 pi d f))^2 = consumption
    const double d = (kC / (kFourPi * p.carrier_frequency_hz)) *
                     std::sqrt(p.rectification_efficiency * p.tx_power_w * g1 * g2 /
                               p.tag_consumption_w);
    if (d < kMinRange)
        throw InfeasibleAtContact("tag cannot be powered even at contact distance");
    return d;
}

std::vector<LinkPoint> forward_link_curve(const ForwardLinkParams& p,
                                          const std::vector<double>& distances_m) {
    const double tx_dbm = 10.0 * std::log10(p.tx_power_w / 1e-3);
    std::vector<LinkPoint> out;
    out.reserve(distances_m.size());
    for (double d : distances_m) {
        const double rx = received_power_dbm(tx_dbm, p.tx_antenna_gain_dbi, p.tag_antenna_gain_dbi,
                                             p.carrier_frequency_hz, d);
        out.push_back({d, rx, p.rectification_efficiency * to_watts(rx)});
    }
    return out;
}

std::vector<LinkPoint> reverse_link_curve(const ReverseLinkParams& p, const HarmonicTone& tone,
                                          const std::vector<double>& distances_m) {
    const double tag_gain = p.tag_gain_mask.gain_at(tone.frequency_hz, p.tag_antenna_gain_dbi);
    std::vector<LinkPoint> out;
    out.reserve(distances_m.size());
    for (double d : distances_m) {
        const double rx = received_power_dbm(tone.power_dbm, tag_gain, p.reader_antenna_gain_dbi,
                                             tone.frequency_hz, d);
        out.push_back({d, rx, to_watts(rx)});
    }
    return out;
}

}  // namespace tdh::linkbudget
