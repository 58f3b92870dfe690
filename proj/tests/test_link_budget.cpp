#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "tdh/errors.hpp"
#include "tdh/link_budget.hpp"

using namespace tdh;
using linkbudget::ForwardLinkParams;
using linkbudget::ReverseLinkParams;

TEST_CASE("free-space path loss closed form") {
    CHECK(linkbudget::fspl_db(727.2e6, 1.0) == doctest::Approx(29.68).epsilon(0.001));
    CHECK(linkbudget::fspl_db(1e9, 1.0) == doctest::Approx(32.45).epsilon(0.001));
    // Doubling distance or frequency adds 20*log10(2) dB.
    const double base = linkbudget::fspl_db(433e6, 3.0);
    CHECK(linkbudget::fspl_db(433e6, 6.0) - base == doctest::Approx(6.0206).epsilon(1e-6));
    CHECK(linkbudget::fspl_db(866e6, 3.0) - base == doctest::Approx(6.0206).epsilon(1e-6));
    CHECK_THROWS_AS(linkbudget::fspl_db(0.0, 1.0), NonPositiveInput);
    CHECK_THROWS_AS(linkbudget::fspl_db(1e9, -2.0), NonPositiveInput);
}

TEST_CASE("received power bookkeeping") {
    // At the sensitivity-threshold distance the received power equals the
    // sensitivity by definition.
    const double tx = -11.80, gains = 6.0, sens = -90.0;
    const double fspl_at_limit = tx + gains - sens;
    const double d = 299792458.0 / (4.0 * M_PI * 727.2e6) * std::pow(10.0, fspl_at_limit / 20.0);
    CHECK(linkbudget::received_power_dbm(tx, 3.0, 3.0, 727.2e6, d) ==
          doctest::Approx(sens).epsilon(1e-12));

    // 50 m is comfortably inside the detection range of the fundamental.
    CHECK(linkbudget::received_power_dbm(-11.80, 3.0, 3.0, 727.2e6, 50.0) > -90.0);

    // One decade of distance is 20 dB.
    const double p1 = linkbudget::received_power_dbm(0.0, 0.0, 0.0, 1e9, 1.0);
    const double p10 = linkbudget::received_power_dbm(0.0, 0.0, 0.0, 1e9, 10.0);
    CHECK(p1 - p10 == doctest::Approx(20.0).epsilon(1e-9));
}

TEST_CASE("reverse range per harmonic") {
    ReverseLinkParams p;
    p.harmonics = {{727.2e6, -11.80}, {2181.6e6, -42.0}, {2.9e9, -95.0}};
    const auto ranges = linkbudget::reverse_range(p);
    REQUIRE(ranges.size() == 3);
    // Friis inversion of the fundamental row lands around 5.3e2 m.
    CHECK(ranges[0].max_distance_m == doctest::Approx(532.0).epsilon(0.01));
    CHECK(ranges[0].max_distance_m > 50.0);
    // Weak third harmonic only carries a handful of meters.
    CHECK(ranges[1].max_distance_m == doctest::Approx(5.5).epsilon(0.01));
    // Already below sensitivity at contact: reported as zero.
    CHECK(ranges[2].max_distance_m == 0.0);

    // Loosening the sensitivity by 20 dB buys one decade of range.
    ReverseLinkParams loose = p;
    loose.reader_sensitivity_dbm += 20.0;
    const auto louder = linkbudget::reverse_range(loose);
    CHECK(louder[0].max_distance_m == doctest::Approx(ranges[0].max_distance_m / 10.0));

    // Round trip: received power at the returned range equals the sensitivity.
    for (const auto& r : ranges) {
        if (r.max_distance_m <= 0.0) continue;
        const double rx = linkbudget::received_power_dbm(
            p.harmonics[0].frequency_hz == r.frequency_hz ? -11.80 : -42.0, 3.0, 3.0,
            r.frequency_hz, r.max_distance_m);
        CHECK(std::fabs(rx - p.reader_sensitivity_dbm) < 1e-9);
    }
}

TEST_CASE("forward range reproduces the reference power-up distances") {
    ForwardLinkParams heavy;  // defaults: 524.6 uW tag at 415 MHz
    CHECK(linkbudget::forward_range(heavy) == doctest::Approx(2.74).epsilon(0.15));

    ForwardLinkParams light = heavy;
    light.tag_consumption_w = 20e-6;
    CHECK(linkbudget::forward_range(light) == doctest::Approx(14.27).epsilon(0.15));

    // Scaling laws: range ~ sqrt(P_tx), range ~ 1/sqrt(consumption).
    ForwardLinkParams x4 = heavy;
    x4.tag_consumption_w *= 4.0;
    CHECK(linkbudget::forward_range(x4) ==
          doctest::Approx(0.5 * linkbudget::forward_range(heavy)).epsilon(1e-9));
    ForwardLinkParams p4 = heavy;
    p4.tx_power_w *= 4.0;
    CHECK(linkbudget::forward_range(p4) ==
          doctest::Approx(2.0 * linkbudget::forward_range(heavy)).epsilon(1e-9));

    ForwardLinkParams hopeless = heavy;
    hopeless.tag_consumption_w = 10.0;  // ten watts: dead at contact
    CHECK_THROWS_AS(linkbudget::forward_range(hopeless), InfeasibleAtContact);
}

TEST_CASE("forward curve: harvested power crosses the consumption at the range limit") {
    ForwardLinkParams p;
    const double d_max = linkbudget::forward_range(p);
    const auto curve = linkbudget::forward_link_curve(p, {d_max});
    CHECK(curve[0].harvested_w == doctest::Approx(p.tag_consumption_w).epsilon(1e-9));

    // Doubling distances step received power down by 6.02 dB each.
    std::vector<double> distances;
    for (double d = 1.0; d <= 512.0; d *= 2.0) distances.push_back(d);
    const auto steps = linkbudget::forward_link_curve(p, distances);
    for (std::size_t i = 1; i < steps.size(); ++i) {
        CHECK(steps[i - 1].received_dbm - steps[i].received_dbm ==
              doctest::Approx(6.0206).epsilon(1e-6));
        CHECK(steps[i].received_dbm < steps[i - 1].received_dbm);
    }
}

TEST_CASE("reverse curves preserve the harmonic ordering of detectability") {
    ReverseLinkParams p;
    p.harmonics = {{727.2e6, -11.80}, {1454.4e6, -25.0}, {2181.6e6, -42.0}, {2908.8e6, -45.0}};
    const auto ranges = linkbudget::reverse_range(p);
    for (std::size_t i = 1; i < ranges.size(); ++i)
        CHECK(ranges[i].max_distance_m < ranges[i - 1].max_distance_m);

    std::vector<double> distances{1.0, 2.0, 5.0, 10.0};
    const auto curve = linkbudget::reverse_link_curve(p, p.harmonics[0], distances);
    for (std::size_t i = 1; i < curve.size(); ++i)
        CHECK(curve[i].received_dbm < curve[i - 1].received_dbm);
}

TEST_CASE("a gain mask reshapes the tag antenna response") {
    linkbudget::GainMask mask;
    mask.points = {{700e6, 0.0}, {1e9, 7.0}, {18e9, 7.0}};
    CHECK(mask.gain_at(500e6, 3.0) == doctest::Approx(0.0));
    CHECK(mask.gain_at(850e6, 3.0) == doctest::Approx(3.5));
    CHECK(mask.gain_at(5e9, 3.0) == doctest::Approx(7.0));
    linkbudget::GainMask flat;
    CHECK(flat.gain_at(5e9, 3.0) == doctest::Approx(3.0));

    ReverseLinkParams p;
    p.harmonics = {{500e6, -12.0}};
    const auto plain = linkbudget::reverse_range(p);
    p.tag_gain_mask = mask;  // 3 dBi below the mask's band edge drops to 0 dBi
    const auto masked = linkbudget::reverse_range(p);
    CHECK(masked[0].max_distance_m < plain[0].max_distance_m);
}
