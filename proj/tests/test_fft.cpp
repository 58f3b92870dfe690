#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "tdh/errors.hpp"
#include "tdh/fft.hpp"
#include "tdh/rng.hpp"

using namespace tdh;

namespace {

// O(n^2) reference DFT.
std::vector<std::complex<double>> naive_dft(const std::vector<std::complex<double>>& x) {
    const std::size_t n = x.size();
    std::vector<std::complex<double>> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::complex<double> acc{0.0, 0.0};
        for (std::size_t m = 0; m < n; ++m) {
            const double phase = -2.0 * M_PI * static_cast<double>(k * m) / n;
            acc += x[m] * std::complex<double>(std::cos(phase), std::sin(phase));
        }
        out[k] = acc;
    }
    return out;
}

}  // namespace

TEST_CASE("fft matches the naive DFT on random data") {
    for (std::size_t n : {2, 8, 64, 256}) {
        SplitMix64 rng(n);
        std::vector<std::complex<double>> x(n);
        for (auto& c : x) c = {2.0 * rng.next_double() - 1.0, 2.0 * rng.next_double() - 1.0};
        auto want = naive_dft(x);
        auto got = x;
        fft::forward(got);
        for (std::size_t k = 0; k < n; ++k)
            CHECK(std::abs(got[k] - want[k]) < 1e-9 * (1.0 + std::abs(want[k])));
    }
}

TEST_CASE("fft of a bin-centered tone concentrates in one bin pair") {
    const std::size_t n = 1024;
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = std::cos(2.0 * M_PI * 37.0 * i / n);
    auto bins = fft::forward_real(x);
    CHECK(std::abs(bins[37]) == doctest::Approx(n / 2.0).epsilon(1e-9));
    for (std::size_t k = 1; k < n / 2; ++k) {
        if (k == 37) continue;
        CHECK(std::abs(bins[k]) < 1e-7 * n);
    }
}

TEST_CASE("fft satisfies Parseval") {
    const std::size_t n = 4096;
    SplitMix64 rng(7);
    std::vector<double> x(n);
    double time_energy = 0.0;
    for (auto& v : x) {
        v = 2.0 * rng.next_double() - 1.0;
        time_energy += v * v;
    }
    auto bins = fft::forward_real(x);
    double freq_energy = 0.0;
    for (const auto& b : bins) freq_energy += std::norm(b);
    CHECK(freq_energy / n == doctest::Approx(time_energy).epsilon(1e-12));
}

TEST_CASE("fft rejects non power-of-two lengths") {
    std::vector<std::complex<double>> x(100);
    CHECK_THROWS_AS(fft::forward(x), InvalidInput);
}

TEST_CASE("pow2 helpers") {
    CHECK(fft::is_pow2(1));
    CHECK(fft::is_pow2(16384));
    CHECK(!fft::is_pow2(0));
    CHECK(!fft::is_pow2(12345));
    CHECK(fft::floor_pow2(16384) == 16384);
    CHECK(fft::floor_pow2(16385) == 16384);
    CHECK(fft::floor_pow2(35000) == 32768);
}
