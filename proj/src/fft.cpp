#include "tdh/fft.hpp"

#include <cmath>

#include "tdh/errors.hpp"

namespace tdh::fft {

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t floor_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p * 2 <= n) p *= 2;
    return p;
}

void forward(std::vector<std::complex<double>>& data) {
    const std::size_t n = data.size();
    if (!is_pow2(n)) throw InvalidInput("fft::forward requires a power-of-two length");
    if (n < 2) return;

    // Bit-reversal permutation.
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(data[i], data[j]);
    }

    // Twiddle table for the largest stage; smaller stages stride through it.
    const std::size_t half = n / 2;
    std::vector<std::complex<double>> tw(half);
    const double step = -2.0 * 3.14159265358979323846 / static_cast<double>(n);
    for (std::size_t k = 0; k < half; ++k)
        tw[k] = std::complex<double>(std::cos(step * k), std::sin(step * k));

    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t stride = n / len;
        const std::size_t half_len = len / 2;
        for (std::size_t base = 0; base < n; base += len) {
            for (std::size_t k = 0; k < half_len; ++k) {
                const std::complex<double> w = tw[k * stride];
                const std::complex<double> u = data[base + k];
                const std::complex<double> v = data[base + k + half_len] * w;
                data[base + k] = u + v;
                data[base + k + half_len] = u - v;
            }
        }
    }
}

std::vector<std::complex<double>> forward_real(const std::vector<double>& x) {
    std::vector<std::complex<double>> data(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) data[i] = x[i];
    forward(data);
    return data;
}

}  // namespace tdh::fft
