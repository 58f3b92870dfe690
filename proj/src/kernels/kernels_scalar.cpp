#include <complex>
#include <cstddef>
#include <span>

// Scalar reference kernels.  These define the semantics; the SIMD variants
// must agree with them to floating-point roundoff.

namespace tdh::kernels::detail {

double dot_scalar(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    const std::size_t n = a.size();
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void multiply_scalar(std::span<const double> a, std::span<const double> b, std::span<double> out) {
    const std::size_t n = a.size();
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void clip_shift_scalar(std::span<const double> in, double floor, std::span<double> out) {
    const std::size_t n = in.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double v = in[i] - floor;
        out[i] = v > 0.0 ? v : 0.0;
    }
}

void complex_power_scalar(std::span<const std::complex<double>> x, double scale,
                          std::span<double> out) {
    const std::size_t n = x.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double re = x[i].real();
        const double im = x[i].imag();
        out[i] = scale * (re * re + im * im);
    }
}

void fir_decimate_scalar(std::span<const double> in, std::span<const double> taps,
                         std::size_t decim, std::span<double> out) {
    const std::size_t n_taps = taps.size();
    const std::size_t n_out = out.size();
    for (std::size_t n = 0; n < n_out; ++n) {
        const double* base = in.data() + n * decim;
        double acc = 0.0;
        for (std::size_t t = 0; t < n_taps; ++t) acc += taps[t] * base[t];
        out[n] = acc;
    }
}

}  // namespace tdh::kernels::detail
