// AVX2 + FMA variants of the hot loops.  This translation unit is the only
// one compiled with -mavx2 -mfma; it must not be entered unless CPUID reports
// AVX2 (the dispatcher guarantees that).

#include <immintrin.h>

#include <complex>
#include <cstddef>
#include <span>

namespace tdh::kernels::detail {

static inline double hsum256(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d swap = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, swap));
}

double dot_avx2(std::span<const double> a, std::span<const double> b) {
    const std::size_t n = a.size();
    const double* pa = a.data();
    const double* pb = b.data();
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(pa + i), _mm256_loadu_pd(pb + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(pa + i + 4), _mm256_loadu_pd(pb + i + 4), acc1);
    }
    double acc = hsum256(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += pa[i] * pb[i];
    return acc;
}

void multiply_avx2(std::span<const double> a, std::span<const double> b, std::span<double> out) {
    const std::size_t n = a.size();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(out.data() + i, _mm256_mul_pd(_mm256_loadu_pd(a.data() + i),
                                                       _mm256_loadu_pd(b.data() + i)));
    }
    for (; i < n; ++i) out[i] = a[i] * b[i];
}

void clip_shift_avx2(std::span<const double> in, double floor, std::span<double> out) {
    const std::size_t n = in.size();
    const __m256d vfloor = _mm256_set1_pd(floor);
    const __m256d vzero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d v = _mm256_sub_pd(_mm256_loadu_pd(in.data() + i), vfloor);
        _mm256_storeu_pd(out.data() + i, _mm256_max_pd(v, vzero));
    }
    for (; i < n; ++i) {
        const double v = in[i] - floor;
        out[i] = v > 0.0 ? v : 0.0;
    }
}

void complex_power_avx2(std::span<const std::complex<double>> x, double scale,
                        std::span<double> out) {
    const std::size_t n = x.size();
    const double* p = reinterpret_cast<const double*>(x.data());
    const __m256d vscale = _mm256_set1_pd(scale);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        // Four complex values = eight doubles (re0 im0 re1 im1 | re2 im2 re3 im3).
        __m256d c01 = _mm256_loadu_pd(p + 2 * i);
        __m256d c23 = _mm256_loadu_pd(p + 2 * i + 4);
        __m256d sq01 = _mm256_mul_pd(c01, c01);
        __m256d sq23 = _mm256_mul_pd(c23, c23);
        // hadd within 128-bit lanes: [re0+im0, re2+im2, re1+im1, re3+im3] after permute fix
        __m256d sums = _mm256_hadd_pd(sq01, sq23);              // [m0, m2, m1, m3]
        sums = _mm256_permute4x64_pd(sums, _MM_SHUFFLE(3, 1, 2, 0));  // [m0, m1, m2, m3]
        _mm256_storeu_pd(out.data() + i, _mm256_mul_pd(sums, vscale));
    }
    for (; i < n; ++i) {
        const double re = x[i].real();
        const double im = x[i].imag();
        out[i] = scale * (re * re + im * im);
    }
}

void fir_decimate_avx2(std::span<const double> in, std::span<const double> taps,
                       std::size_t decim, std::span<double> out) {
    const std::size_t n_taps = taps.size();
    const std::size_t n_out = out.size();
    for (std::size_t n = 0; n < n_out; ++n) {
        const double* base = in.data() + n * decim;
        __m256d acc0 = _mm256_setzero_pd();
        __m256d acc1 = _mm256_setzero_pd();
        std::size_t t = 0;
        for (; t + 8 <= n_taps; t += 8) {
            acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(taps.data() + t), _mm256_loadu_pd(base + t),
                                   acc0);
            acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(taps.data() + t + 4),
                                   _mm256_loadu_pd(base + t + 4), acc1);
        }
        double acc = hsum256(_mm256_add_pd(acc0, acc1));
        for (; t < n_taps; ++t) acc += taps[t] * base[t];
        out[n] = acc;
    }
}

}  // namespace tdh::kernels::detail
