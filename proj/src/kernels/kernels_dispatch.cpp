#include "tdh/kernels.hpp"

#include <cstdlib>
#include <cstring>
#include <string>

#include "tdh/errors.hpp"

namespace tdh::kernels {

namespace detail {
double dot_scalar(std::span<const double>, std::span<const double>);
void multiply_scalar(std::span<const double>, std::span<const double>, std::span<double>);
void clip_shift_scalar(std::span<const double>, double, std::span<double>);
void complex_power_scalar(std::span<const std::complex<double>>, double, std::span<double>);
void fir_decimate_scalar(std::span<const double>, std::span<const double>, std::size_t,
                         std::span<double>);
#if defined(TDH_HAVE_AVX2)
double dot_avx2(std::span<const double>, std::span<const double>);
void multiply_avx2(std::span<const double>, std::span<const double>, std::span<double>);
void clip_shift_avx2(std::span<const double>, double, std::span<double>);
void complex_power_avx2(std::span<const std::complex<double>>, double, std::span<double>);
void fir_decimate_avx2(std::span<const double>, std::span<const double>, std::size_t,
                       std::span<double>);
#endif
}  // namespace detail

namespace {

struct Table {
    double (*dot)(std::span<const double>, std::span<const double>);
    void (*multiply)(std::span<const double>, std::span<const double>, std::span<double>);
    void (*clip_shift)(std::span<const double>, double, std::span<double>);
    void (*complex_power)(std::span<const std::complex<double>>, double, std::span<double>);
    void (*fir_decimate)(std::span<const double>, std::span<const double>, std::size_t,
                         std::span<double>);
};

constexpr Table kScalar = {
    detail::dot_scalar,        detail::multiply_scalar,     detail::clip_shift_scalar,
    detail::complex_power_scalar, detail::fir_decimate_scalar,
};

#if defined(TDH_HAVE_AVX2)
constexpr Table kAvx2 = {
    detail::dot_avx2,        detail::multiply_avx2,     detail::clip_shift_avx2,
    detail::complex_power_avx2, detail::fir_decimate_avx2,
};
#endif

bool avx2_available() {
#if defined(TDH_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Backend detect() {
    if (const char* env = std::getenv("TDH_KERNELS")) {
        if (std::strcmp(env, "scalar") == 0) return Backend::Scalar;
        if (std::strcmp(env, "avx2") == 0) {
            if (!avx2_available())
                throw InvalidInput("TDH_KERNELS=avx2 requested but AVX2 is not available");
            return Backend::Avx2;
        }
        // anything else (including "auto") falls through to detection
    }
    return avx2_available() ? Backend::Avx2 : Backend::Scalar;
}

struct State {
    Backend backend;
    const Table* table;
    State() { set(detect()); }
    void set(Backend b) {
        backend = b;
#if defined(TDH_HAVE_AVX2)
        table = (b == Backend::Avx2) ? &kAvx2 : &kScalar;
#else
        table = &kScalar;
#endif
    }
};

State& state() {
    static State s;
    return s;
}

}  // namespace

Backend active() { return state().backend; }

const char* backend_name(Backend b) {
    switch (b) {
        case Backend::Scalar: return "scalar";
        case Backend::Avx2: return "avx2";
    }
    return "?";
}

void force_backend(Backend b) {
    if (b == Backend::Avx2 && !avx2_available())
        throw InvalidInput("AVX2 backend not available on this CPU/build");
    state().set(b);
}

void reset_backend() { state().set(detect()); }

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw InvalidInput("kernels::dot: size mismatch");
    return state().table->dot(a, b);
}

void multiply(std::span<const double> a, std::span<const double> b, std::span<double> out) {
    if (a.size() != b.size() || a.size() != out.size())
        throw InvalidInput("kernels::multiply: size mismatch");
    state().table->multiply(a, b, out);
}

void clip_shift(std::span<const double> in, double floor, std::span<double> out) {
    if (in.size() != out.size()) throw InvalidInput("kernels::clip_shift: size mismatch");
    state().table->clip_shift(in, floor, out);
}

void complex_power(std::span<const std::complex<double>> x, double scale, std::span<double> out) {
    if (x.size() != out.size()) throw InvalidInput("kernels::complex_power: size mismatch");
    state().table->complex_power(x, scale, out);
}

void fir_decimate(std::span<const double> in, std::span<const double> taps, std::size_t decim,
                  std::span<double> out) {
    if (decim == 0 || taps.empty()) throw InvalidInput("kernels::fir_decimate: bad arguments");
    if (out.empty()) return;
    if (in.size() < (out.size() - 1) * decim + taps.size())
        throw InvalidInput("kernels::fir_decimate: input too short");
    state().table->fir_decimate(in, taps, decim, out);
}

}  // namespace tdh::kernels
