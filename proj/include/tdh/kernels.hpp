#pragma once

#include <complex>
#include <cstddef>
#include <span>

// Data-parallel inner loops used by the spectral and fingerprinting code.
// Every kernel has a scalar reference implementation and (on x86-64) an AVX2
// variant; the backend is picked once at startup from CPUID, overridable with
// TDH_KERNELS=scalar|avx2|auto.  tests/test_kernels.cpp checks the variants
// against the scalar reference on random inputs.

namespace tdh::kernels {

enum class Backend { Scalar, Avx2 };

Backend active();
const char* backend_name(Backend b);

// Force a backend (tests only).  Throws InvalidInput if unavailable on this
// machine.
void force_backend(Backend b);
void reset_backend();  // back to auto-detect + env override

// sum_i a[i]*b[i]
double dot(std::span<const double> a, std::span<const double> b);

// out[i] = a[i]*b[i]
void multiply(std::span<const double> a, std::span<const double> b, std::span<double> out);

// out[i] = max(in[i] - floor, 0)
void clip_shift(std::span<const double> in, double floor, std::span<double> out);

// out[i] = scale * |x[i]|^2
void complex_power(std::span<const std::complex<double>> x, double scale, std::span<double> out);

// Polyphase-free FIR decimator: out[n] = sum_t taps[t] * in[n*decim + t].
// Caller guarantees in.size() >= (out.size()-1)*decim + taps.size().
void fir_decimate(std::span<const double> in, std::span<const double> taps, std::size_t decim,
                  std::span<double> out);

}  // namespace tdh::kernels
