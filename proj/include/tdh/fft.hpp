#pragma once

#include <complex>
#include <vector>

namespace tdh::fft {

// In-place iterative radix-2 Cooley-Tukey, forward transform (sign -1).
// data.size() must be a power of two.
void forward(std::vector<std::complex<double>>& data);

// Forward transform of a real signal; returns the full complex spectrum.
std::vector<std::complex<double>> forward_real(const std::vector<double>& x);

bool is_pow2(std::size_t n);
std::size_t floor_pow2(std::size_t n);

}  // namespace tdh::fft
