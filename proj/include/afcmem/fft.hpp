#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace afcmem::fft {

using cvec = std::vector<std::complex<double>>;

/// Sign of the exponent in the transform kernel.
enum class Sign { negative, positive };

/// In-place unnormalized DFT: X_k = sum_n x_n exp(sign * 2 pi i k n / N).
/// Any length is accepted; powers of two are fastest.
void transform(cvec& data, Sign sign);

/// Forward transform with the e^{-i} kernel.
inline void forward(cvec& data) { transform(data, Sign::negative); }

/// Inverse of forward(), including the 1/N normalization.
void inverse(cvec& data);

std::size_t next_pow2(std::size_t n);

/// Frequency of DFT bin k for n samples spaced dt apart, in (-1/2dt, 1/2dt].
double bin_frequency(std::size_t k, std::size_t n, double dt);

}  // namespace afcmem::fft
