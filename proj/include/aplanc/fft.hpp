#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace aplanc {

/// Unnormalized forward DFT, X[k] = sum_n x[n] exp(-2*pi*i*k*n/nfft).
/// Input shorter than nfft is zero-padded; longer input is an error.
std::vector<std::complex<double>> dft_forward(const std::vector<std::complex<double>>& x,
                                              std::size_t nfft);

/// Forward DFT of a real signal; returns all nfft bins.
std::vector<std::complex<double>> dft_forward_real(const std::vector<double>& x,
                                                   std::size_t nfft);

std::size_t next_pow2(std::size_t n);

} // namespace aplanc
