#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

// Thin FFTW wrapper. Plans are created with FFTW_ESTIMATE under a global lock,
// so these functions may be called from several threads at once.
namespace htpv::fft {

using Complex = std::complex<double>;

/// Unnormalized forward DFT: X[k] = sum_n x[n] exp(-2πi kn/N).
std::vector<Complex> forward(std::span<const Complex> x);

/// Inverse DFT including the 1/N factor, so inverse(forward(x)) == x.
std::vector<Complex> inverse(std::span<const Complex> X);

/// Forward DFT of a real sequence zero-padded to `length` (>= x.size()).
/// Returns the one-sided spectrum of length/2 + 1 bins.
std::vector<Complex> forward_real(std::span<const double> x, std::size_t length);

}  // namespace htpv::fft
