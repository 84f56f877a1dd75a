#ifndef GLODISMO_FFT_HPP
#define GLODISMO_FFT_HPP

#include <complex>
#include <cstddef>

namespace glodismo {

/// Real-to-complex FFT of length n; out has n/2+1 entries.
void fft_r2c(std::size_t n, const double* in, std::complex<double>* out);

/// Complex-to-real inverse FFT of length n, normalized by 1/n.
void fft_c2r(std::size_t n, const std::complex<double>* in, double* out);

}  // namespace glodismo

#endif
