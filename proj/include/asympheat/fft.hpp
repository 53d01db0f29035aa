#pragma once

// Thin FFTW wrapper: d-dimensional complex transforms on centered boxes plus
// Fourier-multiplier application. Wavenumbers follow the periodization of the
// box, xi_a = 2*pi*m/(n_a*h) with m in [-n_a/2, n_a/2).

#include <complex>
#include <functional>
#include <vector>

#include "asympheat/grid.hpp"

namespace asympheat {

using cplx = std::complex<double>;

// Unnormalized forward DFT of `in` (row-major, shape as given); out = FFT(in).
void fft_forward(const std::vector<int>& shape, std::vector<cplx>& buf);
// Unnormalized inverse DFT (caller divides by N).
void fft_inverse(const std::vector<int>& shape, std::vector<cplx>& buf);

// In-place 1-D transforms used by the sphere longitude analysis.
void fft_forward_1d(std::vector<cplx>& buf);
void fft_inverse_1d(std::vector<cplx>& buf);

// Squared wavenumber |xi|^2 table for a field's periodization (row-major).
std::vector<double> xi_squared(const RemainderField& f);
// Wavenumber component along axis `a` for each flat index.
std::vector<double> xi_component(const RemainderField& f, int a);

// out = Re IFFT( mult(flat spectral index) * FFT(f) ); multiplier indexed by
// flat position in spectral (same row-major layout as the field).
RemainderField apply_multiplier(const RemainderField& f,
                                const std::function<cplx(std::size_t)>& mult);
ComplexField apply_multiplier_complex(const RemainderField& f,
                                      const std::function<cplx(std::size_t)>& mult);

// Spectral Laplacian (multiplier -|xi|^2). Exact inverse of spectral_inverse
// on mean-free fields.
RemainderField spectral_laplacian(const RemainderField& f);
// Solves Laplacian(u) = f spectrally with the zero mode dropped; the returned
// field has zero grid mean. The mean of f is ignored (caller guarantees it is
// negligible or handles it separately).
RemainderField spectral_poisson(const RemainderField& f);

} // namespace asympheat
