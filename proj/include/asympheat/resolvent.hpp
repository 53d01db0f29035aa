#pragma once

// Resolvent of the Laplacian off the negative real axis: Hankel-function
// kernels, the two Schur bound integrals, sector geometry, and the spectral
// application path (lambda + |xi|^2)^{-1}.

#include <complex>

#include "asympheat/fft.hpp"
#include "asympheat/grid.hpp"

namespace asympheat {

// H^(1)_nu(z) for real nu >= 0 and complex z with |arg z| < pi, z != 0.
// Half-integer nu use closed forms; otherwise an ascending series for
// |z| <= 10 and the large-argument asymptotic expansion beyond.
std::complex<double> hankel1(double nu, std::complex<double> z);

// Free resolvent kernel K_lambda(s) at separation s = |x-y| > 0:
//   (i/4) (i sqrt(lambda) / (2 pi s))^nu H^(1)_nu(i sqrt(lambda) s),
// nu = (d-2)/2, principal sqrt (Re sqrt(lambda) > 0). lambda must avoid
// the closed negative real axis.
std::complex<double> resolvent_kernel(int d, std::complex<double> lambda, double s);
// Always takes the Hankel route, any d >= 2 (cross-check path for d = 3).
std::complex<double> resolvent_kernel_hankel(int d, std::complex<double> lambda, double s);

// sqrt with the resolvent branch; throws if lambda is on (-inf, 0]
std::complex<double> resolvent_sqrt(std::complex<double> lambda);

struct SectorPoint {
    std::complex<double> lambda;
    double omega = 0.0; // sector vertex (>= 0)
    double eps = 0.1;   // angular margin

    // true when lambda != omega and |arg(lambda - omega)| < pi - eps
    bool inside() const;
};

struct SchurIntegrals {
    double I1 = 0.0; // near part, r in (0, 1/Re sqrt(lambda))
    double I2 = 0.0; // tail
    double bound_ratio = 0.0; // |lambda| * (I1 + I2)
};

// Weighted Hankel-magnitude integrals
//   |lambda|^{nu/2} * int (1+r^2)^{|delta|/2} r^{d-1-nu} |H^(1)_nu(i sqrt(lambda) r)| dr
// split at r = 1/Re sqrt(lambda).
SchurIntegrals schur_integrals(std::complex<double> lambda, double delta, int d);

// Spectral application: R(lambda) f with multiplier (lambda + |xi|^2)^{-1}.
ComplexField resolvent_apply(const RemainderField& f, std::complex<double> lambda);

// (lambda - Lap) R(lambda) f - f, computed through two separate spectral
// round trips; reports the L^2 norm of the residual.
double resolvent_identity_residual(const RemainderField& f, std::complex<double> lambda);

} // namespace asympheat
