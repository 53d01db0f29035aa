#pragma once

// Heat propagation of chart + remainder data: exact polynomial flow of the
// chart coefficients, spectral propagation of the remainder, and the
// inhomogeneous correction driven by the chart's promotion/annulus source.

#include <complex>
#include <vector>

#include "asympheat/fft.hpp"
#include "asympheat/grid.hpp"
#include "asympheat/spaces.hpp"

namespace asympheat {

struct ComplexTime {
    std::complex<double> z;
    double eps_margin = 1e-9; // required distance of arg z from +-pi/2

    void validate() const; // throws unless z == 0 or Re z > 0 with |arg z| <= pi/2 - eps
};

// a_k(t) = sum_j t^j tcoef[k-n][j]; degree(k) <= floor(k/2)
struct CoefficientFlow {
    int d = 3;
    int n = 0;
    int N = 0;
    int N_star = 0;
    int L_max = 0;
    std::vector<std::vector<SphereFunction>> tcoef;

    int degree(int k) const { return static_cast<int>(tcoef[k - n].size()) - 1; }
    SphereFunction coefficient_at(int k, double t) const;
    AsymptoticChart chart_at(double t) const;
};

// Exact ladder: da_k/dt = Lap_theta a_{k-2} + (k-2)(k-d) a_{k-2}, with a_j = 0
// for j < n; a_n and a_{n+1} are constant in t.
CoefficientFlow evolve_coefficients(const AsymptoticChart& chart);

// h(t) = sum_j t^j tcoef[j] on the grid: the two beyond-chart promotion tails
// plus the cutoff annulus terms 2 chi' d_r(a~) + (chi'' + (d-1)/r chi') a~.
struct DuhamelSource {
    std::vector<RemainderField> tcoef;

    RemainderField at(double t) const;
    int degree() const { return static_cast<int>(tcoef.size()) - 1; }
};

DuhamelSource assemble_source(const CoefficientFlow& flow, const CutoffSpec& cutoff,
                              const RemainderField& grid_like);

// exp(z * Laplacian) as a periodized Fourier multiplier exp(-z|xi|^2);
// the real-part convention applies (real fields stay real for real z).
RemainderField heat_apply(const RemainderField& f, const ComplexTime& z);
ComplexField heat_apply_complex(const RemainderField& f, std::complex<double> z);
// d/dx_axis of the propagated field (multiplier i xi_a exp(-z xi^2))
ComplexField heat_derivative_complex(const RemainderField& f, std::complex<double> z, int axis);

// int_0^t exp((t-s) Lap) h(s) ds; the time integral is exact per Fourier
// mode (h is polynomial in s), so composition over subintervals is too.
RemainderField duhamel_integral(const DuhamelSource& h, double t);

// Full semigroup on chart + remainder data (real time).
AsymptoticFunction semigroup_apply(const AsymptoticFunction& v, double t);

// Generator: chart ladder shifted two slots + spectral Laplacian + h(0).
AsymptoticFunction generator_apply(const AsymptoticFunction& v);

struct NonsmoothingReport {
    // max over checked times of |a_k(t) - b_k| for k = n, n+1 (exact zeros)
    double frozen_drift = 0.0;
    // max drift across the higher coefficients (generically nonzero)
    double higher_drift = 0.0;
};
NonsmoothingReport nonsmoothing_check(const AsymptoticChart& chart,
                                      const std::vector<double>& times);

struct GrowthBoundReport {
    std::vector<double> times;
    std::vector<double> norms;   // per time, sampled operator norm proxy
    double fitted_exponent = 0.0; // log-log slope over the largest times
};

// Fits the large-t growth of ||S(t)v|| / ||v|| for the given sample; the norm
// is the full asymptotic norm when the chart is nonempty, else the weighted
// remainder norm with the supplied delta.
GrowthBoundReport growth_bound_harness(const AsymptoticFunction& v, int m, double p,
                                       double delta, const std::vector<double>& times);

struct DerivativeEstimateReport {
    std::vector<double> times;
    std::vector<double> grad_norms; // || grad S(t) f ||_{L^p_delta}
    double fitted_rate = 0.0;       // positive rate of the t^{-1/2} law
};
DerivativeEstimateReport derivative_estimate_harness(const RemainderField& f, double p,
                                                     double delta,
                                                     const std::vector<double>& times);

struct SemigroupPropertyReport {
    double remainder_error = 0.0; // chart-free composition error, L^2
    double full_error = 0.0;      // asymptotic-norm composition error
};
SemigroupPropertyReport semigroup_property_check(const AsymptoticFunction& v, double t1,
                                                 double t2, int m, double p);

// max_z |CR residual| of z -> S(z)f at a complex time, via centered complex
// differences in two directions (analyticity proxy)
double cauchy_riemann_residual(const RemainderField& f, std::complex<double> z, double step);

} // namespace asympheat
