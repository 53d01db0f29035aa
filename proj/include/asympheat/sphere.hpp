#pragma once

// Real harmonic analysis on S^{d-1} for d in {2,3}.
//
// Mode ordering (see docs/modes.md):
//   d=2: index 0 is the constant mode 1/sqrt(2*pi); for l >= 1, index 2l-1 is
//        cos(l*phi)/sqrt(pi) and index 2l is sin(l*phi)/sqrt(pi).
//   d=3: modes are grouped by degree l; within degree l the order is
//        sin(l*phi)..sin(phi), m=0, cos(phi)..cos(l*phi), i.e. index
//        l^2 + (m+l) for m in [-l, l]. All bases are orthonormal in L^2 of
//        the surface measure.

#include <cstdint>
#include <random>
#include <vector>

namespace asympheat {

struct SphereFunction {
    int d = 3;      // ambient dimension; the sphere is S^{d-1}
    int L_max = 0;  // highest retained degree
    std::vector<double> coeffs;

    static int mode_count(int d, int L_max);
    static int degree_of_mode(int d, int mode);

    double& c(int mode) { return coeffs[mode]; }
    double c(int mode) const { return coeffs[mode]; }

    // pointwise evaluation at a unit direction (size-d vector)
    double eval(const double* dir) const;

    double l2_norm() const; // sqrt of sum of squares (orthonormal basis)
};

SphereFunction make_sphere_function(int d, int L_max);
SphereFunction random_sphere_function(int d, int L_max, std::mt19937_64& rng);

// Evaluates all basis functions at a unit direction into `out`
// (size mode_count(d, L_max)).
void sphere_basis(int d, int L_max, const double* dir, std::vector<double>& out);

// -l(l+d-2), the Laplace-Beltrami eigenvalue at degree l
double lb_eigenvalue(int d, int l);

// Quadrature grid resolving degree <= L_max exactly (products of two basis
// functions integrate exactly). d=2: equispaced angles; d=3: Gauss-Legendre
// colatitudes x equispaced longitudes, longitude sums by FFT.
struct SphereGrid {
    int d = 3;
    int L_max = 0;
    // d=2: n_theta = 1 ring with n_phi angles; d=3: n_theta colatitudes
    int n_theta = 0;
    int n_phi = 0;
    std::vector<double> ct;       // cos(theta) nodes (d=3), size n_theta
    std::vector<double> wt;       // colatitude weights (d=3)
    // per-node normalized associated Legendre table (d=3):
    // legendre[i][tri(l,m)] with tri(l,m) = l*(l+1)/2 + m
    std::vector<std::vector<double>> legendre;

    std::size_t node_count() const;
    // direction of quadrature node (i = colatitude index, j = longitude index)
    void node_direction(int i, int j, double* dir) const;
    double node_weight(int i) const; // weight is longitude independent
};

SphereGrid make_sphere_grid(int d, int L_max);

// samples indexed [i*n_phi + j] (d=3) or [j] (d=2)
SphereFunction analyze(const SphereGrid& g, const std::vector<double>& samples, int L_max);
std::vector<double> synthesize(const SphereGrid& g, const SphereFunction& a);

SphereFunction laplace_beltrami(const SphereFunction& a);
// (-Laplace_Beltrami)^{power/2} as a spectral multiplier, integer power >= 0
SphereFunction lb_halfpower(const SphereFunction& a, int power);

// Sobolev norm of order l on the sphere. p = 2 uses the exact spectral form
// (sum over modes of (1+lambda)^l |c|^2)^{1/2}; p != 2 uses a documented
// surrogate: sum over j <= l of quadrature L^p norms of (-Laplace)^{j/2} a.
double sphere_sobolev_norm(const SphereFunction& a, int order, double p);

// Gauss-Legendre nodes/weights on (-1, 1)
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

} // namespace asympheat
