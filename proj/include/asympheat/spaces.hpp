#pragma once

// Function spaces: weighted Sobolev norms on centered boxes, asymptotic
// charts a_k(theta)/r^k glued by a radial cutoff, and the combined
// chart + remainder representation with its norm and (de)serialization.

#include <optional>
#include <string>
#include <vector>

#include "asympheat/grid.hpp"
#include "asympheat/sphere.hpp"

namespace asympheat {

// Unique integer N* with N-1 < N* - d/p <= N. Equals N exactly when d < p.
int n_star(int N, int d, double p);

struct CutoffSpec {
    enum class Kind { polynomial, bump };
    Kind kind = Kind::polynomial;
    double r0 = 1.0; // identically 0 on [0, r0]
    double r1 = 2.0; // identically 1 on [r1, inf)

    double value(double r) const;
    double d1(double r) const; // d chi / dr
    double d2(double r) const; // d^2 chi / dr^2
};

double cutoff_eval(const CutoffSpec& c, double r);

struct AsymptoticChart {
    int d = 3;
    int n = 0;       // leading power
    int N = 0;       // decay order of the remainder class
    int N_star = 0;  // last retained coefficient index
    int L_max = 0;
    // coeffs[k - n] is a_k, for k = n..N_star
    std::vector<SphereFunction> coeffs;
    // bookkeeping only: the smoothness order attached to a_k in the norm
    std::vector<int> reg_ladder; // reg_ladder[k-n] = m + 1 + N_star - k once a NormSpec m is fixed

    int count() const { return N_star - n + 1; }
    const SphereFunction& a(int k) const { return coeffs[k - n]; }
    SphereFunction& a(int k) { return coeffs[k - n]; }
};

AsymptoticChart make_chart(int d, int n, int N, double p, int L_max);

struct AsymptoticFunction {
    AsymptoticChart chart;
    CutoffSpec cutoff;
    RemainderField f;
};

// chi(|x|) * sum_k a_k(x/|x|) |x|^-k + multilinear interp of f; the chart
// term is taken as 0 at x = 0 (inside the cutoff's dead zone anyway).
double eval_asymptotic(const AsymptoticFunction& v, const std::vector<double>& x);

// Samples only the chart part chi * sum a_k / r^k onto a grid.
RemainderField sample_chart(const AsymptoticChart& chart, const CutoffSpec& cutoff,
                            const RemainderField& grid_like);

struct NormSpec {
    enum class Family { H, W, A };
    Family family = Family::H;
    int m = 0;        // derivative order, capped at 4
    double p = 2.0;   // runtime real, 1 < p < inf
    double weight = 0.0; // delta for H, base delta for W (per-alpha weight delta+|alpha|)
    // A-family parameters
    int n = 0;
    int N = 0;
    int N_star = 0;
};

// Default W-family base weight gamma0: (1-d/p)/2 when p > d, otherwise the
// midpoint choice 1/2 - d/p so that 0 < gamma0 + d/p < 1 always holds.
double default_gamma0(int d, double p);

// sum over |alpha| <= m of the trapezoid L^p norm of <x>^w(alpha) d^alpha f,
// derivatives by order-4 centered stencils (one-sided near the boundary).
double weighted_norm(const RemainderField& f, const NormSpec& spec);

// Chart Sobolev ladder + weighted remainder norm with delta = N.
double asymptotic_norm(const AsymptoticFunction& v, int m, double p);

// d^alpha f on the grid (order-4 stencils); alpha has d entries.
RemainderField fd_partial(const RemainderField& f, const std::vector<int>& alpha);

struct WeightInequalityReport {
    double max_ratio = 0.0;   // max over samples of <x>^d <y>^-d / <x-y>^|d|
    double bound = 0.0;       // 2^{|delta|/2}
    bool within_bound = false;
};
WeightInequalityReport weight_inequality_check(int d, double delta, int n_samples,
                                               std::uint64_t seed);

// External formats ("asympheat-field/1"): <base>.json header + <base>.f64
// little-endian doubles; charts as standalone JSON.
void serialize_field(const RemainderField& f, const std::string& base_path);
RemainderField deserialize_field(const std::string& base_path);
void serialize_chart(const AsymptoticChart& chart, const std::string& json_path);
AsymptoticChart deserialize_chart(const std::string& json_path);
// Bundle: field header JSON gains "chart" and "cutoff" keys.
void serialize_asymptotic(const AsymptoticFunction& v, const std::string& base_path);
AsymptoticFunction deserialize_asymptotic(const std::string& base_path);

} // namespace asympheat
