#pragma once

// The d=3 model problem u_t = Lap u + phi - psi u^3: equilibrium solve with
// far-field chart extraction, time stepping in chart + remainder form,
// structural checks (eigen-coefficients, maximum principle, genericity), and
// the mild-solution fixed-point iteration.

#include <cstdint>
#include <random>
#include <vector>

#include "asympheat/grid.hpp"
#include "asympheat/heatflow.hpp"
#include "asympheat/spaces.hpp"

namespace asympheat {

struct SemilinearProblem {
    RemainderField phi; // source, decaying
    RemainderField psi; // absorption coefficient, >= 0, decaying
    int N = 2;          // chart depth (coefficients k = 1..N)
    int L_max = 4;
    double p = 4.0;     // requires p > 3 so that N_star = N
    CutoffSpec cutoff;
    double newton_tol = 1e-8;
    int max_newton = 50;
    double cg_tol = 1e-12;
    int cg_max_iter = 400;

    void validate() const;
};

struct EquilibriumResult {
    AsymptoticFunction u_star;
    double residual_l2 = 0.0;
    int newton_iters = 0;
    bool converged = false;
    std::vector<double> residual_history;
    std::vector<double> purity; // per k = 1..N_star, spectral mass fraction in degree k-1
    bool moment_noise_warning = false;
};

// Solid-harmonic moment extraction of the far-field chart of Lap^{-1} rho:
// a_k spans only degree k-1; the discrete Gram system between the chart
// annulus sources and the moments makes the corrected source's grid moments
// vanish exactly, provided the same cutoff is used for the subtraction.
// noise_fraction (optional) reports the largest relative deviation from the
// continuum normalization -1/(2k-1), a quadrature-noise proxy.
AsymptoticChart multipole_extract(const RemainderField& rho, int N, int L_max, double p,
                                  double* noise_fraction = nullptr, CutoffSpec cutoff = {});

// Annulus source Lap(chi * chart) sampled on the grid (the chart part is
// harmonic away from the annulus for eigen-charts).
RemainderField chart_annulus_source(const AsymptoticChart& chart, const CutoffSpec& cutoff,
                                    const RemainderField& grid_like);

// Damped Newton with chart re-extraction per cycle; inner CG on
// (-Lap + 3 psi u^2) preconditioned by a spectral shift inverse.
EquilibriumResult equilibrium_solve(const SemilinearProblem& prob);

// Fraction of each a_k's spectral mass lying in the degree k-1 eigenspace of
// the sphere Laplacian (eigenvalue -(k-1)k at d=3).
std::vector<double> eigenfunction_check(const AsymptoticChart& chart);

struct MaxPrincipleReport {
    double sup_u = 0.0;
    double sup_linear = 0.0;   // sup |Lap^{-1} phi| via the Newtonian oracle
    bool bound_holds = false;  // sup_u <= 2 sup_linear + slack
    double sphere_monotonicity_defect = 0.0; // max increase of M(R) outside the source
};
MaxPrincipleReport max_principle_checks(const EquilibriumResult& eq,
                                        const SemilinearProblem& prob);

// One Strang step of length dt starting at time t0: exact half-steps of the
// heat flow on the remainder, explicit midpoint for the reaction
// h(t) + phi - psi u^3; the chart coefficients follow their exact polynomial
// flow. State is advanced in place.
struct FlowState {
    AsymptoticFunction u;
    double t = 0.0;
    double t_base = 0.0; // time the cached polynomials are centered at
    // cached per-chart data, valid for the whole trajectory (the chart flow
    // is exact, so the cache never needs rebuilding)
    CoefficientFlow flow;
    DuhamelSource source;          // h(t) polynomial in t - t_base; empty for zero charts
    std::vector<RemainderField> chart_fields; // chi*a~(t) as polynomial in t - t_base
};

FlowState make_flow_state(const AsymptoticFunction& v);

void semilinear_step(FlowState& st, const SemilinearProblem& prob, double dt);

struct FlowMonitors {
    std::vector<double> times;
    std::vector<double> lp_norm;    // ||u||_{L^p_delta} on the box
    std::vector<double> sup;        // ||u||_inf
    std::vector<double> coeff_drift; // max drift of the frozen coefficients k = n, n+1
};

FlowMonitors flow(FlowState& st, const SemilinearProblem& prob, double T, double dt,
                  double monitor_p, double monitor_delta, int monitor_stride = 1);

struct GenericityReport {
    int trials = 0;
    int all_nonzero = 0;         // perturbed trials with every |a_k| above threshold, k <= k_check
    std::vector<int> zero_flags; // per k = 1..k_check, perturbed trials with a_k below threshold
    bool base_degenerate = false; // unperturbed base has a vanishing a_k for some k in [2, k_check]
};
// threshold is relative to the trial's |a_1|; perturbations are mean-zero
// Gaussian-enveloped random harmonics of degree 1..3 scaled by eps*sup|phi|.
GenericityReport genericity_sweep(const SemilinearProblem& base, double eps, int trials,
                                  double threshold, int k_check, std::uint64_t seed);

struct PicardReport {
    std::vector<double> weighted_distances; // e^{-kt}-weighted sup distance per iterate
    std::vector<double> ratios;             // successive contraction factors
    int iterations = 0;
};
// Fixed-point iteration u -> S(t)v + int_0^t S(t-s) F(u(s)) ds on a uniform
// time grid, F(u) = phi - psi u^3, chart-free initial data.
PicardReport picard_iterate(const RemainderField& v, const SemilinearProblem& prob, double T,
                            double k_weight, int n_time, int max_iter, double stop_tol);

} // namespace asympheat
