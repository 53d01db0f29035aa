#include <doctest.h>

#include <cmath>
#include <random>

#include "asympheat/grid.hpp"
#include "asympheat/heatflow.hpp"
#include "asympheat/oracle.hpp"
#include "asympheat/semilinear.hpp"
#include "asympheat/spaces.hpp"
#include "asympheat/sphere.hpp"

using namespace asympheat;

namespace {

RemainderField gaussian_field(int d, int n, double hw, double sigma, double amp) {
    RemainderField f = make_field_box(d, n, hw);
    std::vector<double> x(d);
    for (std::size_t i = 0; i < f.size(); ++i) {
        point_of_flat(f, i, x);
        double q = 0.0;
        for (int a = 0; a < d; ++a) q += x[a] * x[a];
        f.data[i] = amp * std::exp(-q / (2.0 * sigma * sigma));
    }
    return f;
}

RemainderField unit_mass_gaussian(int n, double hw, double sigma) {
    RemainderField f = gaussian_field(3, n, hw, sigma, 1.0);
    double mass = 0.0;
    for (double v : f.data) mass += v;
    mass *= std::pow(f.spacing, 3);
    for (double& v : f.data) v /= mass;
    return f;
}

SemilinearProblem poisson_problem(int n, double hw, double sigma) {
    SemilinearProblem prob;
    prob.phi = unit_mass_gaussian(n, hw, sigma);
    prob.psi = make_field_box(3, n, hw);
    prob.N = 2;
    prob.L_max = 4;
    prob.cutoff.r0 = 2.0;
    prob.cutoff.r1 = 4.0;
    return prob;
}

} // namespace

TEST_CASE("problem validation rejects undecayed or negative data") {
    SemilinearProblem prob;
    prob.phi = make_field_box(3, 16, 4.0);
    prob.psi = make_field_box(3, 16, 4.0);
    CHECK_NOTHROW(prob.validate());

    SemilinearProblem flat = prob;
    for (double& v : flat.phi.data) v = 1.0;
    CHECK_THROWS_AS(flat.validate(), std::invalid_argument);

    SemilinearProblem neg = prob;
    neg.psi.data[0] = -1e-3;
    CHECK_THROWS_AS(neg.validate(), std::invalid_argument);

    SemilinearProblem mismatch = prob;
    mismatch.psi = make_field_box(3, 12, 4.0);
    CHECK_THROWS_AS(mismatch.validate(), std::invalid_argument);
}

TEST_CASE("moment extraction inverts the annulus source assembly") {
    std::mt19937_64 rng(13);
    std::normal_distribution<double> gauss(0.0, 1.0);
    // populate only the degree k-1 block of each slot, the class the
    // extraction is parametrized over
    AsymptoticChart chart = make_chart(3, 1, 3, 4.0, 3);
    for (int k = 1; k <= 3; ++k)
        for (int i = 0; i < SphereFunction::mode_count(3, 3); ++i)
            if (SphereFunction::degree_of_mode(3, i) == k - 1) chart.a(k).c(i) = gauss(rng);
    RemainderField grid = make_field_box(3, 64, 8.0);
    RemainderField rho = chart_annulus_source(chart, CutoffSpec{}, grid);
    AsymptoticChart back = multipole_extract(rho, 3, 3, 4.0);
    for (int k = 1; k <= 3; ++k)
        for (std::size_t i = 0; i < chart.a(k).coeffs.size(); ++i)
            CHECK(back.a(k).coeffs[i] == doctest::Approx(chart.a(k).coeffs[i]).epsilon(1e-9));
}

TEST_CASE("radial sources produce no dipole or quadrupole moments") {
    RemainderField rho = gaussian_field(3, 48, 6.0, 0.7, -1.0);
    AsymptoticChart chart = multipole_extract(rho, 3, 3, 4.0);
    CHECK(std::abs(chart.a(1).c(0)) > 1e-3);
    for (int k = 2; k <= 3; ++k) CHECK(chart.a(k).l2_norm() < 1e-12 * std::abs(chart.a(1).c(0)));
}

TEST_CASE("eigenfunction purity flags mixed mode content") {
    AsymptoticChart chart = make_chart(3, 1, 2, 4.0, 2);
    chart.a(1).c(0) = 1.0;
    chart.a(2).c(1) = 1.0;
    std::vector<double> pure = eigenfunction_check(chart);
    CHECK(pure[0] == doctest::Approx(1.0));
    CHECK(pure[1] == doctest::Approx(1.0));
    chart.a(2).c(0) = 1.0; // degree 0 pollutes the k=2 slot
    std::vector<double> mixed = eigenfunction_check(chart);
    CHECK(mixed[1] == doctest::Approx(0.5));
}

TEST_CASE("annulus sources match the duhamel assembly for eigen charts") {
    AsymptoticChart chart = make_chart(3, 1, 2, 4.0, 2);
    chart.a(1).c(0) = 0.8;
    chart.a(2).c(3) = -0.4;
    RemainderField grid = make_field_box(3, 32, 6.0);
    CutoffSpec cutoff;
    cutoff.r0 = 2.0;
    cutoff.r1 = 4.0;
    RemainderField direct = chart_annulus_source(chart, cutoff, grid);
    DuhamelSource h = assemble_source(evolve_coefficients(chart), cutoff, grid);
    REQUIRE(h.degree() == 0);
    double worst = 0.0;
    for (std::size_t i = 0; i < direct.size(); ++i)
        worst = std::max(worst, std::abs(direct.data[i] - h.tcoef[0].data[i]));
    CHECK(worst < 1e-12);
}

TEST_CASE("the linear equilibrium solve recovers the newtonian far field") {
    SemilinearProblem prob = poisson_problem(48, 8.0, 0.8);
    EquilibriumResult eq = equilibrium_solve(prob);
    CHECK(eq.converged);
    CHECK(eq.residual_l2 <= 1e-8);
    CHECK(eq.newton_iters <= 3);
    double monopole = eq.u_star.chart.a(1).c(0) / std::sqrt(4.0 * M_PI);
    CHECK(monopole == doctest::Approx(1.0 / (4.0 * M_PI)).epsilon(0.05));
    for (double p : eq.purity) CHECK(p >= 0.99);
}

TEST_CASE("solved equilibria satisfy the comparison and shell bounds") {
    SemilinearProblem prob = poisson_problem(48, 8.0, 0.8);
    EquilibriumResult eq = equilibrium_solve(prob);
    MaxPrincipleReport rep = max_principle_checks(eq, prob);
    CHECK(rep.sup_linear > 0.0);
    CHECK(rep.sup_u <= 2.0 * rep.sup_linear + 1e-8);
    CHECK(rep.bound_holds);
    CHECK(rep.sphere_monotonicity_defect <= 1e-8);
}

TEST_CASE("a cubic absorption term still drives newton to small residuals") {
    SemilinearProblem prob = poisson_problem(32, 8.0, 0.9);
    prob.psi = gaussian_field(3, 32, 8.0, 1.0, 0.5);
    EquilibriumResult eq = equilibrium_solve(prob);
    CHECK(eq.converged);
    CHECK(eq.residual_l2 <= 1e-8);
    REQUIRE(eq.residual_history.size() >= 2);
    CHECK(eq.residual_history.back() < eq.residual_history.front());
}

TEST_CASE("with no reaction the splitting step is the exact heat step") {
    SemilinearProblem prob;
    prob.phi = make_field_box(2, 32, 6.0);
    prob.psi = make_field_box(2, 32, 6.0);
    RemainderField v0 = gaussian_field(2, 32, 6.0, 1.0, 0.7);
    AsymptoticChart zero = make_chart(2, 1, 1, 4.0, 0);
    FlowState st = make_flow_state(AsymptoticFunction{zero, CutoffSpec{}, v0});
    semilinear_step(st, prob, 0.05);
    RemainderField exact = heat_apply(v0, ComplexTime{{0.05, 0.0}});
    double worst = 0.0;
    for (std::size_t i = 0; i < exact.size(); ++i)
        worst = std::max(worst, std::abs(st.u.f.data[i] - exact.data[i]));
    CHECK(worst < 1e-13);
    CHECK(st.t == doctest::Approx(0.05));
}

TEST_CASE("the flow keeps its leading coefficients frozen") {
    SemilinearProblem prob = poisson_problem(32, 8.0, 0.9);
    EquilibriumResult eq = equilibrium_solve(prob);
    FlowState st = make_flow_state(eq.u_star);
    FlowMonitors mon = flow(st, prob, 0.1, 0.02, 2.0, 0.0, 1);
    REQUIRE(!mon.times.empty());
    for (double d : mon.coeff_drift) CHECK(d == 0.0);
    for (double s : mon.sup) CHECK(std::isfinite(s));
}

TEST_CASE("the equilibrium is stationary under the splitting flow") {
    SemilinearProblem prob = poisson_problem(32, 8.0, 0.9);
    EquilibriumResult eq = equilibrium_solve(prob);
    FlowState st = make_flow_state(eq.u_star);
    const RemainderField f0 = st.u.f;
    for (int s = 0; s < 20; ++s) semilinear_step(st, prob, 0.01);
    double drift = 0.0;
    for (std::size_t i = 0; i < f0.size(); ++i)
        drift = std::max(drift, std::abs(st.u.f.data[i] - f0.data[i]));
    CHECK(drift < 1e-5);
}

TEST_CASE("picard stops immediately without a reaction term") {
    SemilinearProblem prob;
    prob.phi = make_field_box(2, 24, 6.0);
    prob.psi = make_field_box(2, 24, 6.0);
    RemainderField v0 = gaussian_field(2, 24, 6.0, 1.0, 0.5);
    PicardReport rep = picard_iterate(v0, prob, 0.3, 5.0, 8, 5, 1e-14);
    CHECK(rep.iterations == 1);
    CHECK(rep.weighted_distances.front() < 1e-14);
}

TEST_CASE("larger exponential weights tighten the picard contraction") {
    SemilinearProblem prob;
    prob.phi = gaussian_field(3, 24, 6.0, 0.8, 0.2);
    prob.psi = gaussian_field(3, 24, 6.0, 1.0, 0.3);
    RemainderField v0 = gaussian_field(3, 24, 6.0, 0.9, 0.4);
    PicardReport slow = picard_iterate(v0, prob, 0.4, 6.0, 32, 6, 0.0);
    PicardReport fast = picard_iterate(v0, prob, 0.4, 12.0, 32, 6, 0.0);
    REQUIRE(!slow.ratios.empty());
    REQUIRE(!fast.ratios.empty());
    CHECK(slow.ratios.front() < 1.0);
    CHECK(fast.ratios.front() < slow.ratios.front());
}

TEST_CASE("random perturbations activate every extracted moment") {
    SemilinearProblem prob = poisson_problem(32, 10.0, 0.8);
    prob.N = 3;
    prob.L_max = 4;
    GenericityReport rep = genericity_sweep(prob, 0.1, 3, 1e-8, 3, 2024);
    CHECK(rep.base_degenerate);
    CHECK(rep.trials == 3);
    CHECK(rep.all_nonzero == 3);
}
