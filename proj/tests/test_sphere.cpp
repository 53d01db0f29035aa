#include <doctest.h>

#include <cmath>
#include <random>

#include "asympheat/sphere.hpp"

using namespace asympheat;

TEST_CASE("mode counts grow with the retained degree") {
    CHECK(SphereFunction::mode_count(2, 0) == 1);
    CHECK(SphereFunction::mode_count(2, 3) == 7);
    CHECK(SphereFunction::mode_count(3, 0) == 1);
    CHECK(SphereFunction::mode_count(3, 4) == 25);
    CHECK(SphereFunction::degree_of_mode(3, 0) == 0);
    CHECK(SphereFunction::degree_of_mode(3, 6) == 2);
    CHECK(SphereFunction::degree_of_mode(2, 5) == 3);
}

TEST_CASE("constant mode carries the inverse surface measure") {
    double dir2[2] = {1.0, 0.0};
    SphereFunction a2 = make_sphere_function(2, 0);
    a2.c(0) = 1.0;
    CHECK(a2.eval(dir2) == doctest::Approx(1.0 / std::sqrt(2.0 * M_PI)).epsilon(1e-14));

    double dir3[3] = {0.0, 0.0, 1.0};
    SphereFunction a3 = make_sphere_function(3, 0);
    a3.c(0) = 1.0;
    CHECK(a3.eval(dir3) == doctest::Approx(1.0 / std::sqrt(4.0 * M_PI)).epsilon(1e-14));
}

TEST_CASE("analysis inverts synthesis on every basis mode") {
    for (int d : {2, 3}) {
        const int L = 4;
        SphereGrid g = make_sphere_grid(d, L);
        const int nm = SphereFunction::mode_count(d, L);
        for (int mode = 0; mode < nm; ++mode) {
            SphereFunction e = make_sphere_function(d, L);
            e.c(mode) = 1.0;
            SphereFunction back = analyze(g, synthesize(g, e), L);
            for (int j = 0; j < nm; ++j)
                CHECK(std::abs(back.c(j) - (j == mode ? 1.0 : 0.0)) < 1e-12);
        }
    }
}

TEST_CASE("basis evaluation matches the coefficient expansion") {
    std::mt19937_64 rng(7);
    for (int d : {2, 3}) {
        SphereFunction a = random_sphere_function(d, 3, rng);
        SphereGrid g = make_sphere_grid(d, 3);
        std::vector<double> dir(d), basis;
        g.node_direction(0, d == 3 ? 2 : 1, dir.data());
        sphere_basis(d, 3, dir.data(), basis);
        double dot = 0.0;
        for (std::size_t i = 0; i < basis.size(); ++i) dot += basis[i] * a.c(static_cast<int>(i));
        CHECK(a.eval(dir.data()) == doctest::Approx(dot).epsilon(1e-13));
    }
}

TEST_CASE("laplace-beltrami acts diagonally with the degree eigenvalues") {
    for (int d : {2, 3}) {
        const int L = 4;
        const int nm = SphereFunction::mode_count(d, L);
        for (int mode = 0; mode < nm; ++mode) {
            SphereFunction e = make_sphere_function(d, L);
            e.c(mode) = 1.0;
            SphereFunction lb = laplace_beltrami(e);
            int l = SphereFunction::degree_of_mode(d, mode);
            for (int j = 0; j < nm; ++j) {
                double expect = j == mode ? lb_eigenvalue(d, l) : 0.0;
                CHECK(lb.c(j) == doctest::Approx(expect).epsilon(1e-14));
            }
        }
    }
    CHECK(lb_eigenvalue(3, 2) == doctest::Approx(-6.0));
    CHECK(lb_eigenvalue(2, 3) == doctest::Approx(-9.0));
}

TEST_CASE("half powers of the spherical laplacian square correctly") {
    std::mt19937_64 rng(11);
    SphereFunction a = random_sphere_function(3, 4, rng);
    SphereFunction two = lb_halfpower(a, 2);
    SphereFunction lb = laplace_beltrami(a);
    for (std::size_t i = 0; i < a.coeffs.size(); ++i)
        CHECK(two.c(static_cast<int>(i)) == doctest::Approx(-lb.c(static_cast<int>(i))).epsilon(1e-13));

    SphereFunction one = lb_halfpower(a, 1);
    SphereFunction chained = lb_halfpower(one, 1);
    for (std::size_t i = 0; i < a.coeffs.size(); ++i)
        CHECK(chained.c(static_cast<int>(i)) ==
              doctest::Approx(two.c(static_cast<int>(i))).epsilon(1e-13));
}

TEST_CASE("random sphere functions are seed reproducible") {
    std::mt19937_64 r1(99), r2(99);
    SphereFunction a = random_sphere_function(3, 3, r1);
    SphereFunction b = random_sphere_function(3, 3, r2);
    CHECK(a.coeffs == b.coeffs);
    CHECK(a.l2_norm() > 0.0);
}
