#include <doctest.h>

#include <cmath>
#include <complex>

#include "asympheat/grid.hpp"
#include "asympheat/resolvent.hpp"

using namespace asympheat;
using cplx = std::complex<double>;

TEST_CASE("the square root stays in the right half plane off the branch cut") {
    for (cplx lam : {cplx(4.0, 0.0), cplx(2.0, 3.0), cplx(-1.0, 0.5), cplx(0.3, -2.0)}) {
        cplx r = resolvent_sqrt(lam);
        CHECK(r.real() > 0.0);
        CHECK((r * r).real() == doctest::Approx(lam.real()).epsilon(1e-13));
        CHECK((r * r).imag() == doctest::Approx(lam.imag()).epsilon(1e-13));
    }
}

TEST_CASE("the d=3 kernel matches the explicit exponential form") {
    for (cplx lam : {cplx(2.0, 3.0), cplx(0.5, -0.4), cplx(9.0, 0.1)}) {
        for (double s : {0.3, 1.0, 2.7}) {
            cplx expect = std::exp(-std::sqrt(lam) * s) / (4.0 * M_PI * s);
            cplx got = resolvent_kernel(3, lam, s);
            CHECK(std::abs(got - expect) / std::abs(expect) < 1e-13);
        }
    }
}

TEST_CASE("closed form and hankel routes agree in both dimensions") {
    for (int d : {2, 3}) {
        for (cplx lam : {cplx(1.5, 2.0), cplx(4.0, -1.0), cplx(0.2, 0.9)}) {
            for (double s : {0.4, 1.3, 3.1}) {
                cplx a = resolvent_kernel(d, lam, s);
                cplx b = resolvent_kernel_hankel(d, lam, s);
                CHECK(std::abs(a - b) / std::abs(a) < 1e-12);
            }
        }
    }
}

TEST_CASE("sector membership respects the angular margin") {
    SectorPoint in{cplx(1.0, 1.0), 0.0, 0.2};
    CHECK(in.inside());
    SectorPoint vertex{cplx(0.0, 0.0), 0.0, 0.2};
    CHECK_FALSE(vertex.inside());
    // arg = pi - 0.1 violates a 0.2 margin
    SectorPoint wide{std::polar(1.0, M_PI - 0.1), 0.0, 0.2};
    CHECK_FALSE(wide.inside());
    // relative to the vertex 2.5 this sits at arg ~ pi - 0.05, inside the margin
    SectorPoint shifted{cplx(1.5, 0.05), 2.5, 0.2};
    CHECK_FALSE(shifted.inside());
    SectorPoint shifted_ok{cplx(3.5, 0.5), 2.5, 0.2};
    CHECK(shifted_ok.inside());
}

TEST_CASE("unweighted schur integrals are scale invariant") {
    for (int d : {2, 3}) {
        SchurIntegrals a = schur_integrals(std::polar(2.0, 0.9), 0.0, d);
        SchurIntegrals b = schur_integrals(std::polar(34.0, 0.9), 0.0, d);
        CHECK(a.I1 > 0.0);
        CHECK(a.I2 > 0.0);
        CHECK(a.bound_ratio == doctest::Approx(b.bound_ratio).epsilon(1e-5));
    }
}

TEST_CASE("weights enlarge the schur integrals") {
    cplx lam = std::polar(3.0, 1.2);
    SchurIntegrals flat = schur_integrals(lam, 0.0, 3);
    SchurIntegrals heavy = schur_integrals(lam, 3.0, 3);
    CHECK(heavy.I1 + heavy.I2 > flat.I1 + flat.I2);
}

TEST_CASE("the spectral resolvent inverts its defining operator") {
    RemainderField f = make_field_box(3, 24, 6.0);
    std::vector<double> x(3);
    for (std::size_t i = 0; i < f.size(); ++i) {
        point_of_flat(f, i, x);
        f.data[i] = std::exp(-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / 2.0);
    }
    CHECK(resolvent_identity_residual(f, {2.0, 3.0}) < 1e-10);
    CHECK(resolvent_identity_residual(f, {0.5, -7.0}) < 1e-10);
}

TEST_CASE("the resolvent acts diagonally on single fourier modes") {
    RemainderField f = make_field_box(2, 32, 4.0);
    double period = f.shape[0] * f.spacing;
    double k0 = 2.0 * M_PI / period;
    std::vector<double> x(2);
    for (std::size_t i = 0; i < f.size(); ++i) {
        point_of_flat(f, i, x);
        f.data[i] = std::cos(k0 * x[0]);
    }
    cplx lam(1.7, 0.0);
    ComplexField g = resolvent_apply(f, lam);
    double scale = 1.0 / (1.7 + k0 * k0);
    for (std::size_t i = 0; i < f.size(); i += 7) {
        CHECK(g.data[i].real() == doctest::Approx(scale * f.data[i]).epsilon(1e-12));
        CHECK(std::abs(g.data[i].imag()) < 1e-12);
    }
}
