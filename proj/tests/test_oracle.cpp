#include <doctest.h>

#include <cmath>

#include "asympheat/grid.hpp"
#include "asympheat/oracle.hpp"

using namespace asympheat;

namespace {

double gauss(const std::vector<double>& x, double sigma) {
    double q = 0.0;
    for (double c : x) q += c * c;
    return std::exp(-q / (2.0 * sigma * sigma));
}

} // namespace

TEST_CASE("kernel convolution maps gaussians to the widened gaussian") {
    double s0 = 1.5, t = 0.5;
    double s1 = std::sqrt(s0 * s0 + 2.0 * t);
    RemainderField grid = make_field_box(2, 48, 7.0);
    RemainderField w =
        oracle::gaussian_convolve([&](const std::vector<double>& y) { return gauss(y, s0); }, t,
                                  grid);
    std::vector<double> x(2);
    double worst = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        point_of_flat(w, i, x);
        double exact = (s0 * s0 / (s1 * s1)) * gauss(x, s1);
        worst = std::max(worst, std::abs(w.data[i] - exact));
    }
    CHECK(worst < 1e-9);

    RemainderField grid3 = make_field_box(3, 32, 6.0);
    double r0 = 1.2, tt = 0.4;
    double r1 = std::sqrt(r0 * r0 + 2.0 * tt);
    RemainderField w3 =
        oracle::gaussian_convolve([&](const std::vector<double>& y) { return gauss(y, r0); }, tt,
                                  grid3);
    worst = 0.0;
    std::vector<double> y(3);
    for (std::size_t i = 0; i < w3.size(); ++i) {
        point_of_flat(w3, i, y);
        double exact = std::pow(r0 * r0 / (r1 * r1), 1.5) * gauss(y, r1);
        worst = std::max(worst, std::abs(w3.data[i] - exact));
    }
    CHECK(worst < 1e-8);
}

TEST_CASE("the smoothing kernel has unit mass") {
    RemainderField grid = make_field_box(2, 40, 5.0);
    RemainderField one =
        oracle::gaussian_convolve([](const std::vector<double>&) { return 1.0; }, 0.9, grid);
    double worst = 0.0;
    for (double v : one.data) worst = std::max(worst, std::abs(v - 1.0));
    CHECK(worst < 1e-9);
}

TEST_CASE("stencil laplacians are exact on quadratics everywhere") {
    RemainderField f = make_field_box(2, 31, 4.0);
    std::vector<double> x(2);
    for (std::size_t i = 0; i < f.size(); ++i) {
        point_of_flat(f, i, x);
        f.data[i] = 3.0 * x[0] * x[0] - 2.0 * x[1] * x[1] + x[0] * x[1] + 0.5;
    }
    RemainderField lap = oracle::fd_laplacian(f, 2);
    for (double v : lap.data) CHECK(v == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("the order four stencil converges at fourth order on smooth data") {
    auto residual = [](int n) {
        RemainderField f = make_field_box(2, n, 6.0);
        std::vector<double> x(2);
        for (std::size_t i = 0; i < f.size(); ++i) {
            point_of_flat(f, i, x);
            f.data[i] = gauss(x, 1.0);
        }
        RemainderField lap = oracle::fd_laplacian(f, 4);
        double worst = 0.0;
        for_each_index(f.shape, [&](const std::vector<int>& ix, std::size_t flat) {
            for (int a = 0; a < 2; ++a)
                if (ix[a] < 3 || ix[a] >= f.shape[a] - 3) return;
            double r2 = f.coord(0, ix[0]) * f.coord(0, ix[0]) +
                        f.coord(1, ix[1]) * f.coord(1, ix[1]);
            double exact = (r2 - 2.0) * std::exp(-r2 / 2.0);
            worst = std::max(worst, std::abs(lap.data[flat] - exact));
        });
        return worst;
    };
    double coarse = residual(48), fine = residual(96);
    CHECK(coarse / fine > 10.0);
    CHECK(fine < 2e-4);
}

TEST_CASE("the lattice potential reproduces the shell value of radial sources") {
    double sigma = 0.5;
    RemainderField rho = make_field_box(3, 32, 5.0);
    std::vector<double> x(3);
    double mass = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
        point_of_flat(rho, i, x);
        rho.data[i] = gauss(x, sigma);
        mass += rho.data[i];
    }
    mass *= std::pow(rho.spacing, 3);

    std::vector<std::vector<double>> targets;
    for (double r : {3.0, 4.0}) {
        targets.push_back({r, 0.0, 0.0});
        targets.push_back({0.0, r, 0.0});
        targets.push_back({0.0, 0.0, -r});
        double s = r / std::sqrt(3.0);
        targets.push_back({s, -s, s});
    }
    std::vector<double> pot = oracle::newtonian_potential(rho, 1, targets);
    for (std::size_t i = 0; i < targets.size(); ++i) {
        double r = i < 4 ? 3.0 : 4.0;
        double expect = -mass / (4.0 * M_PI * r);
        CHECK(pot[i] == doctest::Approx(expect).epsilon(2e-4));
    }
    // axis symmetry of the lattice sum is exact for the radial source
    CHECK(pot[0] == doctest::Approx(pot[1]).epsilon(1e-12));
}

TEST_CASE("conjugating by the weight collapses to zero at delta zero") {
    RemainderField f = make_field_box(2, 48, 6.0);
    std::vector<double> x(2);
    for (std::size_t i = 0; i < f.size(); ++i) {
        point_of_flat(f, i, x);
        f.data[i] = gauss(x, 1.2);
    }
    oracle::ConjugationReport rep = oracle::l_delta_conjugation_check(f, 0.0);
    CHECK(rep.max_residual < 1e-12);
}

TEST_CASE("the conjugation identity residual shrinks under refinement") {
    auto residual = [](int n) {
        RemainderField f = make_field_box(2, n, 8.0);
        std::vector<double> x(2);
        for (std::size_t i = 0; i < f.size(); ++i) {
            point_of_flat(f, i, x);
            f.data[i] = gauss(x, 1.2);
        }
        return oracle::l_delta_conjugation_check(f, 2.0).max_residual;
    };
    // the weight amplifies the absolute residual; the refinement ratio carries the check
    double coarse = residual(64), fine = residual(128);
    CHECK(coarse / fine > 3.0);
    CHECK(fine < 0.25);
}
