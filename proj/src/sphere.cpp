#include "asympheat/sphere.hpp"

#include <cmath>
#include <stdexcept>

#include "asympheat/fft.hpp"

namespace asympheat {

int SphereFunction::mode_count(int d, int L_max) {
    if (d == 2) return 1 + 2 * L_max;
    if (d == 3) return (L_max + 1) * (L_max + 1);
    throw std::invalid_argument("sphere: d must be 2 or 3");
}

int SphereFunction::degree_of_mode(int d, int mode) {
    if (d == 2) return mode == 0 ? 0 : (mode + 1) / 2;
    int l = static_cast<int>(std::sqrt(static_cast<double>(mode)));
    while (l * l > mode) --l;
    while ((l + 1) * (l + 1) <= mode) ++l;
    return l;
}

SphereFunction make_sphere_function(int d, int L_max) {
    SphereFunction a;
    a.d = d;
    a.L_max = L_max;
    a.coeffs.assign(SphereFunction::mode_count(d, L_max), 0.0);
    return a;
}

SphereFunction random_sphere_function(int d, int L_max, std::mt19937_64& rng) {
    SphereFunction a = make_sphere_function(d, L_max);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (double& c : a.coeffs) c = gauss(rng);
    return a;
}

double lb_eigenvalue(int d, int l) {
    return -static_cast<double>(l) * (l + d - 2);
}

namespace {

// Fully normalized associated Legendre values P~_l^m(x) such that the real
// spherical harmonics Y_{l,0} = P~_l^0, Y_{l,+-m} = sqrt(2) P~_l^m {cos,sin}(m phi)
// are orthonormal on S^2. Output indexed tri(l,m) = l(l+1)/2 + m.
void normalized_legendre(int L_max, double x, std::vector<double>& out) {
    const int n = (L_max + 1) * (L_max + 2) / 2;
    out.assign(n, 0.0);
    auto tri = [](int l, int m) { return l * (l + 1) / 2 + m; };
    const double s = std::sqrt(std::max(0.0, 1.0 - x * x));
    out[0] = std::sqrt(1.0 / (4.0 * M_PI));
    for (int m = 1; m <= L_max; ++m)
        out[tri(m, m)] = out[tri(m - 1, m - 1)] * s * std::sqrt((2.0 * m + 1.0) / (2.0 * m));
    for (int m = 0; m < L_max; ++m)
        out[tri(m + 1, m)] = out[tri(m, m)] * x * std::sqrt(2.0 * m + 3.0);
    for (int m = 0; m <= L_max; ++m)
        for (int l = m + 2; l <= L_max; ++l) {
            double a = std::sqrt((4.0 * l * l - 1.0) / (static_cast<double>(l) * l - m * m));
            double b = std::sqrt((static_cast<double>(l - 1) * (l - 1) - m * m) /
                                 (4.0 * static_cast<double>(l - 1) * (l - 1) - 1.0));
            out[tri(l, m)] = a * (x * out[tri(l - 1, m)] - b * out[tri(l - 2, m)]);
        }
}

} // namespace

void sphere_basis(int d, int L_max, const double* dir, std::vector<double>& out) {
    out.assign(SphereFunction::mode_count(d, L_max), 0.0);
    if (d == 2) {
        const double phi = std::atan2(dir[1], dir[0]);
        out[0] = 1.0 / std::sqrt(2.0 * M_PI);
        const double inv_sqrt_pi = 1.0 / std::sqrt(M_PI);
        for (int l = 1; l <= L_max; ++l) {
            out[2 * l - 1] = std::cos(l * phi) * inv_sqrt_pi;
            out[2 * l] = std::sin(l * phi) * inv_sqrt_pi;
        }
        return;
    }
    const double ctheta = dir[2];
    const double phi = std::atan2(dir[1], dir[0]);
    static thread_local std::vector<double> leg;
    normalized_legendre(L_max, ctheta, leg);
    auto tri = [](int l, int m) { return l * (l + 1) / 2 + m; };
    const double sqrt2 = std::sqrt(2.0);
    for (int l = 0; l <= L_max; ++l) {
        out[l * l + l] = leg[tri(l, 0)];
        for (int m = 1; m <= l; ++m) {
            const double v = sqrt2 * leg[tri(l, m)];
            out[l * l + l + m] = v * std::cos(m * phi);
            out[l * l + l - m] = v * std::sin(m * phi);
        }
    }
}

double SphereFunction::eval(const double* dir) const {
    static thread_local std::vector<double> basis;
    sphere_basis(d, L_max, dir, basis);
    double acc = 0.0;
    for (std::size_t i = 0; i < coeffs.size(); ++i) acc += coeffs[i] * basis[i];
    return acc;
}

double SphereFunction::l2_norm() const {
    double acc = 0.0;
    for (double c : coeffs) acc += c * c;
    return std::sqrt(acc);
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.resize(n);
    weights.resize(n);
    for (int i = 0; i < n; ++i) {
        // Chebyshev-based initial guess, then Newton on P_n
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            if (n == 1) { p1 = x; }
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            double pn = (n == 1) ? x : p1;
            double pn1 = (n == 1) ? 1.0 : p0;
            pp = n * (x * pn - pn1) / (x * x - 1.0);
            double dx = pn / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * pp * pp);
    }
}

std::size_t SphereGrid::node_count() const {
    return d == 2 ? static_cast<std::size_t>(n_phi)
                  : static_cast<std::size_t>(n_theta) * n_phi;
}

void SphereGrid::node_direction(int i, int j, double* dir) const {
    const double phi = 2.0 * M_PI * j / n_phi;
    if (d == 2) {
        dir[0] = std::cos(phi);
        dir[1] = std::sin(phi);
        return;
    }
    const double st = std::sqrt(std::max(0.0, 1.0 - ct[i] * ct[i]));
    dir[0] = st * std::cos(phi);
    dir[1] = st * std::sin(phi);
    dir[2] = ct[i];
}

double SphereGrid::node_weight(int i) const {
    if (d == 2) return 2.0 * M_PI / n_phi;
    return wt[i] * (2.0 * M_PI / n_phi);
}

SphereGrid make_sphere_grid(int d, int L_max) {
    if (d != 2 && d != 3) throw std::invalid_argument("sphere grid: d must be 2 or 3");
    SphereGrid g;
    g.d = d;
    g.L_max = L_max;
    g.n_phi = 2 * L_max + 2;
    if (d == 2) {
        g.n_theta = 1;
        return g;
    }
    g.n_theta = L_max + 1;
    gauss_legendre(g.n_theta, g.ct, g.wt);
    g.legendre.resize(g.n_theta);
    for (int i = 0; i < g.n_theta; ++i) normalized_legendre(L_max, g.ct[i], g.legendre[i]);
    return g;
}

namespace {

// Longitude Fourier sums per ring: A_m = sum_j f_j cos(m phi_j),
// B_m = sum_j f_j sin(m phi_j), via one complex FFT of the ring.
void ring_fourier(const double* f, int n_phi, int m_max,
                  std::vector<double>& A, std::vector<double>& B) {
    std::vector<cplx> buf(n_phi);
    for (int j = 0; j < n_phi; ++j) buf[j] = f[j];
    fft_forward_1d(buf);
    A.assign(m_max + 1, 0.0);
    B.assign(m_max + 1, 0.0);
    for (int m = 0; m <= m_max && m < n_phi; ++m) {
        A[m] = buf[m].real();
        B[m] = -buf[m].imag();
    }
}

} // namespace

SphereFunction analyze(const SphereGrid& g, const std::vector<double>& samples, int L_max) {
    if (samples.size() != g.node_count())
        throw std::invalid_argument("analyze: sample count does not match grid");
    SphereFunction a = make_sphere_function(g.d, L_max);
    if (g.d == 2) {
        std::vector<double> A, B;
        ring_fourier(samples.data(), g.n_phi, L_max, A, B);
        const double w = 2.0 * M_PI / g.n_phi;
        a.c(0) = w * A[0] / std::sqrt(2.0 * M_PI);
        for (int l = 1; l <= L_max; ++l) {
            a.c(2 * l - 1) = w * A[l] / std::sqrt(M_PI);
            a.c(2 * l) = w * B[l] / std::sqrt(M_PI);
        }
        return a;
    }
    auto tri = [](int l, int m) { return l * (l + 1) / 2 + m; };
    const double sqrt2 = std::sqrt(2.0);
    std::vector<double> A, B;
    for (int i = 0; i < g.n_theta; ++i) {
        ring_fourier(samples.data() + static_cast<std::size_t>(i) * g.n_phi, g.n_phi, L_max, A, B);
        const double w = g.node_weight(i);
        for (int l = 0; l <= L_max; ++l) {
            a.c(l * l + l) += w * g.legendre[i][tri(l, 0)] * A[0];
            for (int m = 1; m <= l; ++m) {
                const double v = w * sqrt2 * g.legendre[i][tri(l, m)];
                a.c(l * l + l + m) += v * A[m];
                a.c(l * l + l - m) += v * B[m];
            }
        }
    }
    return a;
}

std::vector<double> synthesize(const SphereGrid& g, const SphereFunction& a) {
    std::vector<double> out(g.node_count(), 0.0);
    const int L = a.L_max;
    if (g.d == 2) {
        // inverse ring transform: build complex spectrum and invert
        std::vector<cplx> buf(g.n_phi, 0.0);
        buf[0] = a.c(0) / std::sqrt(2.0 * M_PI);
        for (int l = 1; l <= L; ++l) {
            cplx half(0.5 * a.c(2 * l - 1) / std::sqrt(M_PI), -0.5 * a.c(2 * l) / std::sqrt(M_PI));
            buf[l] += half;
            buf[(g.n_phi - l) % g.n_phi] += std::conj(half);
        }
        fft_inverse_1d(buf);
        for (int j = 0; j < g.n_phi; ++j) out[j] = buf[j].real();
        return out;
    }
    auto tri = [](int l, int m) { return l * (l + 1) / 2 + m; };
    const double sqrt2 = std::sqrt(2.0);
    for (int i = 0; i < g.n_theta; ++i) {
        // collapse degrees onto longitude Fourier components for this ring
        std::vector<double> Ac(L + 1, 0.0), Bc(L + 1, 0.0);
        for (int l = 0; l <= L; ++l) {
            Ac[0] += g.legendre[i][tri(l, 0)] * a.c(l * l + l);
            for (int m = 1; m <= l; ++m) {
                const double v = sqrt2 * g.legendre[i][tri(l, m)];
                Ac[m] += v * a.c(l * l + l + m);
                Bc[m] += v * a.c(l * l + l - m);
            }
        }
        std::vector<cplx> buf(g.n_phi, 0.0);
        buf[0] = Ac[0];
        for (int m = 1; m <= L; ++m) {
            cplx half(0.5 * Ac[m], -0.5 * Bc[m]);
            buf[m] += half;
            buf[(g.n_phi - m) % g.n_phi] += std::conj(half);
        }
        fft_inverse_1d(buf);
        for (int j = 0; j < g.n_phi; ++j)
            out[static_cast<std::size_t>(i) * g.n_phi + j] = buf[j].real();
    }
    return out;
}

SphereFunction laplace_beltrami(const SphereFunction& a) {
    SphereFunction out = a;
    for (std::size_t i = 0; i < out.coeffs.size(); ++i) {
        int l = SphereFunction::degree_of_mode(a.d, static_cast<int>(i));
        out.coeffs[i] *= lb_eigenvalue(a.d, l);
    }
    return out;
}

SphereFunction lb_halfpower(const SphereFunction& a, int power) {
    SphereFunction out = a;
    for (std::size_t i = 0; i < out.coeffs.size(); ++i) {
        int l = SphereFunction::degree_of_mode(a.d, static_cast<int>(i));
        out.coeffs[i] *= std::pow(-lb_eigenvalue(a.d, l), 0.5 * power);
    }
    return out;
}

double sphere_sobolev_norm(const SphereFunction& a, int order, double p) {
    if (order < 0) throw std::invalid_argument("sphere norm: order must be >= 0");
    if (p == 2.0) {
        double acc = 0.0;
        for (std::size_t i = 0; i < a.coeffs.size(); ++i) {
            int l = SphereFunction::degree_of_mode(a.d, static_cast<int>(i));
            acc += std::pow(1.0 - lb_eigenvalue(a.d, l), order) * a.coeffs[i] * a.coeffs[i];
        }
        return std::sqrt(acc);
    }
    // surrogate for p != 2: quadrature L^p norms of spectral half-power
    // derivatives, exact only at p = 2
    SphereGrid g = make_sphere_grid(a.d, a.L_max);
    double acc = 0.0;
    for (int j = 0; j <= order; ++j) {
        SphereFunction der = lb_halfpower(a, j);
        std::vector<double> vals = synthesize(g, der);
        double s = 0.0;
        for (int i = 0; i < (a.d == 2 ? 1 : g.n_theta); ++i) {
            const double w = g.node_weight(i);
            for (int jj = 0; jj < g.n_phi; ++jj)
                s += w * std::pow(std::abs(vals[static_cast<std::size_t>(i) * g.n_phi + jj]), p);
        }
        acc += std::pow(s, 1.0 / p);
    }
    return acc;
}

} // namespace asympheat
