#include "asympheat/resolvent.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "asympheat/sphere.hpp"

namespace asympheat {

using cd = std::complex<double>;

namespace {

bool is_half_integer(double nu) {
    return std::abs(nu - std::floor(nu) - 0.5) < 1e-12;
}

bool is_integer(double nu) { return std::abs(nu - std::round(nu)) < 1e-12; }

// H^(1)_{n+1/2} by forward recurrence from the two seed orders
//   H_{-1/2} = sqrt(2/(pi z)) e^{iz},  H_{1/2} = -i sqrt(2/(pi z)) e^{iz}
cd hankel1_half_integer(double nu, cd z) {
    const cd pref = std::sqrt(2.0 / (M_PI * z)) * std::exp(cd(0.0, 1.0) * z);
    cd hm = pref;                 // order -1/2
    cd h = -cd(0.0, 1.0) * pref;  // order 1/2
    if (nu < 0.75) return h;
    double cur = 0.5;
    while (cur < nu - 0.25) {
        cd next = (2.0 * cur / z) * h - hm;
        hm = h;
        h = next;
        cur += 1.0;
    }
    return h;
}

cd bessel_j_series(double nu, cd z) {
    // ascending series; adequate for |z| <= ~12 in double precision
    const cd zh = 0.5 * z;
    cd term = std::pow(zh, nu) / std::tgamma(nu + 1.0);
    cd sum = term;
    for (int k = 1; k <= 200; ++k) {
        term *= -(zh * zh) / (static_cast<double>(k) * (nu + k));
        sum += term;
        if (std::abs(term) < 1e-18 * (std::abs(sum) + 1e-300)) break;
    }
    return sum;
}

double harmonic_number(int k) {
    double h = 0.0;
    for (int j = 1; j <= k; ++j) h += 1.0 / j;
    return h;
}

// Y_n for integer n >= 0 via the logarithmic series
cd bessel_y_integer(int n, cd z) {
    const cd zh = 0.5 * z;
    const cd logzh = std::log(zh);
    const double euler = 0.57721566490153286060651209;
    cd jn = bessel_j_series(n, z);
    cd sum1 = 0.0;
    // finite part: -(1/pi) sum_{k=0}^{n-1} (n-1-k)!/k! (z/2)^{2k-n}
    double fact = 1.0;
    for (int k = 1; k <= n - 1; ++k) fact *= k; // (n-1)!
    double num = fact;
    double den = 1.0;
    for (int k = 0; k <= n - 1; ++k) {
        sum1 += (num / den) * std::pow(zh, 2 * k - n);
        if (k + 1 <= n - 1) {
            num /= (n - 1 - k);
            den *= (k + 1);
        }
    }
    // series part with harmonic numbers
    cd sum2 = 0.0;
    double kfact = 1.0, nkfact = 1.0;
    for (int j = 1; j <= n; ++j) nkfact *= j;
    cd zpow = std::pow(zh, n);
    double sign = 1.0;
    for (int k = 0; k <= 200; ++k) {
        if (k > 0) {
            kfact *= k;
            nkfact *= (n + k);
            zpow *= zh * zh;
            sign = -sign;
        }
        const double hk = harmonic_number(k) + harmonic_number(n + k);
        cd term = sign * hk / (kfact * nkfact) * zpow;
        sum2 += term;
        if (k > 4 && std::abs(term) < 1e-18 * (std::abs(sum2) + 1e-300)) break;
    }
    return (2.0 / M_PI) * (logzh + euler) * jn - (1.0 / M_PI) * sum1 - (1.0 / M_PI) * sum2;
}

cd hankel1_series(double nu, cd z) {
    if (is_integer(nu)) {
        const int n = static_cast<int>(std::round(nu));
        return bessel_j_series(n, z) + cd(0.0, 1.0) * bessel_y_integer(n, z);
    }
    const cd jp = bessel_j_series(nu, z);
    const cd jm = bessel_j_series(-nu, z);
    const cd y = (jp * std::cos(nu * M_PI) - jm) / std::sin(nu * M_PI);
    return jp + cd(0.0, 1.0) * y;
}

cd hankel1_asymptotic(double nu, cd z) {
    // H^(1)_nu(z) ~ sqrt(2/(pi z)) e^{i(z - nu pi/2 - pi/4)} sum_k i^k a_k(nu) z^-k
    const double mu = 4.0 * nu * nu;
    cd sum = 1.0;
    cd term = 1.0;
    double prev_abs = 1e300;
    for (int k = 1; k <= 30; ++k) {
        const double odd = 2.0 * k - 1.0;
        term *= cd(0.0, 1.0) * (mu - odd * odd) / (8.0 * static_cast<double>(k) * z);
        if (std::abs(term) > prev_abs) break; // series started diverging
        sum += term;
        prev_abs = std::abs(term);
        if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    const cd phase = std::exp(cd(0.0, 1.0) * (z - nu * M_PI / 2.0 - M_PI / 4.0));
    return std::sqrt(2.0 / (M_PI * z)) * phase * sum;
}

} // namespace

cd hankel1(double nu, cd z) {
    if (nu < 0.0) throw std::invalid_argument("hankel1: nu must be >= 0");
    if (z == cd(0.0, 0.0)) throw std::invalid_argument("hankel1: z must be nonzero");
    if (std::abs(std::arg(z)) >= M_PI - 1e-14)
        throw std::invalid_argument("hankel1: z on the branch cut");
    if (is_half_integer(nu)) return hankel1_half_integer(nu, z);
    if (std::abs(z) <= 10.0) return hankel1_series(nu, z);
    return hankel1_asymptotic(nu, z);
}

cd resolvent_sqrt(cd lambda) {
    if (lambda.imag() == 0.0 && lambda.real() <= 0.0)
        throw std::invalid_argument("resolvent: lambda on the closed negative real axis");
    return std::sqrt(lambda); // principal branch has Re > 0 off the cut
}

cd resolvent_kernel_hankel(int d, cd lambda, double s) {
    if (!(s > 0.0)) throw std::invalid_argument("resolvent_kernel: separation must be > 0");
    const cd mu = resolvent_sqrt(lambda);
    const double nu = 0.5 * (d - 2);
    const cd arg = cd(0.0, 1.0) * mu * s;
    const cd pref = std::pow(cd(0.0, 1.0) * mu / (2.0 * M_PI * s), nu);
    return cd(0.0, 0.25) * pref * hankel1(nu, arg);
}

cd resolvent_kernel(int d, cd lambda, double s) {
    if (!(s > 0.0)) throw std::invalid_argument("resolvent_kernel: separation must be > 0");
    if (d == 3) {
        const cd mu = resolvent_sqrt(lambda);
        return std::exp(-mu * s) / (4.0 * M_PI * s);
    }
    return resolvent_kernel_hankel(d, lambda, s);
}

bool SectorPoint::inside() const {
    const cd shifted = lambda - cd(omega, 0.0);
    if (shifted == cd(0.0, 0.0)) return false;
    return std::abs(std::arg(shifted)) < M_PI - eps;
}

namespace {

// adaptive panel quadrature: fixed 16-node Gauss-Legendre per panel, panels
// graded geometrically toward the left endpoint (handles the r^-nu / log
// behavior of the Hankel magnitude near 0)
double graded_panels(double a, double b, int n_panels, double grading,
                     const std::function<double(double)>& fn) {
    std::vector<double> nodes, weights;
    gauss_legendre(16, nodes, weights);
    // panel edges: a + (b-a) * (g^i - 1)/(g^n - 1) with ratio `grading`
    std::vector<double> edges(n_panels + 1);
    double total = 0.0, pw = 1.0;
    for (int i = 0; i < n_panels; ++i) {
        total += pw;
        pw *= grading;
    }
    edges[0] = a;
    double acc_len = 0.0;
    pw = 1.0;
    for (int i = 0; i < n_panels; ++i) {
        acc_len += pw / total;
        edges[i + 1] = a + (b - a) * acc_len;
        pw *= grading;
    }
    edges[n_panels] = b;
    double sum = 0.0;
    for (int i = 0; i < n_panels; ++i) {
        const double mid = 0.5 * (edges[i] + edges[i + 1]);
        const double half = 0.5 * (edges[i + 1] - edges[i]);
        for (int q = 0; q < 16; ++q) sum += half * weights[q] * fn(mid + half * nodes[q]);
    }
    return sum;
}

} // namespace

SchurIntegrals schur_integrals(cd lambda, double delta, int d) {
    const cd mu = resolvent_sqrt(lambda);
    const double re_mu = mu.real();
    const double nu = 0.5 * (d - 2);
    const double pref = std::pow(std::abs(lambda), 0.5 * nu);
    const double ad = std::abs(delta);
    auto integrand = [&](double r) {
        const cd h = hankel1(std::abs(nu), cd(0.0, 1.0) * mu * r);
        // nu = 0 at d=2; |H_{-nu}| = |H_nu| would handle other cases
        return pref * std::pow(1.0 + r * r, 0.5 * ad) * std::pow(r, d - 1 - nu) * std::abs(h);
    };
    const double split = 1.0 / re_mu;
    SchurIntegrals out;
    out.I1 = graded_panels(1e-14 * split, split, 24, 2.0, integrand);
    // tail: integrate out to where the exponential kernel decay has consumed
    // ~40 e-foldings relative to the weight growth
    double r_max = split;
    while (re_mu * (r_max - split) < 40.0 + ad * std::log(1.0 + r_max * r_max)) r_max *= 1.5;
    out.I2 = graded_panels(split, r_max, 32, 1.15, integrand);
    out.bound_ratio = std::abs(lambda) * (out.I1 + out.I2);
    return out;
}

ComplexField resolvent_apply(const RemainderField& f, cd lambda) {
    resolvent_sqrt(lambda); // validates the cut
    std::vector<double> xs = xi_squared(f);
    return apply_multiplier_complex(f, [&](std::size_t i) { return 1.0 / (lambda + xs[i]); });
}

double resolvent_identity_residual(const RemainderField& f, cd lambda) {
    ComplexField rf = resolvent_apply(f, lambda);
    // apply (lambda - Lap) through a second, separate spectral round trip
    RemainderField re = rf.real_part(), im = rf.imag_part();
    RemainderField lap_re = spectral_laplacian(re), lap_im = spectral_laplacian(im);
    double acc = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const cd val = lambda * cd(re.data[i], im.data[i]) - cd(lap_re.data[i], lap_im.data[i]) -
                       cd(f.data[i], 0.0);
        acc += trapezoid_weight(f, i) * std::norm(val);
    }
    return std::sqrt(acc);
}

} // namespace asympheat
