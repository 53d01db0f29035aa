#include "asympheat/heatflow.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace asympheat {

void ComplexTime::validate() const {
    if (z == std::complex<double>(0.0, 0.0)) return;
    if (!(z.real() > 0.0)) throw std::invalid_argument("complex time: Re z must be positive");
    if (std::abs(std::arg(z)) > M_PI / 2.0 - eps_margin)
        throw std::invalid_argument("complex time: |arg z| too close to pi/2");
}

SphereFunction CoefficientFlow::coefficient_at(int k, double t) const {
    const auto& poly = tcoef[k - n];
    SphereFunction out = poly[0];
    double tj = 1.0;
    for (std::size_t j = 1; j < poly.size(); ++j) {
        tj *= t;
        for (std::size_t i = 0; i < out.coeffs.size(); ++i)
            out.coeffs[i] += tj * poly[j].coeffs[i];
    }
    return out;
}

AsymptoticChart CoefficientFlow::chart_at(double t) const {
    AsymptoticChart c;
    c.d = d;
    c.n = n;
    c.N = N;
    c.N_star = N_star;
    c.L_max = L_max;
    c.coeffs.clear();
    for (int k = n; k <= N_star; ++k) c.coeffs.push_back(coefficient_at(k, t));
    c.reg_ladder.assign(c.count(), 0);
    return c;
}

namespace {

// ladder operator T_k b = Lap_theta b + (k-2)(k-d) b
SphereFunction ladder_apply(const SphereFunction& b, int k, int d) {
    SphereFunction out = laplace_beltrami(b);
    const double c = static_cast<double>(k - 2) * (k - d);
    for (std::size_t i = 0; i < out.coeffs.size(); ++i) out.coeffs[i] += c * b.coeffs[i];
    return out;
}

// source promotion operator at index k: Lap_theta a_k + k(k+2-d) a_k
// (the coefficient the ladder would assign at slot k+2)
SphereFunction promote_apply(const SphereFunction& a, int k, int d) {
    SphereFunction out = laplace_beltrami(a);
    const double c = static_cast<double>(k) * (k + 2 - d);
    for (std::size_t i = 0; i < out.coeffs.size(); ++i) out.coeffs[i] += c * a.coeffs[i];
    return out;
}

} // namespace

CoefficientFlow evolve_coefficients(const AsymptoticChart& chart) {
    CoefficientFlow flow;
    flow.d = chart.d;
    flow.n = chart.n;
    flow.N = chart.N;
    flow.N_star = chart.N_star;
    flow.L_max = chart.L_max;
    flow.tcoef.resize(chart.count());
    for (int k = chart.n; k <= chart.N_star; ++k) {
        auto& poly = flow.tcoef[k - chart.n];
        poly.push_back(chart.a(k));
        if (k - 2 >= chart.n) {
            // integrate the ladder applied to a_{k-2}(t) term by term:
            // c_{k,j+1} = T_k c_{k-2,j} / (j+1)
            const auto& lower = flow.tcoef[k - 2 - chart.n];
            for (std::size_t j = 0; j < lower.size(); ++j) {
                SphereFunction next = ladder_apply(lower[j], k, chart.d);
                for (double& c : next.coeffs) c /= static_cast<double>(j + 1);
                poly.push_back(next);
            }
        }
    }
    return flow;
}

RemainderField DuhamelSource::at(double t) const {
    RemainderField out = tcoef[0];
    double tj = 1.0;
    for (std::size_t j = 1; j < tcoef.size(); ++j) {
        tj *= t;
        axpy(out, tj, tcoef[j]);
    }
    return out;
}

DuhamelSource assemble_source(const CoefficientFlow& flow, const CutoffSpec& cutoff,
                              const RemainderField& grid_like) {
    bool all_zero = true;
    for (const auto& poly : flow.tcoef)
        for (const auto& s : poly)
            for (double c : s.coeffs)
                if (c != 0.0) all_zero = false;
    if (all_zero) {
        DuhamelSource zero;
        zero.tcoef.assign(1, grid_like);
        std::fill(zero.tcoef[0].data.begin(), zero.tcoef[0].data.end(), 0.0);
        return zero;
    }
    if (cutoff.r1 - cutoff.r0 < 2.0 * grid_like.spacing)
        throw std::invalid_argument("assemble_source: grid too coarse to resolve the annulus");
    int deg = 0;
    for (int k = flow.n; k <= flow.N_star; ++k) deg = std::max(deg, flow.degree(k));

    // spectral prep per t-degree: promoted tails at slots N*+1 and N*+2
    std::vector<SphereFunction> tail1(deg + 1), tail2(deg + 1);
    const bool has_tail1 = flow.N_star - 1 >= flow.n;
    for (int j = 0; j <= deg; ++j) {
        if (has_tail1) {
            const auto& poly = flow.tcoef[flow.N_star - 1 - flow.n];
            tail1[j] = j < static_cast<int>(poly.size())
                           ? promote_apply(poly[j], flow.N_star - 1, flow.d)
                           : make_sphere_function(flow.d, flow.L_max);
        }
        const auto& polyN = flow.tcoef[flow.N_star - flow.n];
        tail2[j] = j < static_cast<int>(polyN.size())
                       ? promote_apply(polyN[j], flow.N_star, flow.d)
                       : make_sphere_function(flow.d, flow.L_max);
    }

    DuhamelSource h;
    h.tcoef.assign(deg + 1, grid_like);
    for (auto& f : h.tcoef) std::fill(f.data.begin(), f.data.end(), 0.0);

    const int d = flow.d;
    std::vector<double> x, dir(d), basis;
    for (std::size_t flat = 0; flat < grid_like.size(); ++flat) {
        point_of_flat(grid_like, flat, x);
        double r2 = 0.0;
        for (double c : x) r2 += c * c;
        const double r = std::sqrt(r2);
        if (r <= cutoff.r0) continue; // chi, chi', chi'' all vanish
        const double chi = cutoff.value(r);
        const double chi1 = cutoff.d1(r);
        const double chi2 = cutoff.d2(r);
        for (int a = 0; a < d; ++a) dir[a] = x[a] / r;
        sphere_basis(d, flow.L_max, dir.data(), basis);

        auto dot_basis = [&](const SphereFunction& s) {
            double acc = 0.0;
            for (std::size_t i = 0; i < basis.size(); ++i) acc += s.coeffs[i] * basis[i];
            return acc;
        };

        const double lapchi = chi2 + (d - 1) * chi1 / r;
        for (int j = 0; j <= deg; ++j) {
            double val = 0.0;
            if (chi != 0.0) {
                if (has_tail1)
                    val += chi * dot_basis(tail1[j]) * std::pow(r, -(flow.N_star + 1));
                val += chi * dot_basis(tail2[j]) * std::pow(r, -(flow.N_star + 2));
            }
            if (chi1 != 0.0 || chi2 != 0.0) {
                double radial = 0.0, plain = 0.0;
                for (int k = flow.n; k <= flow.N_star; ++k) {
                    const auto& poly = flow.tcoef[k - flow.n];
                    if (j >= static_cast<int>(poly.size())) continue;
                    const double akv = dot_basis(poly[j]);
                    radial += -static_cast<double>(k) * akv * std::pow(r, -(k + 1));
                    plain += akv * std::pow(r, -k);
                }
                val += 2.0 * chi1 * radial + lapchi * plain;
            }
            h.tcoef[j].data[flat] = val;
        }
    }
    return h;
}

RemainderField heat_apply(const RemainderField& f, const ComplexTime& z) {
    z.validate();
    if (z.z == std::complex<double>(0.0, 0.0)) return f;
    std::vector<double> xs = xi_squared(f);
    const std::complex<double> zz = z.z;
    return apply_multiplier(f, [&](std::size_t i) { return std::exp(-zz * xs[i]); });
}

ComplexField heat_apply_complex(const RemainderField& f, std::complex<double> z) {
    std::vector<double> xs = xi_squared(f);
    return apply_multiplier_complex(f, [&](std::size_t i) { return std::exp(-z * xs[i]); });
}

ComplexField heat_derivative_complex(const RemainderField& f, std::complex<double> z, int axis) {
    std::vector<double> xs = xi_squared(f);
    std::vector<double> xa = xi_component(f, axis);
    return apply_multiplier_complex(f, [&](std::size_t i) {
        return std::complex<double>(0.0, xa[i]) * std::exp(-z * xs[i]);
    });
}

RemainderField duhamel_integral(const DuhamelSource& h, double t) {
    if (!(t >= 0.0)) throw std::invalid_argument("duhamel_integral: t must be >= 0");
    RemainderField out = h.tcoef[0];
    std::fill(out.data.begin(), out.data.end(), 0.0);
    if (t == 0.0) return out;

    // FFT each polynomial coefficient once, then evaluate
    //   I_j(t, lam) = int_0^t exp(-lam (t-s)) s^j ds
    // exactly per mode: the upward recurrence I_j = (t^j - j I_{j-1}) / lam
    // is stable for lam t > 1, the factorial series in lam t below that.
    const std::vector<int>& shape = out.shape;
    const std::size_t n = out.size();
    const std::size_t nd = h.tcoef.size();
    std::vector<std::vector<cplx>> spec(nd);
    for (std::size_t j = 0; j < nd; ++j) {
        spec[j].assign(h.tcoef[j].data.begin(), h.tcoef[j].data.end());
        fft_forward(shape, spec[j]);
    }
    std::vector<double> xs = xi_squared(out);

    std::vector<double> tpow(nd + 1);
    tpow[0] = 1.0;
    for (std::size_t j = 1; j <= nd; ++j) tpow[j] = tpow[j - 1] * t;

    std::vector<cplx> acc(n, 0.0);
    std::vector<double> I(nd);
    for (std::size_t i = 0; i < n; ++i) {
        const double lam = xs[i];
        const double lt = lam * t;
        if (lt <= 1.0) {
            for (std::size_t j = 0; j < nd; ++j) {
                double term = 1.0 / static_cast<double>(j + 1);
                double sum = term;
                for (int m = 1; m <= 40; ++m) {
                    term *= -lt / static_cast<double>(m + j + 1);
                    sum += term;
                    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
                }
                I[j] = sum * tpow[j + 1];
            }
        } else {
            I[0] = -std::expm1(-lt) / lam;
            for (std::size_t j = 1; j < nd; ++j)
                I[j] = (tpow[j] - static_cast<double>(j) * I[j - 1]) / lam;
        }
        cplx a = 0.0;
        for (std::size_t j = 0; j < nd; ++j) a += I[j] * spec[j][i];
        acc[i] = a;
    }
    fft_inverse(shape, acc);
    const double scale = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) out.data[i] = acc[i].real() * scale;
    return out;
}

AsymptoticFunction semigroup_apply(const AsymptoticFunction& v, double t) {
    if (!(t >= 0.0)) throw std::invalid_argument("semigroup_apply: t must be >= 0");
    AsymptoticFunction out = v;
    if (t == 0.0) return out;
    CoefficientFlow flow = evolve_coefficients(v.chart);
    out.chart = flow.chart_at(t);
    ComplexTime zt;
    zt.z = t;
    out.f = heat_apply(v.f, zt);
    DuhamelSource h = assemble_source(flow, v.cutoff, v.f);
    axpy(out.f, 1.0, duhamel_integral(h, t));
    return out;
}

AsymptoticFunction generator_apply(const AsymptoticFunction& v) {
    AsymptoticFunction out = v;
    // chart part: ladder shifted two slots; the two lowest slots vanish
    for (int k = v.chart.n; k <= v.chart.N_star; ++k) {
        if (k - 2 >= v.chart.n)
            out.chart.a(k) = ladder_apply(v.chart.a(k - 2), k, v.chart.d);
        else
            std::fill(out.chart.a(k).coeffs.begin(), out.chart.a(k).coeffs.end(), 0.0);
    }
    out.f = spectral_laplacian(v.f);
    CoefficientFlow flow = evolve_coefficients(v.chart);
    DuhamelSource h = assemble_source(flow, v.cutoff, v.f);
    axpy(out.f, 1.0, h.tcoef[0]);
    return out;
}

NonsmoothingReport nonsmoothing_check(const AsymptoticChart& chart,
                                      const std::vector<double>& times) {
    CoefficientFlow flow = evolve_coefficients(chart);
    NonsmoothingReport rep;
    for (double t : times) {
        for (int k = chart.n; k <= chart.N_star; ++k) {
            SphereFunction at = flow.coefficient_at(k, t);
            double drift = 0.0;
            for (std::size_t i = 0; i < at.coeffs.size(); ++i)
                drift = std::max(drift, std::abs(at.coeffs[i] - chart.a(k).coeffs[i]));
            if (k <= chart.n + 1)
                rep.frozen_drift = std::max(rep.frozen_drift, drift);
            else
                rep.higher_drift = std::max(rep.higher_drift, drift);
        }
    }
    return rep;
}

namespace {

double loglog_slope_tail(const std::vector<double>& t, const std::vector<double>& y,
                         std::size_t tail) {
    // least-squares slope of log y against log t over the last `tail` points
    const std::size_t n = t.size();
    const std::size_t start = n > tail ? n - tail : 0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t m = 0;
    for (std::size_t i = start; i < n; ++i) {
        const double lx = std::log(t[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++m;
    }
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

} // namespace

GrowthBoundReport growth_bound_harness(const AsymptoticFunction& v, int m, double p,
                                       double delta, const std::vector<double>& times) {
    GrowthBoundReport rep;
    rep.times = times;
    bool chart_empty = true;
    for (const auto& a : v.chart.coeffs)
        for (double c : a.coeffs)
            if (c != 0.0) chart_empty = false;
    NormSpec hs;
    hs.family = NormSpec::Family::H;
    hs.m = m;
    hs.p = p;
    hs.weight = delta;
    const double base = chart_empty ? weighted_norm(v.f, hs) : asymptotic_norm(v, m, p);
    for (double t : times) {
        AsymptoticFunction st = semigroup_apply(v, t);
        const double nt = chart_empty ? weighted_norm(st.f, hs) : asymptotic_norm(st, m, p);
        rep.norms.push_back(nt / base);
    }
    rep.fitted_exponent = loglog_slope_tail(rep.times, rep.norms, std::max<std::size_t>(4, times.size() / 2));
    return rep;
}

DerivativeEstimateReport derivative_estimate_harness(const RemainderField& f, double p,
                                                     double delta,
                                                     const std::vector<double>& times) {
    DerivativeEstimateReport rep;
    rep.times = times;
    NormSpec hs;
    hs.family = NormSpec::Family::H;
    hs.m = 0;
    hs.p = p;
    hs.weight = delta;
    for (double t : times) {
        double total = 0.0;
        for (int a = 0; a < f.d; ++a) {
            ComplexField g = heat_derivative_complex(f, {t, 0.0}, a);
            RemainderField gr = g.real_part();
            const double na = weighted_norm(gr, hs);
            total += na * na;
        }
        rep.grad_norms.push_back(std::sqrt(total));
    }
    rep.fitted_rate = -loglog_slope_tail(rep.times, rep.grad_norms, times.size());
    return rep;
}

SemigroupPropertyReport semigroup_property_check(const AsymptoticFunction& v, double t1,
                                                 double t2, int m, double p) {
    SemigroupPropertyReport rep;

    // chart-free composition on the raw remainder
    ComplexTime z1, z2, z12;
    z1.z = t1;
    z2.z = t2;
    z12.z = t1 + t2;
    RemainderField two_step = heat_apply(heat_apply(v.f, z2), z1);
    RemainderField one_step = heat_apply(v.f, z12);
    axpy(two_step, -1.0, one_step);
    rep.remainder_error = lp_norm(two_step, 2.0);

    AsymptoticFunction composed = semigroup_apply(semigroup_apply(v, t2), t1);
    AsymptoticFunction direct = semigroup_apply(v, t1 + t2);
    AsymptoticFunction diff = composed;
    for (int k = diff.chart.n; k <= diff.chart.N_star; ++k)
        for (std::size_t i = 0; i < diff.chart.a(k).coeffs.size(); ++i)
            diff.chart.a(k).coeffs[i] -= direct.chart.a(k).coeffs[i];
    axpy(diff.f, -1.0, direct.f);
    rep.full_error = asymptotic_norm(diff, m, p);
    return rep;
}

double cauchy_riemann_residual(const RemainderField& f, std::complex<double> z, double step) {
    // dS/dz along the real direction vs along the imaginary direction
    ComplexField pr = heat_apply_complex(f, z + std::complex<double>(step, 0.0));
    ComplexField mr = heat_apply_complex(f, z - std::complex<double>(step, 0.0));
    ComplexField pi = heat_apply_complex(f, z + std::complex<double>(0.0, step));
    ComplexField mi = heat_apply_complex(f, z - std::complex<double>(0.0, step));
    double worst = 0.0;
    for (std::size_t i = 0; i < pr.data.size(); ++i) {
        const cplx d_re = (pr.data[i] - mr.data[i]) / (2.0 * step);
        const cplx d_im = (pi.data[i] - mi.data[i]) / (2.0 * step * cplx(0.0, 1.0));
        worst = std::max(worst, std::abs(d_re - d_im));
    }
    return worst;
}

} // namespace asympheat
