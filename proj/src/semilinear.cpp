#include "asympheat/semilinear.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>

#include "asympheat/fft.hpp"
#include "asympheat/oracle.hpp"

namespace asympheat {

namespace {

constexpr double kBoundaryDecayTol = 1e-9;

void require(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

// chart modes live per k in the single degree l = k-1
struct ChartMode {
    int k = 0;
    int l = 0;
    int mode = 0; // global basis index l^2 + (m+l)
};

std::vector<ChartMode> chart_mode_list(int N_star, int L_max) {
    std::vector<ChartMode> out;
    for (int k = 1; k <= N_star; ++k) {
        int l = k - 1;
        if (l > L_max) throw std::invalid_argument("multipole_extract: L_max below N_star - 1");
        for (int m = -l; m <= l; ++m) out.push_back({k, l, l * l + (m + l)});
    }
    return out;
}

// Gaussian elimination with partial pivoting; A is n x n row-major.
std::vector<double> solve_dense(int n, std::vector<double> A, std::vector<double> b) {
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(A[r * n + col]) > std::abs(A[piv * n + col])) piv = r;
        if (std::abs(A[piv * n + col]) < 1e-300)
            throw std::runtime_error("multipole_extract: singular moment Gram matrix");
        if (piv != col) {
            for (int c = 0; c < n; ++c) std::swap(A[piv * n + c], A[col * n + c]);
            std::swap(b[piv], b[col]);
        }
        for (int r = col + 1; r < n; ++r) {
            double m = A[r * n + col] / A[col * n + col];
            if (m == 0.0) continue;
            for (int c = col; c < n; ++c) A[r * n + c] -= m * A[col * n + c];
            b[r] -= m * b[col];
        }
    }
    std::vector<double> x(n, 0.0);
    for (int r = n - 1; r >= 0; --r) {
        double s = b[r];
        for (int c = r + 1; c < n; ++c) s -= A[r * n + c] * x[c];
        x[r] = s / A[r * n + r];
    }
    return x;
}

bool chart_is_zero(const AsymptoticChart& chart) {
    for (const auto& a : chart.coeffs)
        for (double c : a.coeffs)
            if (c != 0.0) return false;
    return true;
}

// radial annulus weight of the eigen part of Lap(chi * Y / r^k)
double annulus_weight(const CutoffSpec& cutoff, int k, double r) {
    double c1 = cutoff.d1(r);
    double c2 = cutoff.d2(r);
    return (c2 + 2.0 * c1 / r - 2.0 * k * c1 / r) * std::pow(r, -k);
}

// mean of f over the outermost two grid layers (sup-norm shell)
double boundary_shell_mean(const RemainderField& f) {
    double sum = 0.0;
    std::size_t count = 0;
    for_each_index(f.shape, [&](const std::vector<int>& ix, std::size_t flat) {
        bool shell = false;
        for (int a = 0; a < f.d; ++a)
            if (ix[a] <= 1 || ix[a] >= f.shape[a] - 2) shell = true;
        if (shell) {
            sum += f.data[flat];
            ++count;
        }
    });
    return count ? sum / static_cast<double>(count) : 0.0;
}

// CG for (-Lap_spec + q) w = b with a spectral (|xi|^2 + mean q)^-1
// preconditioner; q >= 0 pointwise. Serial fixed-order reductions.
RemainderField cg_solve(const RemainderField& q, const RemainderField& b, double tol,
                        int max_iter) {
    const double vol = std::pow(b.spacing, b.d);
    auto xisq = xi_squared(b);
    double qbar = mean(q);
    double qeff = std::max(qbar, 1e-6);
    auto precond = [&](const RemainderField& r) {
        return apply_multiplier(r, [&](std::size_t i) { return cplx(1.0 / (xisq[i] + qeff), 0.0); });
    };
    auto apply_A = [&](const RemainderField& w) {
        RemainderField out = spectral_laplacian(w);
        for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = -out.data[i] + q.data[i] * w.data[i];
        return out;
    };

    RemainderField x = b;
    std::fill(x.data.begin(), x.data.end(), 0.0);
    double bnorm = std::sqrt(dot(b, b) * vol);
    if (bnorm == 0.0) return x;

    RemainderField r = b;
    RemainderField z = precond(r);
    RemainderField p = z;
    double rz = dot(r, z);
    for (int it = 0; it < max_iter; ++it) {
        RemainderField Ap = apply_A(p);
        double pAp = dot(p, Ap);
        if (pAp <= 0.0) break; // loss of definiteness, accept current iterate
        double alpha = rz / pAp;
        axpy(x, alpha, p);
        axpy(r, -alpha, Ap);
        if (std::sqrt(dot(r, r) * vol) <= tol * bnorm) break;
        z = precond(r);
        double rz_new = dot(r, z);
        double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < p.size(); ++i) p.data[i] = z.data[i] + beta * p.data[i];
    }
    return x;
}

int binom(int n, int k) {
    if (k < 0 || k > n) return 0;
    long long r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return static_cast<int>(r);
}

// re-centers the source polynomial: h(a + s) as a polynomial in s
DuhamelSource shift_source(const DuhamelSource& src, double a) {
    DuhamelSource out;
    int J = src.degree();
    if (J < 0) return out;
    out.tcoef.reserve(J + 1);
    for (int i = 0; i <= J; ++i) {
        RemainderField acc = src.tcoef[i];
        std::fill(acc.data.begin(), acc.data.end(), 0.0);
        double apow = 1.0;
        for (int j = i; j <= J; ++j) {
            axpy(acc, binom(j, i) * apow, src.tcoef[j]);
            apow *= a;
        }
        out.tcoef.push_back(std::move(acc));
    }
    return out;
}

RemainderField chart_field_at(const FlowState& st, double tau) {
    RemainderField out = st.u.f;
    std::fill(out.data.begin(), out.data.end(), 0.0);
    if (st.chart_fields.empty()) return out;
    int J = static_cast<int>(st.chart_fields.size()) - 1;
    out = st.chart_fields[J];
    for (int j = J - 1; j >= 0; --j) {
        for (std::size_t i = 0; i < out.size(); ++i)
            out.data[i] = out.data[i] * tau + st.chart_fields[j].data[i];
    }
    return out;
}

} // namespace

void SemilinearProblem::validate() const {
    phi.validate();
    psi.validate();
    require(phi.d == psi.d && phi.shape == psi.shape && phi.spacing == psi.spacing,
            "SemilinearProblem: phi and psi grids differ");
    require(phi.d == 2 || phi.d == 3, "SemilinearProblem: d must be 2 or 3");
    require(N >= 1, "SemilinearProblem: N must be >= 1");
    require(L_max >= 0, "SemilinearProblem: L_max must be >= 0");
    require(p > 1.0, "SemilinearProblem: p must exceed 1");
    require(newton_tol > 0.0 && cg_tol > 0.0, "SemilinearProblem: tolerances must be positive");
    require(max_newton >= 1 && cg_max_iter >= 1, "SemilinearProblem: iteration caps must be >= 1");
    for (std::size_t i = 0; i < psi.size(); ++i)
        require(psi.data[i] >= -1e-14, "SemilinearProblem: psi must be nonnegative");
    double bmax = 0.0;
    for_each_index(phi.shape, [&](const std::vector<int>& ix, std::size_t flat) {
        for (int a = 0; a < phi.d; ++a)
            if (ix[a] == 0 || ix[a] == phi.shape[a] - 1)
                bmax = std::max(bmax, std::max(std::abs(phi.data[flat]), std::abs(psi.data[flat])));
    });
    require(bmax < kBoundaryDecayTol, "SemilinearProblem: phi/psi not negligible at the box boundary");
}

AsymptoticChart multipole_extract(const RemainderField& rho, int N, int L_max, double p,
                                  double* noise_fraction, CutoffSpec cutoff) {
    rho.validate();
    require(rho.d == 3, "multipole_extract: d must be 3");
    require(N >= 1, "multipole_extract: N must be >= 1");
    AsymptoticChart chart = make_chart(3, 1, N, p, L_max);
    const auto modes = chart_mode_list(chart.N_star, L_max);
    const int nm = static_cast<int>(modes.size());
    const double h3 = std::pow(rho.spacing, 3);

    std::vector<double> mom(nm, 0.0);
    std::vector<double> gram(static_cast<std::size_t>(nm) * nm, 0.0);
    std::vector<double> x(3), basis;
    std::vector<double> rpow(chart.N_star, 0.0);
    double dir[3];

    for (std::size_t flat = 0; flat < rho.size(); ++flat) {
        point_of_flat(rho, flat, x);
        double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
        if (r < 1e-12) {
            dir[0] = 0.0;
            dir[1] = 0.0;
            dir[2] = 1.0;
        } else {
            dir[0] = x[0] / r;
            dir[1] = x[1] / r;
            dir[2] = x[2] / r;
        }
        sphere_basis(3, L_max, dir, basis);
        rpow[0] = 1.0;
        for (int k = 2; k <= chart.N_star; ++k) rpow[k - 1] = rpow[k - 2] * r;

        double val = rho.data[flat];
        for (int j = 0; j < nm; ++j) mom[j] += val * rpow[modes[j].k - 1] * basis[modes[j].mode];

        if (r > cutoff.r0 && r < cutoff.r1) {
            for (int a = 0; a < nm; ++a) {
                double ea = annulus_weight(cutoff, modes[a].k, r) * basis[modes[a].mode];
                if (ea == 0.0) continue;
                for (int b = 0; b < nm; ++b)
                    gram[static_cast<std::size_t>(a) * nm + b] +=
                        ea * rpow[modes[b].k - 1] * basis[modes[b].mode];
            }
        }
    }
    for (double& v : mom) v *= h3;
    for (double& v : gram) v *= h3;

    // gram is indexed (source a, moment b); the solve needs moments of the
    // combination to match mom, i.e. sum_a c_a gram[a][b] = mom[b]
    std::vector<double> At(static_cast<std::size_t>(nm) * nm, 0.0);
    for (int a = 0; a < nm; ++a)
        for (int b = 0; b < nm; ++b) At[static_cast<std::size_t>(b) * nm + a] = gram[static_cast<std::size_t>(a) * nm + b];
    std::vector<double> c = solve_dense(nm, At, mom);

    double worst = 0.0;
    for (int j = 0; j < nm; ++j) {
        chart.a(modes[j].k).c(modes[j].mode) = c[j];
        double cont = -mom[j] / (2.0 * modes[j].k - 1.0);
        double scale = std::max(std::abs(c[j]), 1e-14);
        worst = std::max(worst, std::abs(c[j] - cont) / scale);
    }
    if (noise_fraction) *noise_fraction = worst;
    return chart;
}

RemainderField chart_annulus_source(const AsymptoticChart& chart, const CutoffSpec& cutoff,
                                    const RemainderField& grid_like) {
    grid_like.validate();
    require(chart.d == grid_like.d, "chart_annulus_source: dimension mismatch");
    RemainderField out = grid_like;
    std::fill(out.data.begin(), out.data.end(), 0.0);
    if (chart.count() <= 0 || chart_is_zero(chart)) return out;

    // promoted coefficients Lap_theta a_k + k(k+1-d) a_k; identically zero for
    // pure degree-(k-1) charts at d=3
    std::vector<SphereFunction> prom;
    bool any_prom = false;
    for (int k = chart.n; k <= chart.N_star; ++k) {
        SphereFunction pk = laplace_beltrami(chart.a(k));
        double shift = static_cast<double>(k) * (k + 2 - chart.d);
        for (std::size_t i = 0; i < pk.coeffs.size(); ++i) pk.coeffs[i] += shift * chart.a(k).coeffs[i];
        for (double v : pk.coeffs)
            if (std::abs(v) > 1e-14) any_prom = true;
        prom.push_back(pk);
    }

    const int d = grid_like.d;
    std::vector<double> x(d), basis;
    std::vector<double> dirv(d);
    for (std::size_t flat = 0; flat < out.size(); ++flat) {
        point_of_flat(out, flat, x);
        double r2 = 0.0;
        for (int a = 0; a < d; ++a) r2 += x[a] * x[a];
        double r = std::sqrt(r2);
        if (r <= cutoff.r0) continue;
        bool in_annulus = r < cutoff.r1;
        if (!in_annulus && !any_prom) continue;
        for (int a = 0; a < d; ++a) dirv[a] = x[a] / r;
        sphere_basis(d, chart.L_max, dirv.data(), basis);

        double c1 = cutoff.d1(r);
        double c2 = cutoff.d2(r);
        double chi = cutoff.value(r);
        double acc = 0.0;
        for (int k = chart.n; k <= chart.N_star; ++k) {
            double ak = 0.0, pk = 0.0;
            const auto& ac = chart.a(k).coeffs;
            const auto& pc = prom[k - chart.n].coeffs;
            for (std::size_t m = 0; m < ac.size(); ++m) {
                ak += ac[m] * basis[m];
                pk += pc[m] * basis[m];
            }
            double rk = std::pow(r, -k);
            if (in_annulus)
                acc += (c2 + (d - 1) * c1 / r) * ak * rk - k * 2.0 * c1 * ak * rk / r;
            acc += chi * pk * rk / r2;
        }
        out.data[flat] = acc;
    }
    return out;
}

std::vector<double> eigenfunction_check(const AsymptoticChart& chart) {
    std::vector<double> purity;
    for (int k = chart.n; k <= chart.N_star; ++k) {
        const auto& a = chart.a(k);
        double total = 0.0, eig = 0.0;
        for (std::size_t m = 0; m < a.coeffs.size(); ++m) {
            double c2 = a.coeffs[m] * a.coeffs[m];
            total += c2;
            if (SphereFunction::degree_of_mode(a.d, static_cast<int>(m)) == k - 1) eig += c2;
        }
        purity.push_back(total < 1e-300 ? 1.0 : eig / total);
    }
    return purity;
}

EquilibriumResult equilibrium_solve(const SemilinearProblem& prob) {
    prob.validate();
    require(prob.phi.d == 3, "equilibrium_solve: d must be 3");
    const RemainderField& phi = prob.phi;
    const RemainderField& psi = prob.psi;
    const bool psi_zero = sup_norm(psi) == 0.0;

    EquilibriumResult out;
    RemainderField f = phi;
    std::fill(f.data.begin(), f.data.end(), 0.0);
    AsymptoticChart chart = make_chart(3, 1, prob.N, prob.p, prob.L_max);
    RemainderField chart_field = f;
    double noise = 0.0;

    int updates = 0;
    bool converged = false;
    for (int it = 0; it <= prob.max_newton; ++it) {
        RemainderField u = chart_field;
        for (std::size_t i = 0; i < u.size(); ++i) u.data[i] += f.data[i];
        RemainderField rho = phi;
        for (std::size_t i = 0; i < rho.size(); ++i)
            rho.data[i] = psi.data[i] * u.data[i] * u.data[i] * u.data[i] - phi.data[i];

        chart = multipole_extract(rho, prob.N, prob.L_max, prob.p, &noise, prob.cutoff);
        chart_field = sample_chart(chart, prob.cutoff, phi);
        for (std::size_t i = 0; i < u.size(); ++i) u.data[i] = chart_field.data[i] + f.data[i];
        for (std::size_t i = 0; i < rho.size(); ++i)
            rho.data[i] = psi.data[i] * u.data[i] * u.data[i] * u.data[i] - phi.data[i];

        RemainderField annulus = chart_annulus_source(chart, prob.cutoff, phi);
        RemainderField s_corr = rho;
        axpy(s_corr, -1.0, annulus);

        RemainderField lap_f = spectral_laplacian(f);
        RemainderField F = lap_f;
        axpy(F, -1.0, s_corr);
        double res = lp_norm(F, 2.0);
        out.residual_history.push_back(res);
        if (res <= prob.newton_tol) {
            converged = true;
            break;
        }
        if (it == prob.max_newton) break;

        if (psi_zero) {
            f = spectral_poisson(s_corr);
            double pin = boundary_shell_mean(f);
            for (double& v : f.data) v -= pin;
            ++updates;
            continue;
        }

        RemainderField q = psi;
        for (std::size_t i = 0; i < q.size(); ++i) q.data[i] = 3.0 * psi.data[i] * u.data[i] * u.data[i];
        RemainderField w = cg_solve(q, F, prob.cg_tol, prob.cg_max_iter);
        RemainderField lap_w = spectral_laplacian(w);

        double alpha = 1.0;
        double best_res = res;
        double best_alpha = 0.0;
        while (alpha >= 1.0 / 1024.0) {
            double try_res = 0.0;
            {
                const double h3 = std::pow(f.spacing, 3);
                double acc = 0.0;
                for (std::size_t i = 0; i < f.size(); ++i) {
                    double ft = f.data[i] + alpha * w.data[i];
                    double ut = chart_field.data[i] + ft;
                    double rt = psi.data[i] * ut * ut * ut - phi.data[i] - annulus.data[i];
                    double Ft = lap_f.data[i] + alpha * lap_w.data[i] - rt;
                    acc += Ft * Ft;
                }
                try_res = std::sqrt(acc * h3);
            }
            if (try_res < best_res) {
                best_res = try_res;
                best_alpha = alpha;
            }
            if (try_res <= (1.0 - 0.25 * alpha) * res) break;
            alpha *= 0.5;
        }
        if (best_alpha == 0.0) break; // stalled line search, report current state
        axpy(f, best_alpha, w);
        ++updates;
    }

    out.u_star = AsymptoticFunction{chart, prob.cutoff, f};
    out.residual_l2 = out.residual_history.empty() ? 0.0 : out.residual_history.back();
    out.newton_iters = updates;
    out.converged = converged;
    out.purity = eigenfunction_check(chart);
    out.moment_noise_warning = noise > 0.1;
    return out;
}

MaxPrincipleReport max_principle_checks(const EquilibriumResult& eq,
                                        const SemilinearProblem& prob) {
    MaxPrincipleReport rep;
    const RemainderField& phi = prob.phi;
    RemainderField chart_field = sample_chart(eq.u_star.chart, eq.u_star.cutoff, phi);
    double su = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i)
        su = std::max(su, std::abs(chart_field.data[i] + eq.u_star.f.data[i]));
    rep.sup_u = su;

    // |Lap^{-1} phi| via the brute-force potential: coarse global sweep plus a
    // fine patch around the origin where the extremum of a decaying source sits
    int n = phi.shape[0];
    int tstride = std::max(1, n / 16);
    std::vector<std::vector<double>> targets;
    std::vector<double> x(3);
    for_each_index(phi.shape, [&](const std::vector<int>& ix, std::size_t flat) {
        bool coarse = ix[0] % tstride == 0 && ix[1] % tstride == 0 && ix[2] % tstride == 0;
        if (!coarse) {
            point_of_flat(phi, flat, x);
            if (std::max({std::abs(x[0]), std::abs(x[1]), std::abs(x[2])}) > 2.0) return;
            if (ix[0] % 2 || ix[1] % 2 || ix[2] % 2) return;
        } else {
            point_of_flat(phi, flat, x);
        }
        targets.push_back(x);
    });
    int sstride = std::max(1, n / 32);
    std::vector<double> pot = oracle::newtonian_potential(phi, sstride, targets);
    double sl = 0.0;
    for (double v : pot) sl = std::max(sl, std::abs(v));
    rep.sup_linear = sl;
    rep.bound_holds = rep.sup_u <= 2.0 * rep.sup_linear + 1e-8;

    // nested-sphere maxima of the linear potential must not increase with the
    // radius outside the source support
    double sup_phi = sup_norm(phi);
    double half = -phi.origin[0];
    double r_support = 1.0;
    for (std::size_t i = 0; i < phi.size(); ++i) {
        if (std::abs(phi.data[i]) > 1e-10 * sup_phi) {
            point_of_flat(phi, i, x);
            double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
            r_support = std::max(r_support, r);
        }
    }
    SphereGrid sg = make_sphere_grid(3, 6);
    std::vector<std::vector<double>> shell_targets;
    std::vector<double> radii;
    for (double R = r_support + 0.5; R <= half - 1.0; R += 0.5) radii.push_back(R);
    double dir[3];
    for (double R : radii)
        for (int i = 0; i < sg.n_theta; ++i)
            for (int j = 0; j < sg.n_phi; ++j) {
                sg.node_direction(i, j, dir);
                shell_targets.push_back({R * dir[0], R * dir[1], R * dir[2]});
            }
    std::vector<double> shell_pot = oracle::newtonian_potential(phi, sstride, shell_targets);
    std::size_t per_shell = sg.node_count();
    double defect = 0.0;
    double prev = 0.0;
    for (std::size_t s = 0; s < radii.size(); ++s) {
        double mx = 0.0;
        for (std::size_t j = 0; j < per_shell; ++j)
            mx = std::max(mx, std::abs(shell_pot[s * per_shell + j]));
        if (s > 0) defect = std::max(defect, mx - prev);
        prev = mx;
    }
    rep.sphere_monotonicity_defect = std::max(defect, 0.0);
    return rep;
}

FlowState make_flow_state(const AsymptoticFunction& v) {
    v.f.validate();
    FlowState st;
    st.u = v;
    st.t = 0.0;
    st.t_base = 0.0;
    if (v.chart.count() > 0 && !chart_is_zero(v.chart)) {
        st.flow = evolve_coefficients(v.chart);
        st.source = assemble_source(st.flow, v.cutoff, v.f);
        int J = 0;
        for (int k = v.chart.n; k <= v.chart.N_star; ++k) J = std::max(J, st.flow.degree(k));
        for (int j = 0; j <= J; ++j) {
            AsymptoticChart cj = v.chart;
            for (int k = v.chart.n; k <= v.chart.N_star; ++k) {
                if (j <= st.flow.degree(k))
                    cj.a(k) = st.flow.tcoef[k - v.chart.n][j];
                else
                    std::fill(cj.a(k).coeffs.begin(), cj.a(k).coeffs.end(), 0.0);
            }
            st.chart_fields.push_back(sample_chart(cj, v.cutoff, v.f));
        }
    }
    return st;
}

void semilinear_step(FlowState& st, const SemilinearProblem& prob, double dt) {
    require(dt > 0.0, "semilinear_step: dt must be positive");
    require(st.u.f.shape == prob.phi.shape, "semilinear_step: state grid differs from problem grid");
    const double tau0 = st.t - st.t_base;
    const bool has_chart = !st.chart_fields.empty();

    RemainderField f = heat_apply(st.u.f, ComplexTime{dt / 2.0});
    if (has_chart && st.source.degree() >= 0) {
        DuhamelSource w1 = shift_source(st.source, tau0);
        axpy(f, 1.0, duhamel_integral(w1, dt / 2.0));
    }

    const double tmid = tau0 + dt / 2.0;
    RemainderField cmid = has_chart ? chart_field_at(st, tmid) : RemainderField{};
    auto reaction = [&](const RemainderField& fr, RemainderField& out) {
        for (std::size_t i = 0; i < fr.size(); ++i) {
            double u = fr.data[i] + (has_chart ? cmid.data[i] : 0.0);
            out.data[i] = prob.phi.data[i] - prob.psi.data[i] * u * u * u;
        }
    };
    RemainderField g = f;
    reaction(f, g);
    RemainderField fmid = f;
    axpy(fmid, dt / 2.0, g);
    reaction(fmid, g);
    axpy(f, dt, g);

    f = heat_apply(f, ComplexTime{dt / 2.0});
    if (has_chart && st.source.degree() >= 0) {
        DuhamelSource w2 = shift_source(st.source, tau0 + dt / 2.0);
        axpy(f, 1.0, duhamel_integral(w2, dt / 2.0));
    }

    st.t += dt;
    st.u.f = std::move(f);
    if (has_chart) st.u.chart = st.flow.chart_at(st.t - st.t_base);
    if (sup_norm(st.u.f) > 1e6)
        throw std::runtime_error("semilinear_step: blow-up guard tripped (|u| > 1e6)");
}

FlowMonitors flow(FlowState& st, const SemilinearProblem& prob, double T, double dt,
                  double monitor_p, double monitor_delta, int monitor_stride) {
    require(T > 0.0 && dt > 0.0, "flow: T and dt must be positive");
    require(monitor_stride >= 1, "flow: monitor_stride must be >= 1");
    const AsymptoticChart chart0 = st.u.chart;
    const bool has_chart = !st.chart_fields.empty();

    NormSpec spec;
    spec.family = NormSpec::Family::H;
    spec.m = 0;
    spec.p = monitor_p;
    spec.weight = monitor_delta;

    FlowMonitors mon;
    auto record = [&]() {
        RemainderField u = st.u.f;
        if (has_chart) {
            RemainderField c = chart_field_at(st, st.t - st.t_base);
            axpy(u, 1.0, c);
        }
        mon.times.push_back(st.t);
        mon.lp_norm.push_back(weighted_norm(u, spec));
        mon.sup.push_back(sup_norm(u));
        double drift = 0.0;
        if (!st.u.chart.coeffs.empty()) {
            for (int k : {st.u.chart.n, st.u.chart.n + 1}) {
                if (k > st.u.chart.N_star) continue;
                const auto& now = st.u.chart.a(k).coeffs;
                const auto& ref = chart0.a(k).coeffs;
                for (std::size_t i = 0; i < now.size(); ++i)
                    drift = std::max(drift, std::abs(now[i] - ref[i]));
            }
        }
        mon.coeff_drift.push_back(drift);
    };

    record();
    const long long steps = std::llround(T / dt);
    for (long long s = 1; s <= steps; ++s) {
        semilinear_step(st, prob, dt);
        if (s % monitor_stride == 0 || s == steps) record();
    }
    return mon;
}

GenericityReport genericity_sweep(const SemilinearProblem& base, double eps, int trials,
                                  double threshold, int k_check, std::uint64_t seed) {
    base.validate();
    require(trials >= 1, "genericity_sweep: trials must be >= 1");
    require(eps >= 0.0, "genericity_sweep: eps must be >= 0");
    require(k_check >= 1 && k_check <= base.N, "genericity_sweep: k_check must lie in [1, N]");

    GenericityReport rep;
    rep.trials = trials;
    rep.zero_flags.assign(k_check, 0);

    auto coeff_norms = [&](const SemilinearProblem& prob) {
        EquilibriumResult eq = equilibrium_solve(prob);
        std::vector<double> norms;
        for (int k = 1; k <= k_check; ++k) norms.push_back(eq.u_star.chart.a(k).l2_norm());
        return norms;
    };
    auto vanishing = [&](const std::vector<double>& norms, int k) {
        double scale = std::max(norms[0], 1e-14);
        return norms[k - 1] <= threshold * scale;
    };

    std::vector<double> base_norms = coeff_norms(base);
    for (int k = 2; k <= k_check; ++k)
        if (vanishing(base_norms, k)) rep.base_degenerate = true;

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double amp = eps * sup_norm(base.phi);
    const double sigma = 1.25;
    const int L_pert = 3;
    std::vector<double> x(3);

    for (int trial = 0; trial < trials; ++trial) {
        SphereFunction g = make_sphere_function(3, L_pert);
        for (int l = 1; l <= L_pert; ++l)
            for (int m = -l; m <= l; ++m) g.c(l * l + m + l) = gauss(rng);

        RemainderField eta = base.phi;
        double sup_eta = 0.0;
        std::vector<double> basis;
        double dir[3];
        for (std::size_t i = 0; i < eta.size(); ++i) {
            point_of_flat(eta, i, x);
            double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
            if (r < 1e-12) {
                eta.data[i] = 0.0;
                continue;
            }
            dir[0] = x[0] / r;
            dir[1] = x[1] / r;
            dir[2] = x[2] / r;
            sphere_basis(3, L_pert, dir, basis);
            double env = std::exp(-r * r / (2.0 * sigma * sigma));
            double acc = 0.0;
            double rl = r;
            for (int l = 1; l <= L_pert; ++l) {
                for (int m = -l; m <= l; ++m) acc += g.c(l * l + m + l) * basis[l * l + m + l] * rl;
                rl *= r;
            }
            eta.data[i] = env * acc;
            sup_eta = std::max(sup_eta, std::abs(eta.data[i]));
        }
        if (sup_eta > 0.0)
            for (double& v : eta.data) v /= sup_eta;

        SemilinearProblem pert = base;
        axpy(pert.phi, amp, eta);
        std::vector<double> norms = coeff_norms(pert);
        bool all_ok = true;
        for (int k = 1; k <= k_check; ++k) {
            if (vanishing(norms, k)) {
                ++rep.zero_flags[k - 1];
                all_ok = false;
            }
        }
        if (all_ok) ++rep.all_nonzero;
    }
    return rep;
}

PicardReport picard_iterate(const RemainderField& v, const SemilinearProblem& prob, double T,
                            double k_weight, int n_time, int max_iter, double stop_tol) {
    v.validate();
    require(v.shape == prob.phi.shape, "picard_iterate: grid mismatch");
    require(T > 0.0, "picard_iterate: T must be positive");
    require(k_weight > 0.0, "picard_iterate: k_weight must be positive");
    require(n_time >= 2, "picard_iterate: n_time must be >= 2");
    require(max_iter >= 1, "picard_iterate: max_iter must be >= 1");

    const double dt = T / n_time;
    const int nt = n_time + 1;
    std::vector<RemainderField> base(nt);
    base[0] = v;
    for (int i = 1; i < nt; ++i) base[i] = heat_apply(base[i - 1], ComplexTime{dt});
    std::vector<RemainderField> cur = base;
    std::vector<RemainderField> next(nt);

    auto reaction = [&](const RemainderField& u) {
        RemainderField out = u;
        for (std::size_t i = 0; i < u.size(); ++i) {
            double uu = u.data[i];
            out.data[i] = prob.phi.data[i] - prob.psi.data[i] * uu * uu * uu;
        }
        return out;
    };

    PicardReport rep;
    for (int m = 1; m <= max_iter; ++m) {
        RemainderField Fprev = reaction(cur[0]);
        RemainderField I = v;
        std::fill(I.data.begin(), I.data.end(), 0.0);
        next[0] = base[0];
        for (int i = 1; i < nt; ++i) {
            RemainderField Fi = reaction(cur[i]);
            axpy(I, dt / 2.0, Fprev);
            I = heat_apply(I, ComplexTime{dt});
            axpy(I, dt / 2.0, Fi);
            next[i] = base[i];
            axpy(next[i], 1.0, I);
            Fprev = std::move(Fi);
        }
        double dist = 0.0;
        for (int i = 0; i < nt; ++i) {
            double dmax = 0.0;
            for (std::size_t j = 0; j < next[i].size(); ++j)
                dmax = std::max(dmax, std::abs(next[i].data[j] - cur[i].data[j]));
            dist = std::max(dist, std::exp(-k_weight * (dt * i)) * dmax);
        }
        rep.weighted_distances.push_back(dist);
        rep.iterations = m;
        cur.swap(next);
        if (dist < stop_tol) break;
        if (!rep.weighted_distances.empty() &&
            dist > 1e3 * std::max(rep.weighted_distances.front(), 1e-300))
            throw std::runtime_error("picard_iterate: iteration diverged");
    }
    if (rep.iterations == max_iter && !rep.weighted_distances.empty() &&
        rep.weighted_distances.back() > std::max(stop_tol, rep.weighted_distances.front()))
        throw std::runtime_error("picard_iterate: no contraction after max_iter iterations");
    for (std::size_t i = 1; i < rep.weighted_distances.size(); ++i) {
        double prev = rep.weighted_distances[i - 1];
        if (prev > 0.0) rep.ratios.push_back(rep.weighted_distances[i] / prev);
    }
    return rep;
}

} // namespace asympheat
