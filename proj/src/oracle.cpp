#include "asympheat/oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace asympheat::oracle {

RemainderField gaussian_convolve(const std::function<double(const std::vector<double>&)>& v,
                                 double t, const RemainderField& grid_like) {
    if (!(t > 0.0)) throw std::invalid_argument("gaussian_convolve: t must be > 0");
    const int d = grid_like.d;
    const double h = grid_like.spacing;
    // truncation radius: erfc(6) ~ 2e-17 of the kernel mass per axis
    const double radius = 12.0 * std::sqrt(t);
    const int pad = static_cast<int>(std::ceil(radius / h));

    // sample v on the padded lattice
    std::vector<int> pshape(grid_like.shape);
    for (int& s : pshape) s += 2 * pad;
    std::size_t pn = 1;
    for (int s : pshape) pn *= static_cast<std::size_t>(s);
    std::vector<double> buf(pn);
    {
        std::vector<double> x(d);
        std::vector<int> idx(d, 0);
        for (std::size_t flat = 0; flat < pn; ++flat) {
            for (int a = 0; a < d; ++a) x[a] = grid_like.origin[a] + h * (idx[a] - pad);
            buf[flat] = v(x);
            for (int a = d - 1; a >= 0; --a) {
                if (++idx[a] < pshape[a]) break;
                idx[a] = 0;
            }
        }
    }

    // 1-D kernel weights, plain Riemann sum (tails decay below 1e-16)
    std::vector<double> w(2 * pad + 1);
    const double norm = h / std::sqrt(4.0 * M_PI * t);
    for (int k = -pad; k <= pad; ++k)
        w[k + pad] = norm * std::exp(-(k * h) * (k * h) / (4.0 * t));

    // convolve along each axis in turn; shrink the padded box back per axis
    std::vector<int> cur = pshape;
    for (int axis = 0; axis < d; ++axis) {
        std::vector<int> next = cur;
        next[axis] -= 2 * pad;
        std::size_t nn = 1;
        for (int s : next) nn *= static_cast<std::size_t>(s);
        std::vector<double> out(nn);
        std::size_t stride = 1;
        for (int a = d - 1; a > axis; --a) stride *= static_cast<std::size_t>(cur[a]);
        std::vector<int> idx(d, 0);
        for (std::size_t flat = 0; flat < nn; ++flat) {
            // index in the source buffer: shift by +pad along `axis`
            std::size_t src = 0;
            for (int a = 0; a < d; ++a)
                src = src * cur[a] + (a == axis ? idx[a] + pad : idx[a]);
            double acc = 0.0;
            const double* base = buf.data() + src - static_cast<std::size_t>(pad) * stride;
            for (int k = 0; k <= 2 * pad; ++k)
                acc += w[k] * base[static_cast<std::size_t>(k) * stride];
            out[flat] = acc;
            for (int a = d - 1; a >= 0; --a) {
                if (++idx[a] < next[a]) break;
                idx[a] = 0;
            }
        }
        buf.swap(out);
        cur = next;
    }

    RemainderField result = grid_like;
    result.data = buf;
    return result;
}

namespace {

// self potential of the unit cube, C = int_{[-1/2,1/2]^3} du/|u|, computed
// once via a self-similar subdivision (the central subcell reproduces C at
// scale 1/n, giving C = S / (1 - 1/n^2))
double cube_self_potential() {
    static double cached = 0.0;
    if (cached != 0.0) return cached;
    const int n = 21; // odd so a subcell sits at the center
    double s = 0.0;
    const double sub = 1.0 / n;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                const double x = (i + 0.5) * sub - 0.5;
                const double y = (j + 0.5) * sub - 0.5;
                const double z = (k + 0.5) * sub - 0.5;
                const double r = std::sqrt(x * x + y * y + z * z);
                if (r < 0.25 * sub) continue; // central cell handled implicitly
                s += sub * sub * sub / r;
            }
    cached = s / (1.0 - 1.0 / (static_cast<double>(n) * n));
    return cached;
}

} // namespace

std::vector<double> newtonian_potential(const RemainderField& rho, int stride,
                                        const std::vector<std::vector<double>>& targets) {
    if (rho.d != 3) throw std::invalid_argument("newtonian_potential: d must be 3");
    if (stride < 1) throw std::invalid_argument("newtonian_potential: stride must be >= 1");
    const double hs = rho.spacing * stride;
    const double cell_vol = hs * hs * hs;
    const double self_term = cube_self_potential() * hs * hs;

    // gather the strided source lattice once
    std::vector<double> sx, sy, sz, sv;
    for (int i = 0; i < rho.shape[0]; i += stride)
        for (int j = 0; j < rho.shape[1]; j += stride)
            for (int k = 0; k < rho.shape[2]; k += stride) {
                std::size_t flat = (static_cast<std::size_t>(i) * rho.shape[1] + j) * rho.shape[2] + k;
                const double val = rho.data[flat];
                if (val == 0.0) continue;
                sx.push_back(rho.coord(0, i));
                sy.push_back(rho.coord(1, j));
                sz.push_back(rho.coord(2, k));
                sv.push_back(val);
            }

    std::vector<double> out;
    out.reserve(targets.size());
    const double tol = 1e-12 * rho.spacing;
    for (const auto& x : targets) {
        double acc = 0.0;
        for (std::size_t s = 0; s < sv.size(); ++s) {
            const double dx = x[0] - sx[s], dy = x[1] - sy[s], dz = x[2] - sz[s];
            const double r = std::sqrt(dx * dx + dy * dy + dz * dz);
            if (r < tol)
                acc += sv[s] * self_term;
            else
                acc += sv[s] * cell_vol / r;
        }
        out.push_back(-acc / (4.0 * M_PI));
    }
    return out;
}

namespace {

// second derivative along one axis, order 2 or 4 centered, order-2 one-sided
// at the edges; independent of the stencils used by the norm machinery
void second_derivative_axis(const RemainderField& f, int axis, int order, RemainderField& out) {
    const int n = f.shape[axis];
    const double h2 = f.spacing * f.spacing;
    std::size_t stride = 1;
    for (int a = f.d - 1; a > axis; --a) stride *= static_cast<std::size_t>(f.shape[a]);
    for_each_index(f.shape, [&](const std::vector<int>& idx, std::size_t flat) {
        const int i = idx[axis];
        auto v = [&](int off) { return f.data[flat + static_cast<std::ptrdiff_t>(off) * static_cast<std::ptrdiff_t>(stride)]; };
        double acc;
        if (order == 4 && i >= 2 && i <= n - 3) {
            acc = (-v(-2) + 16.0 * v(-1) - 30.0 * v(0) + 16.0 * v(1) - v(2)) / 12.0;
        } else if (i >= 1 && i <= n - 2) {
            acc = v(-1) - 2.0 * v(0) + v(1);
        } else if (i == 0) {
            acc = 2.0 * v(0) - 5.0 * v(1) + 4.0 * v(2) - v(3);
        } else {
            acc = 2.0 * v(0) - 5.0 * v(-1) + 4.0 * v(-2) - v(-3);
        }
        out.data[flat] += acc / h2;
    });
}

void first_derivative_axis(const RemainderField& f, int axis, RemainderField& out) {
    const int n = f.shape[axis];
    const double h = f.spacing;
    std::size_t stride = 1;
    for (int a = f.d - 1; a > axis; --a) stride *= static_cast<std::size_t>(f.shape[a]);
    for_each_index(f.shape, [&](const std::vector<int>& idx, std::size_t flat) {
        const int i = idx[axis];
        auto v = [&](int off) { return f.data[flat + static_cast<std::ptrdiff_t>(off) * static_cast<std::ptrdiff_t>(stride)]; };
        double acc;
        if (i >= 1 && i <= n - 2) acc = 0.5 * (v(1) - v(-1));
        else if (i == 0) acc = -1.5 * v(0) + 2.0 * v(1) - 0.5 * v(2);
        else acc = 1.5 * v(0) - 2.0 * v(-1) + 0.5 * v(-2);
        out.data[flat] = acc / h;
    });
}

} // namespace

RemainderField fd_laplacian(const RemainderField& f, int order) {
    if (order != 2 && order != 4) throw std::invalid_argument("fd_laplacian: order must be 2 or 4");
    RemainderField out = f;
    std::fill(out.data.begin(), out.data.end(), 0.0);
    for (int a = 0; a < f.d; ++a) second_derivative_axis(f, a, order, out);
    return out;
}

ConjugationReport l_delta_conjugation_check(const RemainderField& f, double delta) {
    const int d = f.d;
    // left side: <x>^delta Lap_h( <x>^-delta f )
    RemainderField weighted = f;
    for (std::size_t i = 0; i < f.size(); ++i)
        weighted.data[i] *= bracket_weight(f, i, -delta);
    RemainderField lhs = fd_laplacian(weighted, 2);
    for (std::size_t i = 0; i < f.size(); ++i)
        lhs.data[i] *= bracket_weight(f, i, delta);

    // right side: Lap f - 2 delta <x>^-2 x.grad f + (delta(delta+2)|x|^2<x>^-4 - delta d <x>^-2) f
    RemainderField rhs = fd_laplacian(f, 2);
    std::vector<RemainderField> grads;
    for (int a = 0; a < d; ++a) {
        RemainderField g = f;
        first_derivative_axis(f, a, g);
        grads.push_back(g);
    }
    std::vector<double> x;
    ConjugationReport rep;
    for (std::size_t i = 0; i < f.size(); ++i) {
        point_of_flat(f, i, x);
        double r2 = 0.0;
        for (double c : x) r2 += c * c;
        const double br2 = 1.0 + r2;
        double xdotgrad = 0.0;
        for (int a = 0; a < d; ++a) xdotgrad += x[a] * grads[a].data[i];
        rhs.data[i] += -2.0 * delta / br2 * xdotgrad +
                       (delta * (delta + 2.0) * r2 / (br2 * br2) - delta * d / br2) * f.data[i];
    }
    // compare away from the boundary closures (two cells in)
    for_each_index(f.shape, [&](const std::vector<int>& idx, std::size_t flat) {
        for (int a = 0; a < d; ++a)
            if (idx[a] < 2 || idx[a] > f.shape[a] - 3) return;
        rep.max_residual = std::max(rep.max_residual, std::abs(lhs.data[flat] - rhs.data[flat]));
        rep.scale = std::max(rep.scale, std::abs(lhs.data[flat]));
    });
    return rep;
}

} // namespace asympheat::oracle
