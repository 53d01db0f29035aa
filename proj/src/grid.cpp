#include "asympheat/grid.hpp"

#include <cmath>
#include <numeric>

namespace asympheat {

static std::size_t product(const std::vector<int>& shape) {
    std::size_t n = 1;
    for (int s : shape) n *= static_cast<std::size_t>(s);
    return n;
}

void RemainderField::validate() const {
    if (d < 1 || d > 3) throw std::invalid_argument("field: d must be 1, 2 or 3");
    if (static_cast<int>(shape.size()) != d) throw std::invalid_argument("field: shape rank != d");
    for (int s : shape)
        if (s < 2) throw std::invalid_argument("field: axis shorter than 2 points");
    if (!(spacing > 0.0)) throw std::invalid_argument("field: spacing must be positive");
    if (data.size() != product(shape)) throw std::invalid_argument("field: data size mismatch");
    for (int a = 0; a < d; ++a) {
        double want = -0.5 * spacing * (shape[a] - 1);
        if (std::abs(origin[a] - want) > 1e-9 * spacing)
            throw std::invalid_argument("field: box must be centered (origin = -(shape-1)h/2)");
    }
}

double& RemainderField::at(const std::vector<int>& idx) { return data[flat_index(shape, idx)]; }
double RemainderField::at(const std::vector<int>& idx) const { return data[flat_index(shape, idx)]; }

RemainderField make_field(int d, const std::vector<int>& shape, double spacing) {
    RemainderField f;
    f.d = d;
    f.shape = shape;
    f.spacing = spacing;
    f.origin.resize(d);
    for (int a = 0; a < d; ++a) f.origin[a] = -0.5 * spacing * (shape[a] - 1);
    f.data.assign(product(shape), 0.0);
    f.validate();
    return f;
}

RemainderField make_field_box(int d, int n, double half_width) {
    return make_field(d, std::vector<int>(d, n), 2.0 * half_width / n);
}

ComplexField make_complex_like(const RemainderField& f) {
    ComplexField c;
    c.d = f.d;
    c.shape = f.shape;
    c.spacing = f.spacing;
    c.origin = f.origin;
    c.data.assign(f.data.size(), {0.0, 0.0});
    return c;
}

static RemainderField part_like(const ComplexField& c, bool re) {
    RemainderField f;
    f.d = c.d;
    f.shape = c.shape;
    f.spacing = c.spacing;
    f.origin = c.origin;
    f.data.resize(c.data.size());
    for (std::size_t i = 0; i < c.data.size(); ++i)
        f.data[i] = re ? c.data[i].real() : c.data[i].imag();
    return f;
}

RemainderField ComplexField::real_part() const { return part_like(*this, true); }
RemainderField ComplexField::imag_part() const { return part_like(*this, false); }

RemainderField ComplexField::abs() const {
    RemainderField f = part_like(*this, true);
    for (std::size_t i = 0; i < data.size(); ++i) f.data[i] = std::abs(data[i]);
    return f;
}

std::size_t flat_index(const std::vector<int>& shape, const std::vector<int>& idx) {
    std::size_t flat = 0;
    for (std::size_t a = 0; a < shape.size(); ++a)
        flat = flat * shape[a] + idx[a];
    return flat;
}

void for_each_index(const std::vector<int>& shape,
                    const std::function<void(const std::vector<int>&, std::size_t)>& fn) {
    const int d = static_cast<int>(shape.size());
    std::vector<int> idx(d, 0);
    std::size_t flat = 0;
    const std::size_t total = product(shape);
    while (flat < total) {
        fn(idx, flat);
        ++flat;
        for (int a = d - 1; a >= 0; --a) {
            if (++idx[a] < shape[a]) break;
            idx[a] = 0;
        }
    }
}

void point_of_flat(const RemainderField& f, std::size_t flat, std::vector<double>& x) {
    x.resize(f.d);
    std::size_t rem = flat;
    for (int a = f.d - 1; a >= 0; --a) {
        std::size_t n = static_cast<std::size_t>(f.shape[a]);
        int i = static_cast<int>(rem % n);
        rem /= n;
        x[a] = f.origin[a] + f.spacing * i;
    }
}

double trapezoid_weight(const RemainderField& f, std::size_t flat) {
    double w = std::pow(f.spacing, f.d);
    std::size_t rem = flat;
    for (int a = f.d - 1; a >= 0; --a) {
        std::size_t n = static_cast<std::size_t>(f.shape[a]);
        int i = static_cast<int>(rem % n);
        rem /= n;
        if (i == 0 || i == f.shape[a] - 1) w *= 0.5;
    }
    return w;
}

double lp_norm(const RemainderField& f, double p) {
    if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: p must be >= 1");
    double acc = 0.0;
    for (std::size_t i = 0; i < f.data.size(); ++i)
        acc += trapezoid_weight(f, i) * std::pow(std::abs(f.data[i]), p);
    return std::pow(acc, 1.0 / p);
}

double sup_norm(const RemainderField& f) {
    double m = 0.0;
    for (double v : f.data) m = std::max(m, std::abs(v));
    return m;
}

double interpolate(const RemainderField& f, const std::vector<double>& x) {
    // multilinear; any point outside the hull of grid nodes evaluates to 0
    std::vector<int> base(f.d);
    std::vector<double> frac(f.d);
    for (int a = 0; a < f.d; ++a) {
        double s = (x[a] - f.origin[a]) / f.spacing;
        if (s < 0.0 || s > f.shape[a] - 1) return 0.0;
        int i = static_cast<int>(std::floor(s));
        if (i >= f.shape[a] - 1) i = f.shape[a] - 2;
        base[a] = i;
        frac[a] = s - i;
    }
    double acc = 0.0;
    const int corners = 1 << f.d;
    std::vector<int> idx(f.d);
    for (int c = 0; c < corners; ++c) {
        double w = 1.0;
        for (int a = 0; a < f.d; ++a) {
            int bit = (c >> a) & 1;
            idx[a] = base[a] + bit;
            w *= bit ? frac[a] : (1.0 - frac[a]);
        }
        if (w != 0.0) acc += w * f.at(idx);
    }
    return acc;
}

RemainderField& axpy(RemainderField& y, double a, const RemainderField& x) {
    for (std::size_t i = 0; i < y.data.size(); ++i) y.data[i] += a * x.data[i];
    return y;
}

double dot(const RemainderField& a, const RemainderField& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) acc += a.data[i] * b.data[i];
    return acc;
}

double mean(const RemainderField& f) {
    double acc = std::accumulate(f.data.begin(), f.data.end(), 0.0);
    return acc / static_cast<double>(f.data.size());
}

double bracket_weight(const RemainderField& f, std::size_t flat, double w) {
    std::vector<double> x;
    point_of_flat(f, flat, x);
    double r2 = 0.0;
    for (double v : x) r2 += v * v;
    return std::pow(1.0 + r2, 0.5 * w);
}

} // namespace asympheat
