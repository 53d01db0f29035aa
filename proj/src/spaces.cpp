#include "asympheat/spaces.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <stdexcept>

using nlohmann::json;

namespace asympheat {

int n_star(int N, int d, double p) {
    if (!(p > 1.0)) throw std::invalid_argument("n_star: p must be > 1");
    // scan the integer candidates; avoids floating edge cases of floor(N + d/p)
    const double dp = static_cast<double>(d) / p;
    for (int c = N; c <= N + d + 1; ++c) {
        if (static_cast<double>(N) - 1.0 < c - dp && c - dp <= static_cast<double>(N)) return c;
    }
    throw std::logic_error("n_star: no integer candidate found");
}

namespace {

// C^3 septic step on [0,1]: q(0)=0, q(1)=1, q', q'', q''' vanish at both ends
double septic(double s) { return s * s * s * s * (35.0 + s * (-84.0 + s * (70.0 - 20.0 * s))); }
double septic_d1(double s) { return s * s * s * (140.0 + s * (-420.0 + s * (420.0 - 140.0 * s))); }
double septic_d2(double s) { return s * s * (420.0 + s * (-1680.0 + s * (2100.0 - 840.0 * s))); }

double bump_g(double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; }
double bump_g1(double s) { return s > 0.0 ? bump_g(s) / (s * s) : 0.0; }
double bump_g2(double s) {
    if (s <= 0.0) return 0.0;
    return bump_g(s) * (1.0 - 2.0 * s) / (s * s * s * s);
}

void bump_value_derivs(double s, double& v, double& v1, double& v2) {
    // v = g(s) / (g(s) + g(1-s)), smooth transition on (0,1)
    const double a = bump_g(s), b = bump_g(1.0 - s);
    const double a1 = bump_g1(s), b1 = -bump_g1(1.0 - s);
    const double a2 = bump_g2(s), b2 = bump_g2(1.0 - s);
    const double den = a + b;
    v = a / den;
    const double den1 = a1 + b1;
    v1 = (a1 * den - a * den1) / (den * den);
    const double den2 = a2 + b2;
    v2 = (a2 * den - a * den2) / (den * den) - 2.0 * den1 * v1 / den;
}

} // namespace

double CutoffSpec::value(double r) const {
    if (r <= r0) return 0.0;
    if (r >= r1) return 1.0;
    const double s = (r - r0) / (r1 - r0);
    if (kind == Kind::polynomial) return septic(s);
    double v, v1, v2;
    bump_value_derivs(s, v, v1, v2);
    return v;
}

double CutoffSpec::d1(double r) const {
    if (r <= r0 || r >= r1) return 0.0;
    const double w = r1 - r0;
    const double s = (r - r0) / w;
    if (kind == Kind::polynomial) return septic_d1(s) / w;
    double v, v1, v2;
    bump_value_derivs(s, v, v1, v2);
    return v1 / w;
}

double CutoffSpec::d2(double r) const {
    if (r <= r0 || r >= r1) return 0.0;
    const double w = r1 - r0;
    const double s = (r - r0) / w;
    if (kind == Kind::polynomial) return septic_d2(s) / (w * w);
    double v, v1, v2;
    bump_value_derivs(s, v, v1, v2);
    return v2 / (w * w);
}

double cutoff_eval(const CutoffSpec& c, double r) { return c.value(r); }

AsymptoticChart make_chart(int d, int n, int N, double p, int L_max) {
    if (n < 0 || N < n) throw std::invalid_argument("chart: need 0 <= n <= N");
    AsymptoticChart c;
    c.d = d;
    c.n = n;
    c.N = N;
    c.N_star = n_star(N, d, p);
    c.L_max = L_max;
    c.coeffs.assign(c.count(), make_sphere_function(d, L_max));
    c.reg_ladder.assign(c.count(), 0);
    return c;
}

double eval_asymptotic(const AsymptoticFunction& v, const std::vector<double>& x) {
    double r2 = 0.0;
    for (double c : x) r2 += c * c;
    const double r = std::sqrt(r2);
    double out = interpolate(v.f, x);
    const double chi = v.cutoff.value(r);
    if (chi != 0.0 && r > 0.0) {
        static thread_local std::vector<double> dir;
        dir.resize(v.chart.d);
        for (int a = 0; a < v.chart.d; ++a) dir[a] = x[a] / r;
        static thread_local std::vector<double> basis;
        sphere_basis(v.chart.d, v.chart.L_max, dir.data(), basis);
        double chart_val = 0.0;
        double rk = std::pow(r, -v.chart.n);
        for (int k = v.chart.n; k <= v.chart.N_star; ++k) {
            const SphereFunction& ak = v.chart.a(k);
            double s = 0.0;
            for (std::size_t i = 0; i < basis.size(); ++i) s += ak.coeffs[i] * basis[i];
            chart_val += s * rk;
            rk /= r;
        }
        out += chi * chart_val;
    }
    return out;
}

RemainderField sample_chart(const AsymptoticChart& chart, const CutoffSpec& cutoff,
                            const RemainderField& grid_like) {
    RemainderField out = grid_like;
    std::fill(out.data.begin(), out.data.end(), 0.0);
    std::vector<double> x, dir(chart.d), basis;
    for (std::size_t flat = 0; flat < out.size(); ++flat) {
        point_of_flat(out, flat, x);
        double r2 = 0.0;
        for (double c : x) r2 += c * c;
        const double r = std::sqrt(r2);
        const double chi = cutoff.value(r);
        if (chi == 0.0 || r == 0.0) continue;
        for (int a = 0; a < chart.d; ++a) dir[a] = x[a] / r;
        sphere_basis(chart.d, chart.L_max, dir.data(), basis);
        double chart_val = 0.0;
        double rk = std::pow(r, -chart.n);
        for (int k = chart.n; k <= chart.N_star; ++k) {
            const SphereFunction& ak = chart.a(k);
            double s = 0.0;
            for (std::size_t i = 0; i < basis.size(); ++i) s += ak.coeffs[i] * basis[i];
            chart_val += s * rk;
            rk /= r;
        }
        out.data[flat] = chi * chart_val;
    }
    return out;
}

double default_gamma0(int d, double p) {
    if (p > d) return 0.5 * (1.0 - d / p);
    return 0.5 - d / p;
}

namespace {

// order-4 first-derivative stencils; rows are boundary offsets 0,1 then the
// centered row, mirrored at the right edge
void stencil_row(int i, int n, int& start, const double** w) {
    static const double c_left0[5] = {-25.0, 48.0, -36.0, 16.0, -3.0};
    static const double c_left1[5] = {-3.0, -10.0, 18.0, -6.0, 1.0};
    static const double c_mid[5] = {1.0, -8.0, 0.0, 8.0, -1.0};
    static const double c_right1[5] = {-1.0, 6.0, -18.0, 10.0, 3.0};
    static const double c_right0[5] = {3.0, -16.0, 36.0, -48.0, 25.0};
    if (i == 0) { start = 0; *w = c_left0; }
    else if (i == 1) { start = -1; *w = c_left1; }
    else if (i == n - 2) { start = -3; *w = c_right1; }
    else if (i == n - 1) { start = -4; *w = c_right0; }
    else { start = -2; *w = c_mid; }
}

// single d/dx_axis pass with order-4 stencils
RemainderField fd_axis_derivative(const RemainderField& f, int axis) {
    RemainderField out = f;
    const double inv = 1.0 / (12.0 * f.spacing);
    const int n = f.shape[axis];
    if (n < 5) throw std::invalid_argument("weighted_norm: axis too short for order-4 stencils");
    // stride of one step along `axis`
    std::size_t stride = 1;
    for (int a = f.d - 1; a > axis; --a) stride *= static_cast<std::size_t>(f.shape[a]);
    for_each_index(f.shape, [&](const std::vector<int>& idx, std::size_t flat) {
        int start;
        const double* w;
        stencil_row(idx[axis], n, start, &w);
        double acc = 0.0;
        for (int k = 0; k < 5; ++k) {
            const int off = start + k;
            acc += w[k] * f.data[flat + static_cast<std::ptrdiff_t>(off) * static_cast<std::ptrdiff_t>(stride)];
        }
        out.data[flat] = acc * inv;
    });
    return out;
}

void enumerate_multi_indices(int d, int m, std::vector<std::vector<int>>& out) {
    // all alpha with |alpha| <= m, graded lexicographic
    std::vector<int> alpha(d, 0);
    std::function<void(int, int)> rec = [&](int pos, int remaining) {
        if (pos == d) {
            out.push_back(alpha);
            return;
        }
        for (int k = 0; k <= remaining; ++k) {
            alpha[pos] = k;
            rec(pos + 1, remaining - k);
        }
        alpha[pos] = 0;
    };
    rec(0, m);
}

} // namespace

RemainderField fd_partial(const RemainderField& f, const std::vector<int>& alpha) {
    RemainderField out = f;
    for (int a = 0; a < f.d; ++a)
        for (int rep = 0; rep < alpha[a]; ++rep) out = fd_axis_derivative(out, a);
    return out;
}

double weighted_norm(const RemainderField& f, const NormSpec& spec) {
    if (spec.m > 4) throw std::invalid_argument("weighted_norm: m capped at 4");
    if (spec.m < 0) throw std::invalid_argument("weighted_norm: m must be >= 0");
    if (!(spec.p > 1.0)) throw std::invalid_argument("weighted_norm: p must be > 1");
    for (double v : f.data)
        if (!std::isfinite(v)) throw std::invalid_argument("weighted_norm: non-finite sample");
    std::vector<std::vector<int>> alphas;
    enumerate_multi_indices(f.d, spec.m, alphas);
    double total = 0.0;
    for (const auto& alpha : alphas) {
        int order = 0;
        for (int a : alpha) order += a;
        const double w_exp = spec.family == NormSpec::Family::W ? spec.weight + order : spec.weight;
        RemainderField der = fd_partial(f, alpha);
        double acc = 0.0;
        for (std::size_t i = 0; i < der.size(); ++i) {
            const double g = bracket_weight(der, i, w_exp) * der.data[i];
            acc += trapezoid_weight(der, i) * std::pow(std::abs(g), spec.p);
        }
        total += std::pow(acc, 1.0 / spec.p);
    }
    return total;
}

double asymptotic_norm(const AsymptoticFunction& v, int m, double p) {
    const AsymptoticChart& c = v.chart;
    double total = 0.0;
    for (int k = c.n; k <= c.N_star; ++k)
        total += sphere_sobolev_norm(c.a(k), m + 1 + c.N_star - k, p);
    NormSpec rem;
    rem.family = NormSpec::Family::H;
    rem.m = m;
    rem.p = p;
    rem.weight = static_cast<double>(c.N);
    total += weighted_norm(v.f, rem);
    return total;
}

WeightInequalityReport weight_inequality_check(int d, double delta, int n_samples,
                                               std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 10.0);
    WeightInequalityReport rep;
    rep.bound = std::pow(2.0, std::abs(delta) / 2.0);
    for (int s = 0; s < n_samples; ++s) {
        double x2 = 0.0, y2 = 0.0, xy2 = 0.0;
        for (int a = 0; a < d; ++a) {
            const double xa = gauss(rng), ya = gauss(rng);
            x2 += xa * xa;
            y2 += ya * ya;
            xy2 += (xa - ya) * (xa - ya);
        }
        const double num = std::pow(1.0 + x2, delta / 2.0) * std::pow(1.0 + y2, -delta / 2.0);
        const double den = std::pow(1.0 + xy2, std::abs(delta) / 2.0);
        rep.max_ratio = std::max(rep.max_ratio, num / den);
    }
    rep.within_bound = rep.max_ratio <= rep.bound * (1.0 + 1e-12);
    return rep;
}

// ---------------------------------------------------------------------------
// serialization

namespace {

json field_header(const RemainderField& f) {
    json j;
    j["format"] = "asympheat-field/1";
    j["d"] = f.d;
    j["shape"] = f.shape;
    j["spacing"] = f.spacing;
    j["origin"] = f.origin;
    j["dtype"] = "f64";
    j["order"] = "row-major";
    return j;
}

void write_raw(const std::vector<double>& data, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for write: " + path);
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size() * sizeof(double)));
}

std::vector<double> read_raw(const std::string& path, std::size_t count) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for read: " + path);
    std::vector<double> data(count);
    in.read(reinterpret_cast<char*>(data.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (static_cast<std::size_t>(in.gcount()) != count * sizeof(double))
        throw std::runtime_error("raw payload shorter than header shape: " + path);
    return data;
}

RemainderField field_from_header(const json& j, const std::string& base_path) {
    if (j.at("format").get<std::string>() != "asympheat-field/1")
        throw std::runtime_error("unknown field format in " + base_path);
    if (j.at("dtype").get<std::string>() != "f64" ||
        j.at("order").get<std::string>() != "row-major")
        throw std::runtime_error("unsupported field encoding in " + base_path);
    RemainderField f;
    f.d = j.at("d").get<int>();
    f.shape = j.at("shape").get<std::vector<int>>();
    f.spacing = j.at("spacing").get<double>();
    f.origin = j.at("origin").get<std::vector<double>>();
    std::size_t n = 1;
    for (int s : f.shape) n *= static_cast<std::size_t>(s);
    f.data = read_raw(base_path + ".f64", n);
    f.validate();
    return f;
}

json chart_to_json(const AsymptoticChart& c) {
    json j;
    j["d"] = c.d;
    j["n"] = c.n;
    j["N"] = c.N;
    j["N_star"] = c.N_star;
    j["L_max"] = c.L_max;
    json coeffs = json::object();
    for (int k = c.n; k <= c.N_star; ++k)
        coeffs[std::to_string(k)] = c.a(k).coeffs;
    j["coeffs"] = coeffs;
    return j;
}

AsymptoticChart chart_from_json(const json& j) {
    AsymptoticChart c;
    c.d = j.at("d").get<int>();
    c.n = j.at("n").get<int>();
    c.N = j.at("N").get<int>();
    c.N_star = j.at("N_star").get<int>();
    c.L_max = j.at("L_max").get<int>();
    c.coeffs.assign(c.count(), make_sphere_function(c.d, c.L_max));
    c.reg_ladder.assign(c.count(), 0);
    const json& coeffs = j.at("coeffs");
    for (int k = c.n; k <= c.N_star; ++k) {
        auto v = coeffs.at(std::to_string(k)).get<std::vector<double>>();
        if (v.size() != c.a(k).coeffs.size())
            throw std::runtime_error("chart coefficient length mismatch at k=" + std::to_string(k));
        c.a(k).coeffs = v;
    }
    return c;
}

json cutoff_to_json(const CutoffSpec& c) {
    json j;
    j["kind"] = c.kind == CutoffSpec::Kind::polynomial ? "polynomial" : "bump";
    j["r0"] = c.r0;
    j["r1"] = c.r1;
    return j;
}

CutoffSpec cutoff_from_json(const json& j) {
    CutoffSpec c;
    c.kind = j.at("kind").get<std::string>() == "bump" ? CutoffSpec::Kind::bump
                                                       : CutoffSpec::Kind::polynomial;
    c.r0 = j.at("r0").get<double>();
    c.r1 = j.at("r1").get<double>();
    return c;
}

} // namespace

void serialize_field(const RemainderField& f, const std::string& base_path) {
    f.validate();
    std::ofstream out(base_path + ".json");
    if (!out) throw std::runtime_error("cannot open for write: " + base_path + ".json");
    out << field_header(f).dump(2) << "\n";
    write_raw(f.data, base_path + ".f64");
}

RemainderField deserialize_field(const std::string& base_path) {
    std::ifstream in(base_path + ".json");
    if (!in) throw std::runtime_error("cannot open for read: " + base_path + ".json");
    json j = json::parse(in);
    return field_from_header(j, base_path);
}

void serialize_chart(const AsymptoticChart& chart, const std::string& json_path) {
    std::ofstream out(json_path);
    if (!out) throw std::runtime_error("cannot open for write: " + json_path);
    out << chart_to_json(chart).dump(2) << "\n";
}

AsymptoticChart deserialize_chart(const std::string& json_path) {
    std::ifstream in(json_path);
    if (!in) throw std::runtime_error("cannot open for read: " + json_path);
    return chart_from_json(json::parse(in));
}

void serialize_asymptotic(const AsymptoticFunction& v, const std::string& base_path) {
    v.f.validate();
    json j = field_header(v.f);
    j["chart"] = chart_to_json(v.chart);
    j["cutoff"] = cutoff_to_json(v.cutoff);
    std::ofstream out(base_path + ".json");
    if (!out) throw std::runtime_error("cannot open for write: " + base_path + ".json");
    out << j.dump(2) << "\n";
    write_raw(v.f.data, base_path + ".f64");
}

AsymptoticFunction deserialize_asymptotic(const std::string& base_path) {
    std::ifstream in(base_path + ".json");
    if (!in) throw std::runtime_error("cannot open for read: " + base_path + ".json");
    json j = json::parse(in);
    AsymptoticFunction v;
    v.f = field_from_header(j, base_path);
    v.chart = chart_from_json(j.at("chart"));
    v.cutoff = cutoff_from_json(j.at("cutoff"));
    return v;
}

} // namespace asympheat
