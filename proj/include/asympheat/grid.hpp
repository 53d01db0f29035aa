#pragma once

// Uniform centered Cartesian boxes and the sampled fields that live on them.
// The box is always centered at the origin: origin[a] = -(shape[a]-1)*h/2,
// so a field of shape n and spacing h periodizes cleanly with period n*h.

#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace asympheat {

struct RemainderField {
    int d = 0;
    std::vector<int> shape;     // points per axis
    double spacing = 0.0;       // h, identical for all axes
    std::vector<double> origin; // -(shape-1)*h/2 per axis
    std::vector<double> data;   // row-major, size = prod(shape)

    std::size_t size() const { return data.size(); }

    double& at(const std::vector<int>& idx);
    double at(const std::vector<int>& idx) const;

    // coordinate of grid index i along axis a
    double coord(int a, int i) const { return origin[a] + spacing * i; }

    void validate() const; // throws std::invalid_argument on malformed metadata
};

// Complex-valued companion used by complex-time propagation and resolvents.
struct ComplexField {
    int d = 0;
    std::vector<int> shape;
    double spacing = 0.0;
    std::vector<double> origin;
    std::vector<std::complex<double>> data;

    RemainderField real_part() const;
    RemainderField imag_part() const;
    RemainderField abs() const;
};

// Field of given shape filled with zeros, centered box.
RemainderField make_field(int d, const std::vector<int>& shape, double spacing);
// Convenience: cube of n points per axis with total side 2*half_width
// (spacing 2*half_width/n, so the periodization period is exactly 2*half_width).
RemainderField make_field_box(int d, int n, double half_width);

ComplexField make_complex_like(const RemainderField& f);

std::size_t flat_index(const std::vector<int>& shape, const std::vector<int>& idx);

// Visits all grid points in row-major order; idx is reused across calls.
void for_each_index(const std::vector<int>& shape,
                    const std::function<void(const std::vector<int>&, std::size_t)>& fn);

// Fills x with the coordinates of flat index `flat`.
void point_of_flat(const RemainderField& f, std::size_t flat, std::vector<double>& x);

// Trapezoid quadrature weight (h^d times per-axis 1/2 boundary factors).
double trapezoid_weight(const RemainderField& f, std::size_t flat);

// L^p norm with trapezoid weights; p is a runtime real >= 1.
double lp_norm(const RemainderField& f, double p);
double sup_norm(const RemainderField& f);

// Multilinear interpolation; returns 0 outside the box hull.
double interpolate(const RemainderField& f, const std::vector<double>& x);

// Elementwise helpers
RemainderField& axpy(RemainderField& y, double a, const RemainderField& x); // y += a*x
double dot(const RemainderField& a, const RemainderField& b);               // plain grid dot
double mean(const RemainderField& f);

// <x>^w = (1+|x|^2)^(w/2) evaluated at the grid point with flat index `flat`.
double bracket_weight(const RemainderField& f, std::size_t flat, double w);

} // namespace asympheat
