#pragma once

// Independent cross-validation routes. Everything here uses direct real-space
// quadrature and its own finite-difference stencils; none of it touches the
// spectral machinery it is used to check.

#include <functional>
#include <vector>

#include "asympheat/grid.hpp"

namespace asympheat::oracle {

// Heat kernel smoothing (4 pi t)^{-d/2} int exp(-|x-y|^2/(4t)) v(y) dy,
// realized as a separable truncated-kernel convolution on a padded uniform
// grid; the pad radius is chosen so the discarded kernel mass is < 1e-12.
// v is evaluated analytically at the padded points.
RemainderField gaussian_convolve(const std::function<double(const std::vector<double>&)>& v,
                                 double t, const RemainderField& grid_like);

// -(1/4pi) sum_y rho(y)/|x-y| (stride*h)^3 over the strided source lattice,
// with the singular self-cell replaced by its exact cell average. d = 3 only.
std::vector<double> newtonian_potential(const RemainderField& rho, int stride,
                                        const std::vector<std::vector<double>>& targets);

// Centered order-2 or order-4 Laplacian stencils; points whose stencil would
// leave the box fall back to an order-2 one-sided closure.
RemainderField fd_laplacian(const RemainderField& f, int order);

struct ConjugationReport {
    double max_residual = 0.0; // sup over interior points
    double scale = 0.0;        // sup of the conjugated field, for context
};

// Checks <x>^delta Lap_h ( <x>^-delta f ) against the expanded first-order
// form (drift + potential terms), both sides with the oracle's own order-2
// stencils; the residual is pure discretization error, O(h^2).
ConjugationReport l_delta_conjugation_check(const RemainderField& f, double delta);

} // namespace asympheat::oracle
