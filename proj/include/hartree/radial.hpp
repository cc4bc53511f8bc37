#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace hartree {

// Midpoint radial mesh for d = 3: nodes r_j = (j + 1/2) R/m, node weight
// w_j = 4 pi r_j^2 (R/m).  Midpoint nodes avoid r = 0.
struct RadialGrid {
    int m = 8192;
    double R = 40.0;

    double dr() const { return R / m; }
    double node(int j) const { return (j + 0.5) * dr(); }
    double weight(int j) const {
        double r = node(j);
        return 4.0 * M_PI * r * r * dr();
    }

    bool operator==(const RadialGrid&) const = default;
};

RadialGrid make_radial_grid(int m, double R);

struct RadialField {
    RadialGrid rgrid;
    std::vector<double> values;

    RadialField() = default;
    explicit RadialField(const RadialGrid& g) : rgrid(g), values(g.m, 0.0) {}

    double& operator[](std::size_t j) { return values[j]; }
    double operator[](std::size_t j) const { return values[j]; }
    int m() const { return rgrid.m; }
};

RadialField sample_radial(const RadialGrid& g,
                          const std::function<double(double)>& f);

// sum_j a_j b_j w_j
double inner_radial(const RadialField& a, const RadialField& b);
double mass_radial(const RadialField& u);

// Kinetic energy via the conservative finite-difference form
//   T = 4 pi dr sum_{j=0}^{m-1} ((j+1) dr)^2 ((u_{j+1}-u_j)/dr)^2,  u_m = 0,
// the quadratic form of minus_laplacian_radial.
double kinetic_radial(const RadialField& u);

// Conservative FD radial Laplacian with a natural (zero-flux) origin and a
// Dirichlet condition u(R) = 0.
RadialField minus_laplacian_radial(const RadialField& u);

// Solves (I + tau * (-Lap + V)) out = rhs by the Thomas algorithm.
// V may be empty (treated as zero).
RadialField solve_radial_helmholtz(const RadialField& rhs, double tau,
                                   const std::vector<double>& V);

// (|.|^-2 * rho)(r) = (2 pi / r) int_0^R s rho(s) ln((r+s)/|r-s|) ds  (d = 3).
// Midpoint quadrature with the log-diagonal cell integrated analytically;
// evaluated in O(m log m) by splitting the kernel into Toeplitz and Hankel
// parts, with exact near-diagonal corrections.
RadialField riesz_convolve_radial(const RadialField& rho);

// O(m^2) reference using closed-form per-cell integrals of the log kernel
// (test oracle; independent of the FFT path).
RadialField riesz_convolve_radial_direct(const RadialField& rho);

// D(u) for radial u: sum_j u_j^2 (K * u^2)(r_j) w_j.
double hartree_radial(const RadialField& u);

// Cubic (Catmull-Rom) interpolation of a radial profile; even extension at
// the origin, zero beyond R.
double interp_radial(const RadialField& u, double r);

// u(b r) resampled on the same mesh.
RadialField dilate_radial(const RadialField& u, double b);

}  // namespace hartree
