#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace hartree {

// Periodic box discretization of R^d: domain [-L, L)^d sampled with n points
// per axis, spacing h = 2L/n.  Grid point i along an axis sits at -L + i*h,
// so the origin is a grid point (n even).
struct GridSpec {
    int d = 3;
    double L = 16.0;
    int n = 128;

    double h() const { return 2.0 * L / n; }
    std::size_t size() const;
    double cell_volume() const;   // h^d
    double box_volume() const;    // (2L)^d
    double coord(int i) const { return -L + i * h(); }

    bool operator==(const GridSpec&) const = default;
};

// Validates d in {3,4,5}, n even >= 8, L > 0.
GridSpec make_grid(int d, double L, int n);

// Real scalar field sampled on a GridSpec, row-major (first axis slowest).
struct Field {
    GridSpec grid;
    std::vector<double> values;

    Field() = default;
    explicit Field(const GridSpec& g) : grid(g), values(g.size(), 0.0) {}

    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
    std::size_t size() const { return values.size(); }
};

// Samples f(x) at every grid point; f receives the coordinate vector.
Field sample_field(const GridSpec& g,
                   const std::function<double(const std::vector<double>&)>& f);

// Throws if the field contains NaN/Inf or its length is inconsistent.
void check_field(const Field& u);

// Discrete L2 pairing:  sum_i a_i b_i h^d.
double inner(const Field& a, const Field& b);
// mass(u) = ||u||_2^2 = inner(u, u).
double mass(const Field& u);
double max_abs(const Field& u);

// Fraction of the mass of u inside the ball |x - center| <= radius.
double mass_fraction_in_ball(const Field& u, double radius,
                             const std::vector<double>& center = {});

// Index of the maximum of |u| (ties: smallest flat index), plus coordinates.
std::size_t argmax_abs(const Field& u);
std::vector<double> index_coords(const GridSpec& g, std::size_t flat);

// Spectral kinetic energy  sum_k |k|^2 |u_hat(k)|^2, normalized so it
// converges to  int |grad u|^2 dx  under grid refinement.  Always >= 0.
double kinetic_energy(const Field& u);

// (|.|^-2 * rho)(x) on the periodic box, via FFT of the grid-sampled kernel.
// The kernel origin cell carries the analytic cell average of 1/|x|^2 over a
// cube of side h, which keeps the transform finite and the operation
// bit-consistent with brute_force_riesz.
Field riesz_convolve(const Field& rho);

// O(n^{2d}) double-sum reference with the same discretized kernel.
// Rejects n > 16.
Field brute_force_riesz(const Field& rho);

// D(u) = <u^2, riesz_convolve(u^2)> h^d  (the nonlocal double integral).
double hartree_term(const Field& u);

// The grid-sampled kernel table itself (minimum-image 1/|x|^2 with the
// regularized origin cell).  Shared by riesz_convolve and brute_force_riesz.
Field riesz_kernel_table(const GridSpec& g);

// int u^2 / |x|^2 dx with the same origin-cell regularization as the kernel.
double hardy_integral(const Field& u);

// Analytic-accuracy value of  int_{[-1/2,1/2]^d} |x|^-2 dx  (d >= 3).
double unit_cube_inv_square_integral(int d);

// Applies -Laplacian spectrally; used for residuals and multipliers.
Field apply_minus_laplacian(const Field& u);

// Solves (I + tau*(-Laplacian)) v = rhs spectrally and writes v over rhs.
void solve_helmholtz_inplace(Field& rhs, double tau);

}  // namespace hartree
