// Test-only quadrature oracles, independent of the library's spectral and
// radial evaluation paths.
#pragma once

#include <cmath>
#include <functional>

namespace oracles {

// Adaptive Simpson on [a,b].
inline double simpson_step(const std::function<double(double)>& f, double a,
                           double b, double fa, double fm, double fb,
                           double whole, double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a,
                        double b, double tol = 1e-12, int depth = 40) {
    // Split into panels first so localized integrands are not missed by the
    // top-level Simpson estimate.
    const int panels = 24;
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        double pa = a + (b - a) * p / panels;
        double pb = a + (b - a) * (p + 1) / panels;
        double fa = f(pa), fb = f(pb), fm = f(0.5 * (pa + pb));
        double whole = (pb - pa) / 6.0 * (fa + 4.0 * fm + fb);
        total += simpson_step(f, pa, pb, fa, fm, fb, whole, tol / panels,
                              depth);
    }
    return total;
}

// int_{R^3} F(|x|) dx by radial quadrature.
inline double radial_integral_3d(const std::function<double(double)>& F,
                                 double R, double tol = 1e-12) {
    return 4.0 * M_PI *
           integrate([&](double r) { return r * r * F(r); }, 0.0, R, tol);
}

// (|.|^-2 * rho)(r) for radial rho in d = 3:
//   (2 pi / r) int_0^R s rho(s) ln((r+s)/|r-s|) ds,
// with the integrable log endpoint handled by splitting at s = r.
inline double riesz_radial_3d(const std::function<double(double)>& rho,
                              double r, double R, double tol = 1e-10) {
    auto f = [&](double s) {
        double num = r + s, den = std::abs(r - s);
        if (den == 0.0) return 0.0;
        return s * rho(s) * std::log(num / den);
    };
    double v = integrate(f, 0.0, std::min(r * (1.0 - 1e-7), R), tol);
    if (r < R) v += integrate(f, r * (1.0 + 1e-7), R, tol);
    return 2.0 * M_PI / r * v;
}

// D(u) = int int u^2(x) u^2(y) / |x-y|^2 for radial u in d = 3 via the nested
// radial kernel formula.
inline double hartree_double_integral_3d(
    const std::function<double(double)>& u, double R, double tol = 1e-8) {
    auto rho = [&](double s) { return u(s) * u(s); };
    auto outer = [&](double r) {
        return r * r * rho(r) * riesz_radial_3d(rho, r, R, tol * 1e-2);
    };
    return 4.0 * M_PI * integrate(outer, 1e-6, R, tol);
}

}  // namespace oracles
