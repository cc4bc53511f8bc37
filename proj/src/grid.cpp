#include "hartree/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <algorithm>
#include <array>
#include <complex>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace hartree {

namespace {

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.resize(n);
    w.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (z * p0 - p1) / (z * z - 1.0);
            double dz = p0 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
}

// Tensor-product GL integral of |x|^-2 over an axis-aligned box.
double box_inv_square(const std::vector<std::pair<double, double>>& box,
                      const std::vector<double>& gx,
                      const std::vector<double>& gw) {
    const int d = static_cast<int>(box.size());
    const int q = static_cast<int>(gx.size());
    std::vector<int> idx(d, 0);
    double total = 0.0;
    while (true) {
        double r2 = 0.0, wt = 1.0;
        for (int a = 0; a < d; ++a) {
            const auto& [lo, hi] = box[a];
            double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
            double xa = mid + half * gx[idx[a]];
            r2 += xa * xa;
            wt *= half * gw[idx[a]];
        }
        total += wt / r2;
        int a = d - 1;
        while (a >= 0 && ++idx[a] == q) idx[a--] = 0;
        if (a < 0) break;
    }
    return total;
}

struct SpectralWorkspace {
    GridSpec grid;
    std::size_t nreal;
    std::size_t ncplx;
    double* real_buf = nullptr;
    fftw_complex* cplx_buf = nullptr;
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
    std::vector<double> kernel_hat;  // real spectrum of the even kernel
    std::vector<double> k2;          // |kappa|^2 per spectral bin
    std::vector<double> parseval_w;  // 1 or 2 per spectral bin (r2c halving)

    explicit SpectralWorkspace(const GridSpec& g) : grid(g) {
        const int d = g.d, n = g.n;
        nreal = g.size();
        ncplx = nreal / n * (n / 2 + 1);
        real_buf = fftw_alloc_real(nreal);
        cplx_buf = fftw_alloc_complex(ncplx);
        std::vector<int> dims(d, n);
        {
            // FFTW's planner is not thread-safe; FFTW_ESTIMATE keeps the
            // algorithm choice deterministic run to run.
            std::lock_guard<std::mutex> lock(planner_mutex());
            fwd = fftw_plan_dft_r2c(d, dims.data(), real_buf, cplx_buf,
                                    FFTW_ESTIMATE);
            bwd = fftw_plan_dft_c2r(d, dims.data(), cplx_buf, real_buf,
                                    FFTW_ESTIMATE);
        }
        build_wavenumbers();
    }

    SpectralWorkspace(const SpectralWorkspace&) = delete;

    ~SpectralWorkspace() {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(bwd);
        fftw_free(real_buf);
        fftw_free(cplx_buf);
    }

    void build_wavenumbers() {
        const int d = grid.d, n = grid.n, nh = n / 2 + 1;
        k2.assign(ncplx, 0.0);
        parseval_w.assign(ncplx, 2.0);
        const double base = M_PI / grid.L;
        std::vector<int> idx(d, 0);
        for (std::size_t flat = 0; flat < ncplx; ++flat) {
            double s = 0.0;
            for (int a = 0; a < d; ++a) {
                int f = idx[a] <= n / 2 ? idx[a] : idx[a] - n;
                s += static_cast<double>(f) * f;
            }
            k2[flat] = base * base * s;
            int klast = idx[d - 1];
            if (klast == 0 || klast == n / 2) parseval_w[flat] = 1.0;
            int a = d - 1;
            while (a >= 0) {
                int lim = (a == d - 1) ? nh : n;
                if (++idx[a] < lim) break;
                idx[a--] = 0;
            }
        }
    }

    void forward(const double* src) {
        std::memcpy(real_buf, src, nreal * sizeof(double));
        fftw_execute(fwd);
    }

    void backward(double* dst) {
        fftw_execute(bwd);
        std::memcpy(dst, real_buf, nreal * sizeof(double));
    }

    const std::vector<double>& riesz_kernel_hat() {
        if (kernel_hat.empty()) {
            Field k = riesz_kernel_table(grid);
            forward(k.values.data());
            kernel_hat.resize(ncplx);
            // The kernel is even, so its transform is real up to roundoff.
            for (std::size_t i = 0; i < ncplx; ++i)
                kernel_hat[i] = cplx_buf[i][0];
        }
        return kernel_hat;
    }
};

SpectralWorkspace& workspace_for(const GridSpec& g) {
    thread_local std::map<std::tuple<int, int, double>,
                          std::unique_ptr<SpectralWorkspace>>
        cache;
    auto key = std::make_tuple(g.d, g.n, g.L);
    auto it = cache.find(key);
    if (it == cache.end())
        it = cache.emplace(key, std::make_unique<SpectralWorkspace>(g)).first;
    return *it->second;
}

}  // namespace

std::size_t GridSpec::size() const {
    std::size_t s = 1;
    for (int a = 0; a < d; ++a) s *= static_cast<std::size_t>(n);
    return s;
}

double GridSpec::cell_volume() const {
    return std::pow(h(), d);
}

double GridSpec::box_volume() const {
    return std::pow(2.0 * L, d);
}

GridSpec make_grid(int d, double L, int n) {
    if (d < 3) throw std::invalid_argument("make_grid: d >= 3 required");
    if (d > 5) throw std::invalid_argument("make_grid: unsupported d > 5");
    if (n < 8 || n % 2 != 0)
        throw std::invalid_argument("make_grid: n must be even and >= 8");
    if (!(L > 0.0)) throw std::invalid_argument("make_grid: L must be positive");
    GridSpec g;
    g.d = d;
    g.L = L;
    g.n = n;
    return g;
}

Field sample_field(const GridSpec& g,
                   const std::function<double(const std::vector<double>&)>& f) {
    Field u(g);
    std::vector<double> x(g.d);
    std::vector<int> idx(g.d, 0);
    for (std::size_t flat = 0; flat < u.size(); ++flat) {
        for (int a = 0; a < g.d; ++a) x[a] = g.coord(idx[a]);
        u[flat] = f(x);
        int a = g.d - 1;
        while (a >= 0 && ++idx[a] == g.n) idx[a--] = 0;
    }
    return u;
}

void check_field(const Field& u) {
    if (u.values.size() != u.grid.size())
        throw std::invalid_argument("Field: size does not match grid");
    for (double v : u.values)
        if (!std::isfinite(v))
            throw std::invalid_argument("Field: non-finite value");
}

double inner(const Field& a, const Field& b) {
    if (a.grid != b.grid) throw std::invalid_argument("inner: grid mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s * a.grid.cell_volume();
}

double mass(const Field& u) { return inner(u, u); }

double max_abs(const Field& u) {
    double m = 0.0;
    for (double v : u.values) m = std::max(m, std::abs(v));
    return m;
}

std::size_t argmax_abs(const Field& u) {
    std::size_t best = 0;
    double m = -1.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        double v = std::abs(u[i]);
        if (v > m) {
            m = v;
            best = i;
        }
    }
    return best;
}

std::vector<double> index_coords(const GridSpec& g, std::size_t flat) {
    std::vector<double> x(g.d);
    for (int a = g.d - 1; a >= 0; --a) {
        x[a] = g.coord(static_cast<int>(flat % g.n));
        flat /= g.n;
    }
    return x;
}

double mass_fraction_in_ball(const Field& u, double radius,
                             const std::vector<double>& center) {
    const GridSpec& g = u.grid;
    std::vector<double> c = center.empty() ? std::vector<double>(g.d, 0.0)
                                           : center;
    double inside = 0.0, total = 0.0;
    std::vector<int> idx(g.d, 0);
    const double r2 = radius * radius;
    for (std::size_t flat = 0; flat < u.size(); ++flat) {
        double s = 0.0;
        for (int a = 0; a < g.d; ++a) {
            double dx = g.coord(idx[a]) - c[a];
            // minimum image on the periodic box
            if (dx > g.L) dx -= 2.0 * g.L;
            if (dx < -g.L) dx += 2.0 * g.L;
            s += dx * dx;
        }
        double m = u[flat] * u[flat];
        total += m;
        if (s <= r2) inside += m;
        int a = g.d - 1;
        while (a >= 0 && ++idx[a] == g.n) idx[a--] = 0;
    }
    return total > 0.0 ? inside / total : 0.0;
}

double unit_cube_inv_square_integral(int d) {
    static std::mutex m;
    static std::map<int, double> cache;
    std::lock_guard<std::mutex> lock(m);
    auto it = cache.find(d);
    if (it != cache.end()) return it->second;
    if (d < 3) throw std::invalid_argument("integral diverges for d < 3");
    const int q = d == 3 ? 32 : (d == 4 ? 20 : 12);
    std::vector<double> gx, gw;
    gauss_legendre(q, gx, gw);
    // Shell = cube(1/2) minus cube(1/4) split into 2d boxes; self-similarity
    // gives C = J / (1 - 2^{2-d}).
    double J = 0.0;
    for (int a = 0; a < d; ++a) {
        for (int sgn = -1; sgn <= 1; sgn += 2) {
            std::vector<std::pair<double, double>> box(d);
            for (int b = 0; b < d; ++b) {
                if (b == a)
                    box[b] = sgn > 0 ? std::make_pair(0.25, 0.5)
                                     : std::make_pair(-0.5, -0.25);
                else if (b < a)
                    box[b] = {-0.25, 0.25};
                else
                    box[b] = {-0.5, 0.5};
            }
            J += box_inv_square(box, gx, gw);
        }
    }
    double C = J / (1.0 - std::pow(2.0, 2 - d));
    cache[d] = C;
    return C;
}

namespace {

// Sine integral Si(x), ~1e-8 accuracy: Taylor series for x <= 24, then the
// standard asymptotic expansion.
double sine_integral(double x) {
    if (x < 0.0) return -sine_integral(-x);
    if (x <= 24.0) {
        // Si(x) = sum (-1)^n x^{2n+1} / ((2n+1)(2n+1)!)
        double t = x;  // x^{2n+1}/(2n+1)! with sign
        double sum = x;
        for (int n = 1; n < 120; ++n) {
            t *= -x * x / (2.0 * n * (2.0 * n + 1.0));
            double add = t / (2.0 * n + 1.0);
            sum += add;
            if (std::abs(add) < 1e-18 * std::abs(sum)) break;
        }
        return sum;
    }
    // f(x) and g(x) auxiliary series
    double f = 0.0, g = 0.0, t = 1.0;
    const double x2 = x * x;
    for (int n = 0; n < 12; ++n) {
        double fterm = t;  // (2n)!/x^{2n}
        f += (n % 2 == 0 ? fterm : -fterm);
        double gterm = t * (2.0 * n + 1.0);
        g += (n % 2 == 0 ? gterm : -gterm);
        t *= (2.0 * n + 1.0) * (2.0 * n + 2.0) / x2;
    }
    f /= x;
    g /= x2;
    return M_PI / 2.0 - f * std::cos(x) - g * std::sin(x);
}

// Fourier transform of the radially truncated kernel 1_{|x|<=T} / |x|^2.
double truncated_riesz_symbol(int d, double k, double T) {
    if (k <= 0.0) {
        if (d == 3) return 4.0 * M_PI * T;
        if (d == 4) return M_PI * M_PI * T * T;
        return 8.0 * M_PI * M_PI * T * T * T / 9.0;
    }
    const double kT = k * T;
    if (d == 3) return 4.0 * M_PI * sine_integral(kT) / k;
    if (d == 4) {
        double j0 = std::cyl_bessel_j(0.0, kT);
        return 4.0 * M_PI * M_PI * (1.0 - j0) / (k * k);
    }
    return 8.0 * M_PI * M_PI * (sine_integral(kT) - std::sin(kT)) /
           (k * k * k);
}

void apply_near_field_correction(Field& ktab);

// Solves a small dense linear system in place by Gaussian elimination.
void solve_dense(std::vector<std::vector<double>>& A, std::vector<double>& b) {
    const int n = static_cast<int>(b.size());
    for (int c = 0; c < n; ++c) {
        int piv = c;
        for (int r = c + 1; r < n; ++r)
            if (std::abs(A[r][c]) > std::abs(A[piv][c])) piv = r;
        std::swap(A[c], A[piv]);
        std::swap(b[c], b[piv]);
        for (int r = c + 1; r < n; ++r) {
            double f = A[r][c] / A[c][c];
            for (int cc = c; cc < n; ++cc) A[r][cc] -= f * A[c][cc];
            b[r] -= f * b[c];
        }
    }
    for (int c = n - 1; c >= 0; --c) {
        for (int cc = c + 1; cc < n; ++cc) b[c] -= A[c][cc] * b[cc];
        b[c] /= A[c][c];
    }
}

}  // namespace

Field riesz_kernel_table(const GridSpec& g) {
    Field k(g);
    const double h = g.h();
    const double origin = unit_cube_inv_square_integral(g.d) / (h * h);
    std::vector<int> idx(g.d, 0);
    for (std::size_t flat = 0; flat < k.size(); ++flat) {
        double r2 = 0.0;
        for (int a = 0; a < g.d; ++a) {
            int f = idx[a] <= g.n / 2 ? idx[a] : idx[a] - g.n;
            double x = f * h;
            r2 += x * x;
        }
        k[flat] = r2 > 0.0 ? 1.0 / r2 : origin;
        int a = g.d - 1;
        while (a >= 0 && ++idx[a] == g.n) idx[a--] = 0;
    }
    apply_near_field_correction(k);
    return k;
}

namespace {

// Adjusts kernel cells with |x| < 4h so that the table's DFT matches the
// Fourier transform of the radially truncated kernel 1_{|x|<=L}/|x|^2 on
// resolved wavenumbers.  Point samples of 1/|x|^2 alone are only first-order
// accurate for the Hartree quadrature; this near-field fit restores spectral
// accuracy for smooth fields while leaving every cell at |x| >= 4h at its
// exact 1/|x|^2 value, so the real-space kernel shape stays directly
// checkable and brute_force_riesz keeps sharing the identical table.
void apply_near_field_correction(Field& ktab) {
    const GridSpec& g = ktab.grid;
    const int d = g.d, n = g.n, nh = n / 2 + 1;
    const double h = g.h();

    // Core cells |v| < 4 (grid units) grouped by symmetry class.
    std::map<std::vector<int>, std::vector<std::pair<std::size_t, std::vector<int>>>>
        classes;
    {
        std::vector<int> idx(d, 0);
        for (std::size_t flat = 0; flat < ktab.size(); ++flat) {
            int r2 = 0;
            std::vector<int> v(d);
            for (int a = 0; a < d; ++a) {
                v[a] = idx[a] <= n / 2 ? idx[a] : idx[a] - n;
                r2 += v[a] * v[a];
            }
            if (r2 < 16) {
                std::vector<int> key(d);
                for (int a = 0; a < d; ++a) key[a] = std::abs(v[a]);
                std::sort(key.begin(), key.end());
                classes[key].emplace_back(flat, v);
            }
            int a = d - 1;
            while (a >= 0 && ++idx[a] == n) idx[a--] = 0;
        }
    }
    const int S = static_cast<int>(classes.size());
    std::vector<const std::vector<std::pair<std::size_t, std::vector<int>>>*>
        cls;
    for (auto& [key, cells] : classes) cls.push_back(&cells);

    // Flat per-cell list with class ids.
    struct Cell {
        std::vector<int> v;
        int cid;
    };
    std::vector<Cell> cells;
    for (int a = 0; a < S; ++a)
        for (auto& [flat, v] : *cls[a]) cells.push_back({v, a});

    // DFT of the uncorrected table.
    auto& ws = workspace_for(g);
    ws.forward(ktab.values.data());

    // Per-axis phase tables e^{-2 pi i m j / n} for m in [-3, 3].
    std::vector<std::array<double, 7>> ct(n), st(n);
    for (int j = 0; j < n; ++j)
        for (int m = -3; m <= 3; ++m) {
            double ang = -2.0 * M_PI * m * j / n;
            ct[j][m + 3] = std::cos(ang);
            st[j][m + 3] = std::sin(ang);
        }

    const double kbase = M_PI / g.L;
    const double kaxis = kbase * (n / 2);
    const double hd = g.cell_volume();
    std::vector<std::vector<double>> M(S, std::vector<double>(S, 0.0));
    std::vector<double> rhs(S, 0.0);
    std::vector<double> basis(S);

    std::vector<int> idx(d, 0);
    for (std::size_t bin = 0; bin < ws.ncplx; ++bin) {
        double k2 = 0.0;
        for (int a = 0; a < d; ++a) {
            int f = idx[a] <= n / 2 ? idx[a] : idx[a] - n;
            k2 += static_cast<double>(f) * f;
        }
        const double kk = kbase * std::sqrt(k2);
        const double mult = (idx[d - 1] == 0 || idx[d - 1] == n / 2) ? 1.0 : 2.0;
        // Fit band: resolved wavenumbers.  Regularization band near the
        // spectrum corner pins the correction to zero there, which keeps the
        // corrected symbol (and hence the Hartree quadratic form) positive.
        double wfit = std::exp(-std::pow(kk / (0.55 * kaxis), 8.0));
        double tt = std::clamp((kk / kaxis - 0.8) / 0.2, 0.0, 1.0);
        double wreg = 0.1 * tt * tt * (3.0 - 2.0 * tt);
        double wtot = (wfit + wreg) * mult;
        if (wtot > 1e-14) {
            std::fill(basis.begin(), basis.end(), 0.0);
            for (const Cell& c : cells) {
                double re = 1.0, im = 0.0;
                for (int a = 0; a < d; ++a) {
                    double cr = ct[idx[a]][c.v[a] + 3];
                    double ci = st[idx[a]][c.v[a] + 3];
                    double nre = re * cr - im * ci;
                    im = re * ci + im * cr;
                    re = nre;
                }
                basis[c.cid] += re;
            }
            double target =
                truncated_riesz_symbol(d, kk, g.L) / hd - ws.cplx_buf[bin][0];
            for (int a = 0; a < S; ++a) {
                rhs[a] += wfit * mult * basis[a] * target;
                for (int b = a; b < S; ++b) M[a][b] += wtot * basis[a] * basis[b];
            }
        }
        int a = d - 1;
        while (a >= 0) {
            int lim = (a == d - 1) ? nh : n;
            if (++idx[a] < lim) break;
            idx[a--] = 0;
        }
    }
    for (int a = 0; a < S; ++a)
        for (int b = 0; b < a; ++b) M[a][b] = M[b][a];

    solve_dense(M, rhs);
    for (const Cell& c : cells) {
        // recover flat index from v
        std::size_t flat = 0;
        for (int a = 0; a < d; ++a) {
            int j = c.v[a] >= 0 ? c.v[a] : c.v[a] + n;
            flat = flat * n + j;
        }
        ktab[flat] += rhs[c.cid];
    }
}

}  // namespace

double kinetic_energy(const Field& u) {
    check_field(u);
    auto& ws = workspace_for(u.grid);
    ws.forward(u.values.data());
    double s = 0.0;
    for (std::size_t i = 0; i < ws.ncplx; ++i) {
        double re = ws.cplx_buf[i][0], im = ws.cplx_buf[i][1];
        s += ws.parseval_w[i] * ws.k2[i] * (re * re + im * im);
    }
    const double npts = static_cast<double>(u.grid.size());
    return s * u.grid.cell_volume() / npts;
}

Field riesz_convolve(const Field& rho) {
    check_field(rho);
    auto& ws = workspace_for(rho.grid);
    const auto& khat = ws.riesz_kernel_hat();
    ws.forward(rho.values.data());
    const double scale =
        rho.grid.cell_volume() / static_cast<double>(rho.grid.size());
    for (std::size_t i = 0; i < ws.ncplx; ++i) {
        ws.cplx_buf[i][0] *= khat[i] * scale;
        ws.cplx_buf[i][1] *= khat[i] * scale;
    }
    Field out(rho.grid);
    ws.backward(out.values.data());
    return out;
}

Field brute_force_riesz(const Field& rho) {
    check_field(rho);
    const GridSpec& g = rho.grid;
    if (g.n > 16)
        throw std::invalid_argument("brute_force_riesz: n > 16 rejected");
    Field k = riesz_kernel_table(g);
    Field out(g);
    const double hv = g.cell_volume();
    const std::size_t npts = g.size();
    std::vector<int> xi(g.d), yi(g.d), di(g.d);
    for (std::size_t x = 0; x < npts; ++x) {
        std::size_t t = x;
        for (int a = g.d - 1; a >= 0; --a) {
            xi[a] = static_cast<int>(t % g.n);
            t /= g.n;
        }
        double acc = 0.0;
        for (std::size_t y = 0; y < npts; ++y) {
            if (rho[y] == 0.0) continue;
            t = y;
            for (int a = g.d - 1; a >= 0; --a) {
                yi[a] = static_cast<int>(t % g.n);
                t /= g.n;
            }
            std::size_t flat = 0;
            for (int a = 0; a < g.d; ++a) {
                int dd = xi[a] - yi[a];
                if (dd < 0) dd += g.n;
                flat = flat * g.n + dd;
            }
            acc += rho[y] * k[flat];
        }
        out[x] = acc * hv;
    }
    return out;
}

double hartree_term(const Field& u) {
    Field rho(u.grid);
    for (std::size_t i = 0; i < u.size(); ++i) rho[i] = u[i] * u[i];
    Field conv = riesz_convolve(rho);
    return inner(rho, conv);
}

double hardy_integral(const Field& u) {
    const GridSpec& g = u.grid;
    const double h = g.h();
    const double origin = unit_cube_inv_square_integral(g.d) / (h * h);
    double s = 0.0;
    std::vector<int> idx(g.d, 0);
    for (std::size_t flat = 0; flat < u.size(); ++flat) {
        double r2 = 0.0;
        for (int a = 0; a < g.d; ++a) {
            double x = g.coord(idx[a]);
            r2 += x * x;
        }
        double w = r2 > 0.0 ? 1.0 / r2 : origin;
        s += u[flat] * u[flat] * w;
        int a = g.d - 1;
        while (a >= 0 && ++idx[a] == g.n) idx[a--] = 0;
    }
    return s * g.cell_volume();
}

Field apply_minus_laplacian(const Field& u) {
    auto& ws = workspace_for(u.grid);
    ws.forward(u.values.data());
    const double inv_n = 1.0 / static_cast<double>(u.grid.size());
    for (std::size_t i = 0; i < ws.ncplx; ++i) {
        ws.cplx_buf[i][0] *= ws.k2[i] * inv_n;
        ws.cplx_buf[i][1] *= ws.k2[i] * inv_n;
    }
    Field out(u.grid);
    ws.backward(out.values.data());
    return out;
}

void solve_helmholtz_inplace(Field& rhs, double tau) {
    auto& ws = workspace_for(rhs.grid);
    ws.forward(rhs.values.data());
    const double inv_n = 1.0 / static_cast<double>(rhs.grid.size());
    for (std::size_t i = 0; i < ws.ncplx; ++i) {
        double f = inv_n / (1.0 + tau * ws.k2[i]);
        ws.cplx_buf[i][0] *= f;
        ws.cplx_buf[i][1] *= f;
    }
    ws.backward(rhs.values.data());
}

}  // namespace hartree
