#include "hartree/radial.hpp"

#include <fftw3.h>

#include <cmath>
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

std::size_t next_pow2(std::size_t v) {
    std::size_t p = 1;
    while (p < v) p <<= 1;
    return p;
}

// Exact cell average of ln|t| over [(k-1/2)dx, (k+1/2)dx] in units where the
// grid log is ln(k): A_k = (k+1/2)ln(k+1/2) - (k-1/2)ln(k-1/2) - 1.
double log_cell_average(int k) {
    double a = k - 0.5, b = k + 0.5;
    double lo = a > 0.0 ? a * std::log(a) : 0.0;
    return b * std::log(b) - lo - 1.0;
}

constexpr int kNearBand = 12;

// FFT workspace for the Toeplitz+Hankel log-kernel convolution at size m.
struct RadialConvWorkspace {
    int m;
    std::size_t P;
    double* rbuf = nullptr;
    fftw_complex* cbuf = nullptr;
    fftw_plan fwd = nullptr, bwd = nullptr;
    std::vector<std::complex<double>> toeplitz_hat;  // ln|i-j| kernel
    std::vector<std::complex<double>> hankel_hat;    // ln(i+j+1) kernel

    explicit RadialConvWorkspace(int m_) : m(m_) {
        P = next_pow2(4 * static_cast<std::size_t>(m));
        rbuf = fftw_alloc_real(P);
        cbuf = fftw_alloc_complex(P / 2 + 1);
        {
            std::lock_guard<std::mutex> lock(planner_mutex());
            fwd = fftw_plan_dft_r2c_1d(static_cast<int>(P), rbuf, cbuf,
                                       FFTW_ESTIMATE);
            bwd = fftw_plan_dft_c2r_1d(static_cast<int>(P), cbuf, rbuf,
                                       FFTW_ESTIMATE);
        }
        // Toeplitz sequence c_k = ln|k| (k != 0), c_0 = ln(1/2) - 1 (exact
        // diagonal-cell integral); even wrap.
        std::memset(rbuf, 0, P * sizeof(double));
        rbuf[0] = std::log(0.5) - 1.0;
        for (int k = 1; k < m; ++k) {
            double v = std::log(static_cast<double>(k));
            rbuf[k] = v;
            rbuf[P - k] = v;
        }
        fftw_execute(fwd);
        toeplitz_hat.assign(P / 2 + 1, {});
        for (std::size_t i = 0; i <= P / 2; ++i)
            toeplitz_hat[i] = {cbuf[i][0], cbuf[i][1]};
        // Hankel sequence s_q = ln q for q in [1, 2m-1].
        std::memset(rbuf, 0, P * sizeof(double));
        for (int q = 1; q <= 2 * m - 1; ++q)
            rbuf[q] = std::log(static_cast<double>(q));
        fftw_execute(fwd);
        hankel_hat.assign(P / 2 + 1, {});
        for (std::size_t i = 0; i <= P / 2; ++i)
            hankel_hat[i] = {cbuf[i][0], cbuf[i][1]};
    }

    RadialConvWorkspace(const RadialConvWorkspace&) = delete;

    ~RadialConvWorkspace() {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(bwd);
        fftw_free(rbuf);
        fftw_free(cbuf);
    }

    // circular convolution of padded input with a precomputed kernel hat
    void convolve(const std::vector<double>& in,
                  const std::vector<std::complex<double>>& khat,
                  std::vector<double>& out) {
        std::memset(rbuf, 0, P * sizeof(double));
        std::memcpy(rbuf, in.data(), in.size() * sizeof(double));
        fftw_execute(fwd);
        const double inv = 1.0 / static_cast<double>(P);
        for (std::size_t i = 0; i <= P / 2; ++i) {
            std::complex<double> v{cbuf[i][0], cbuf[i][1]};
            v *= khat[i] * inv;
            cbuf[i][0] = v.real();
            cbuf[i][1] = v.imag();
        }
        fftw_execute(bwd);
        out.assign(rbuf, rbuf + P);
    }
};

RadialConvWorkspace& radial_workspace(int m) {
    thread_local std::map<int, std::unique_ptr<RadialConvWorkspace>> cache;
    auto it = cache.find(m);
    if (it == cache.end())
        it = cache.emplace(m, std::make_unique<RadialConvWorkspace>(m)).first;
    return *it->second;
}

}  // namespace

RadialGrid make_radial_grid(int m, double R) {
    if (m < 256) throw std::invalid_argument("make_radial_grid: m >= 256");
    if (!(R > 0.0)) throw std::invalid_argument("make_radial_grid: R > 0");
    RadialGrid g;
    g.m = m;
    g.R = R;
    return g;
}

RadialField sample_radial(const RadialGrid& g,
                          const std::function<double(double)>& f) {
    RadialField u(g);
    for (int j = 0; j < g.m; ++j) u[j] = f(g.node(j));
    return u;
}

double inner_radial(const RadialField& a, const RadialField& b) {
    if (!(a.rgrid == b.rgrid))
        throw std::invalid_argument("inner_radial: grid mismatch");
    double s = 0.0;
    for (int j = 0; j < a.m(); ++j) s += a[j] * b[j] * a.rgrid.weight(j);
    return s;
}

double mass_radial(const RadialField& u) { return inner_radial(u, u); }

double kinetic_radial(const RadialField& u) {
    const int m = u.m();
    const double dr = u.rgrid.dr();
    double s = 0.0;
    for (int j = 0; j < m; ++j) {
        double up = (j + 1 < m) ? u[j + 1] : 0.0;
        double interface = (j + 1) * dr;
        double g = (up - u[j]) / dr;
        s += interface * interface * g * g;
    }
    return 4.0 * M_PI * s * dr;
}

RadialField minus_laplacian_radial(const RadialField& u) {
    const int m = u.m();
    const double dr = u.rgrid.dr();
    RadialField out(u.rgrid);
    for (int j = 0; j < m; ++j) {
        double r = u.rgrid.node(j);
        double Rlo = j * dr, Rhi = (j + 1) * dr;
        double lo = j > 0 ? u[j] - u[j - 1] : 0.0;
        double hi = u[j] - (j + 1 < m ? u[j + 1] : 0.0);
        out[j] = (Rlo * Rlo * lo + Rhi * Rhi * hi) / (r * r * dr * dr);
    }
    return out;
}

RadialField solve_radial_helmholtz(const RadialField& rhs, double tau,
                                   const std::vector<double>& V) {
    const int m = rhs.m();
    const double dr = rhs.rgrid.dr();
    std::vector<double> diag(m), upper(m), work(m);
    RadialField out(rhs.rgrid);
    for (int j = 0; j < m; ++j) {
        double r = rhs.rgrid.node(j);
        double Rlo = j * dr, Rhi = (j + 1) * dr;
        double scale = tau / (r * r * dr * dr);
        diag[j] = 1.0 + scale * (Rlo * Rlo + Rhi * Rhi) +
                  (V.empty() ? 0.0 : tau * V[j]);
        upper[j] = -scale * Rhi * Rhi;
    }
    // Thomas; lower_j = -tau R_j^2 / (r_j^2 dr^2)
    work[0] = upper[0] / diag[0];
    out[0] = rhs[0] / diag[0];
    for (int j = 1; j < m; ++j) {
        double r = rhs.rgrid.node(j);
        double lower = -tau * (j * dr) * (j * dr) / (r * r * dr * dr);
        double denom = diag[j] - lower * work[j - 1];
        work[j] = upper[j] / denom;
        out[j] = (rhs[j] - lower * out[j - 1]) / denom;
    }
    for (int j = m - 2; j >= 0; --j) out[j] -= work[j] * out[j + 1];
    return out;
}

RadialField riesz_convolve_radial(const RadialField& rho) {
    const int m = rho.m();
    const double dr = rho.rgrid.dr();
    auto& ws = radial_workspace(m);

    std::vector<double> a(m), arev(m);
    for (int j = 0; j < m; ++j) a[j] = rho.rgrid.node(j) * rho[j];
    for (int j = 0; j < m; ++j) arev[j] = a[m - 1 - j];

    std::vector<double> yt, yh;
    ws.convolve(a, ws.toeplitz_hat, yt);
    ws.convolve(arev, ws.hankel_hat, yh);

    RadialField out(rho.rgrid);
    for (int i = 0; i < m; ++i) {
        double hank = yh[i + m];
        double toep = yt[i];
        // near-band exact cell integrals (the ln-scale of the cell width
        // cancels between the two parts, so only integer-log terms remain)
        for (int k = 1; k <= kNearBand; ++k) {
            double corr = log_cell_average(k) - std::log(static_cast<double>(k));
            if (i - k >= 0) toep += a[i - k] * corr;
            if (i + k < m) toep += a[i + k] * corr;
            int q = k;  // hankel index q = i + j + 1
            int j = q - i - 1;
            if (j >= 0 && j < m) hank += a[j] * corr;
        }
        // hankel near-corner indices beyond kNearBand are smooth enough.
        double r = rho.rgrid.node(i);
        out[i] = 2.0 * M_PI / r * dr * (hank - toep);
    }
    return out;
}

RadialField riesz_convolve_radial_direct(const RadialField& rho) {
    const int m = rho.m();
    const double dr = rho.rgrid.dr();
    RadialField out(rho.rgrid);
    // closed-form antiderivatives: int s ln(r+s) ds and int s ln|r-s| ds
    auto int_plus = [](double r, double s0, double s1) {
        auto F = [&](double s) {
            double t = r + s;
            double lt = t > 0.0 ? std::log(t) : 0.0;
            return 0.5 * t * t * lt - 0.25 * t * t - r * (t * lt - t);
        };
        return F(s1) - F(s0);
    };
    auto int_minus = [](double r, double s0, double s1) {
        auto F = [&](double s) {
            double t = s - r;
            double at = std::abs(t);
            double lt = at > 0.0 ? std::log(at) : 0.0;
            double tl = at > 0.0 ? t * lt : 0.0;
            return 0.5 * t * t * lt - 0.25 * t * t + r * (tl - t);
        };
        return F(s1) - F(s0);
    };
    for (int i = 0; i < m; ++i) {
        double r = rho.rgrid.node(i);
        double acc = 0.0;
        for (int j = 0; j < m; ++j) {
            double s0 = j * dr, s1 = (j + 1) * dr;
            acc += rho[j] * (int_plus(r, s0, s1) - int_minus(r, s0, s1));
        }
        out[i] = 2.0 * M_PI / r * acc;
    }
    return out;
}

double hartree_radial(const RadialField& u) {
    RadialField rho(u.rgrid);
    for (int j = 0; j < u.m(); ++j) rho[j] = u[j] * u[j];
    RadialField conv = riesz_convolve_radial(rho);
    return inner_radial(rho, conv);
}

double interp_radial(const RadialField& u, double r) {
    const int m = u.m();
    const double dr = u.rgrid.dr();
    if (r < 0.0) r = -r;
    double x = r / dr - 0.5;
    int j1 = static_cast<int>(std::floor(x));
    double t = x - j1;
    auto val = [&](int j) -> double {
        if (j < 0) j = -j - 1;  // even extension through the origin
        if (j >= m) return 0.0;
        return u[j];
    };
    double p0 = val(j1 - 1), p1 = val(j1), p2 = val(j1 + 1), p3 = val(j1 + 2);
    return p1 + 0.5 * t *
                    (p2 - p0 +
                     t * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 +
                          t * (3.0 * (p1 - p2) + p3 - p0)));
}

RadialField dilate_radial(const RadialField& u, double b) {
    RadialField out(u.rgrid);
    for (int j = 0; j < u.m(); ++j)
        out[j] = interp_radial(u, b * u.rgrid.node(j));
    return out;
}

}  // namespace hartree
