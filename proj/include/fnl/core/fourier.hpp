#pragma once

#include <fftw3.h>

#include <complex>
#include <mutex>
#include <vector>

#include "fnl/core/field.hpp"

namespace fnl {

// Uniform periodic grid on [-L, L)^N. Frequencies are xi_k = (pi/L) k with
// signed integer k in [-n/2, n/2).
template <int N>
struct PeriodicGrid {
    double L = 10.0;
    int n = 256;

    double dx() const { return 2.0 * L / n; }
    int size() const { return N == 1 ? n : n * n; }

    Point<N> point(int flat) const {
        Point<N> x;
        if constexpr (N == 1) {
            x[0] = -L + flat * dx();
        } else {
            x[0] = -L + (flat / n) * dx();
            x[1] = -L + (flat % n) * dx();
        }
        return x;
    }

    // signed frequency index along dimension d for flat index
    double xi(int flat, int d) const {
        int k = (N == 1) ? flat : (d == 0 ? flat / n : flat % n);
        if (k >= n / 2) k -= n;
        return M_PI / L * k;
    }

    bool is_nyquist(int flat, int d) const {
        int k = (N == 1) ? flat : (d == 0 ? flat / n : flat % n);
        return k == n / 2;
    }

    int flat_of_nearest(const Point<N>& x) const {
        auto idx = [&](double c) {
            int i = static_cast<int>(std::lround((c + L) / dx()));
            return std::clamp(i, 0, n - 1);
        };
        if constexpr (N == 1) return idx(x[0]);
        return idx(x[0]) * n + idx(x[1]);
    }
};

template <int N>
struct GridField {
    PeriodicGrid<N> grid;
    std::vector<double> values;
    bool aliasing_warning = false;
    double aliasing_fraction = 0.0;

    double at(int flat) const { return values[flat]; }
    double at_nearest(const Point<N>& x) const { return values[grid.flat_of_nearest(x)]; }
};

namespace detail {

inline std::mutex& fftw_mutex() {
    static std::mutex m;
    return m;
}

template <int N>
std::vector<std::complex<double>> fft(const PeriodicGrid<N>& g,
                                      const std::vector<std::complex<double>>& in,
                                      int sign) {
    std::vector<std::complex<double>> out(in.size());
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(fftw_mutex());
        auto* pin = reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in.data()));
        auto* pout = reinterpret_cast<fftw_complex*>(out.data());
        plan = (N == 1) ? fftw_plan_dft_1d(g.n, pin, pout, sign, FFTW_ESTIMATE)
                        : fftw_plan_dft_2d(g.n, g.n, pin, pout, sign, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(fftw_mutex());
        fftw_destroy_plan(plan);
    }
    return out;
}

}  // namespace detail

template <int N>
GridField<N> sample_on_grid(const PeriodicGrid<N>& g, const Field<N>& u) {
    GridField<N> out;
    out.grid = g;
    out.values.resize(g.size());
    for (int i = 0; i < g.size(); ++i) out.values[i] = u.value(g.point(i));
    return out;
}

// One spectral pass: transform, multiply by the (complex) symbol, transform
// back, keep the real part. Odd symbols must zero the Nyquist line themselves.
template <int N, typename Symbol>
GridField<N> apply_symbol(const GridField<N>& u, Symbol&& symbol) {
    const auto& g = u.grid;
    std::vector<std::complex<double>> buf(g.size());
    for (int i = 0; i < g.size(); ++i) buf[i] = u.values[i];
    auto hat = detail::fft(g, buf, FFTW_FORWARD);
    for (int i = 0; i < g.size(); ++i) hat[i] *= symbol(i);
    auto back = detail::fft(g, hat, FFTW_BACKWARD);
    GridField<N> out;
    out.grid = g;
    out.values.resize(g.size());
    const double scale = 1.0 / g.size();
    for (int i = 0; i < g.size(); ++i) out.values[i] = back[i].real() * scale;
    return out;
}

namespace detail {
template <int N>
double xi_norm2(const PeriodicGrid<N>& g, int flat) {
    double s = 0.0;
    for (int d = 0; d < N; ++d) s += g.xi(flat, d) * g.xi(flat, d);
    return s;
}

// Fraction of spectral energy with max |k| in the top octave.
template <int N>
double top_octave_energy(const PeriodicGrid<N>& g,
                         const std::vector<std::complex<double>>& hat) {
    const double xi_max = M_PI / g.L * (g.n / 2);
    double top = 0.0, total = 0.0;
    for (int i = 0; i < static_cast<int>(hat.size()); ++i) {
        double xi_inf = 0.0;
        for (int d = 0; d < N; ++d) xi_inf = std::max(xi_inf, std::abs(g.xi(i, d)));
        const double e = std::norm(hat[i]);
        total += e;
        if (xi_inf >= 0.5 * xi_max) top += e;
    }
    return total == 0.0 ? 0.0 : top / total;
}
}  // namespace detail

// Spectral evaluation of (-Delta)^order on the grid. The result carries an
// aliasing warning when the top octave holds more than `alias_threshold` of
// the input's spectral energy.
template <int N>
GridField<N> fourier_power(const GridField<N>& u, double order,
                           double alias_threshold = 1e-8) {
    const auto& g = u.grid;
    std::vector<std::complex<double>> buf(g.size());
    for (int i = 0; i < g.size(); ++i) buf[i] = u.values[i];
    auto hat = detail::fft(g, buf, FFTW_FORWARD);
    const double alias = detail::top_octave_energy(g, hat);

    GridField<N> out = apply_symbol(u, [&](int i) {
        const double q = detail::xi_norm2(g, i);
        return q == 0.0 ? 0.0 : std::pow(q, order);
    });
    out.aliasing_fraction = alias;
    out.aliasing_warning = alias > alias_threshold;
    return out;
}

// The three factored routes to (-Delta)^(1+sigma), each stage a separate
// physical-space round trip.
template <int N>
GridField<N> route_outer_laplacian(const GridField<N>& u, double sigma) {
    auto mid = fourier_power(u, sigma);
    return apply_symbol(mid, [&](int i) { return detail::xi_norm2(u.grid, i); });
}

template <int N>
GridField<N> route_inner_laplacian(const GridField<N>& u, double sigma) {
    auto mid = apply_symbol(u, [&](int i) { return detail::xi_norm2(u.grid, i); });
    return fourier_power(mid, sigma);
}

template <int N>
GridField<N> route_div_grad(const GridField<N>& u, double sigma) {
    GridField<N> acc;
    acc.grid = u.grid;
    acc.values.assign(u.grid.size(), 0.0);
    for (int d = 0; d < N; ++d) {
        auto grad_d = apply_symbol(u, [&](int i) {
            if (u.grid.is_nyquist(i, d)) return std::complex<double>(0.0);
            return std::complex<double>(0.0, u.grid.xi(i, d));
        });
        auto frac = fourier_power(grad_d, sigma);
        auto div_d = apply_symbol(frac, [&](int i) {
            if (u.grid.is_nyquist(i, d)) return std::complex<double>(0.0);
            return std::complex<double>(0.0, u.grid.xi(i, d));
        });
        for (int i = 0; i < u.grid.size(); ++i) acc.values[i] -= div_d.values[i];
    }
    return acc;
}

}  // namespace fnl
