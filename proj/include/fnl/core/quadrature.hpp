#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "fnl/common/error.hpp"

namespace fnl {

// Discretization parameters shared by all singular-kernel quadratures.
//   h                - mesh step for far-field composite rules
//   R                - truncation radius for integrals over R^N
//   pv_split_radius  - radius of the symmetric ball realizing the principal value
//   refinement_levels- how many times refined() is applied when reporting
//                      convergence (each refinement halves h)
struct QuadratureSpec {
    double h = 0.05;
    double R = 10.0;
    double pv_split_radius = 0.25;
    int refinement_levels = 3;

    int grade_levels = 30;      // dyadic levels toward a singular endpoint
    int angular_nodes = 48;     // polar rules in 2D
    double rel_step = 1.0 / 6;  // radial step as a fraction of the kernel distance

    QuadratureSpec refined() const {
        QuadratureSpec q = *this;
        q.h *= 0.5;
        q.rel_step *= 0.5;
        q.angular_nodes *= 2;
        q.grade_levels += 2;
        return q;
    }

    void validate() const {
        require(h > 0.0, "QuadratureSpec: h must be positive");
        require(R > 0.0, "QuadratureSpec: R must be positive");
        require(pv_split_radius > 0.0, "QuadratureSpec: pv_split_radius must be positive");
        require(refinement_levels >= 1, "QuadratureSpec: refinement_levels must be >= 1");
    }
};

namespace quad {

// ---------------------------------------------------------------------------
// Gauss-Kronrod 7-15 pair (QUADPACK constants), used by the adaptive driver.

namespace detail {
inline constexpr std::array<double, 8> kr15_x = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kr15_w = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> g7_w = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct PanelEstimate {
    double kronrod;
    double gauss;
};

template <typename F>
PanelEstimate gk15(const F& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double hw = 0.5 * (b - a);
    double k = 0.0, g = 0.0;
    for (int i = 0; i < 8; ++i) {
        const double dx = hw * kr15_x[i];
        const double fv = (i == 7) ? f(c) : f(c - dx) + f(c + dx);
        k += kr15_w[i] * fv;
        if (i % 2 == 1) g += g7_w[i / 2] * fv;
    }
    return {k * hw, g * hw};
}
}  // namespace detail

struct AdaptiveResult {
    double value = 0.0;
    double error = 0.0;
    bool converged = false;
    int panels = 0;
};

// Globally adaptive bisection on [a,b]: split the panel with the largest
// G7-K15 discrepancy until the total estimated error meets the tolerance.
template <typename F>
AdaptiveResult adaptive_integrate(const F& f, double a, double b, double abs_tol,
                                  double rel_tol = 1e-12, int max_panels = 4000) {
    struct Panel {
        double a, b, value, err;
    };
    std::vector<Panel> panels;
    auto make_panel = [&](double lo, double hi) {
        auto est = detail::gk15(f, lo, hi);
        return Panel{lo, hi, est.kronrod, std::abs(est.kronrod - est.gauss)};
    };
    panels.push_back(make_panel(a, b));
    AdaptiveResult out;
    while (true) {
        double total = 0.0, err = 0.0;
        std::size_t worst = 0;
        for (std::size_t i = 0; i < panels.size(); ++i) {
            total += panels[i].value;
            err += panels[i].err;
            if (panels[i].err > panels[worst].err) worst = i;
        }
        out.value = total;
        out.error = err;
        out.panels = static_cast<int>(panels.size());
        if (err <= abs_tol + rel_tol * std::abs(total)) {
            out.converged = true;
            return out;
        }
        if (static_cast<int>(panels.size()) >= max_panels) return out;
        Panel p = panels[worst];
        const double mid = 0.5 * (p.a + p.b);
        panels[worst] = make_panel(p.a, mid);
        panels.push_back(make_panel(mid, p.b));
    }
}

// ---------------------------------------------------------------------------
// Radial quadrature for kernel-weighted integrands f(t) that vary on the
// scale of t itself (|x-y|^(-N-2s) kernels). Composite midpoint with step
// min(h, t/6): uniform resolution h where the fields live, dyadic grading
// toward the kernel center.
template <typename F>
double march_radial(const F& f, double t0, double t1, double h, double rel = 1.0 / 6.0) {
    if (!(t1 > t0)) return 0.0;
    double s = 0.0, t = t0;
    while (t < t1) {
        const double step = std::min({h, std::max(rel * t, 1e-300), t1 - t});
        s += f(t + 0.5 * step) * step;
        t += step;
    }
    return s;
}

// Same, for an integrable power singularity at t = 0. Dyadic octaves are
// accumulated from the outside in; for integrable power behavior the octave
// sums decay geometrically toward zero, while below the roundoff floor of
// the integrand they grow again (cancellation noise amplified by the
// kernel), so descent stops at the first magnitude increase and the
// remaining mass is closed by geometric continuation of the last two good
// octaves (exact for f ~ t^-g, g < 1).
template <typename F>
double graded_radial0(const F& f, double t1, double h, int levels, double rel = 1.0 / 6.0) {
    if (!(t1 > 0.0)) return 0.0;
    double total = 0.0;
    double prev = 0.0, last = 0.0;
    int good = 0;
    for (int j = 0; j < levels; ++j) {
        const double hi = t1 * std::ldexp(1.0, -j);
        const double lo = 0.5 * hi;
        const double s = march_radial(f, lo, hi, h, rel);
        // Magnitude growth deep inside the power regime marks the roundoff
        // floor of the integrand; growth in the outer octaves is just the
        // integrand's own shape and must not stop the descent.
        if (hi < 1e-4 * t1 && std::abs(s) > std::abs(last)) break;
        total += s;
        prev = last;
        last = s;
        ++good;
    }
    if (good >= 2 && prev != 0.0 && last != 0.0 && std::signbit(prev) == std::signbit(last)) {
        const double rho = last / prev;  // per-octave decay toward zero
        if (rho > 0.0 && rho < 0.95) total += last * rho / (1.0 - rho);
    }
    return total;
}

// Graded composite midpoint on [t0, t1]; kept as the generic entry point.
template <typename F>
double integrate_radial(const F& f, double t0, double t1, double h, int grade_levels,
                        bool singular_at_t0, double rel = 1.0 / 6.0) {
    if (!(t1 > t0)) return 0.0;
    if (singular_at_t0 && t0 == 0.0) return graded_radial0(f, t1, h, grade_levels, rel);
    if (singular_at_t0) {
        auto shifted = [&](double u) { return f(t0 + u); };
        return graded_radial0(shifted, t1 - t0, h, grade_levels, rel);
    }
    return march_radial(f, t0, t1, h, rel);
}

// ---------------------------------------------------------------------------
// Tail of an eventually-alternating series of block integrals, accelerated by
// repeated averaging (Euler transform). block(k) must return the k-th block.
template <typename Block>
double alternating_series(const Block& block, int nblocks) {
    std::vector<double> s(nblocks);
    double run = 0.0;
    for (int k = 0; k < nblocks; ++k) {
        run += block(k);
        s[k] = run;
    }
    for (int level = 1; level < nblocks; ++level)
        for (int j = 0; j + 1 < nblocks - (level - 1); ++j) s[j] = 0.5 * (s[j] + s[j + 1]);
    return s[0];
}

inline std::vector<double> midpoints(double a, double b, int n) {
    std::vector<double> xs(n);
    const double step = (b - a) / n;
    for (int i = 0; i < n; ++i) xs[i] = a + (i + 0.5) * step;
    return xs;
}

}  // namespace quad
}  // namespace fnl
