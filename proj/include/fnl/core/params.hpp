#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <mutex>

#include "fnl/common/error.hpp"
#include "fnl/core/quadrature.hpp"

namespace fnl {

// Model parameters. The operators of order s = 1 + sigma share the kernel
// exponent N + 2*sigma and the constant c = c(N, sigma).
struct Params {
    int dim = 1;        // N, spatial dimension
    double sigma = 0.5; // fractional order in (0,1)
    double s = 1.5;     // derived, s = 1 + sigma
    double c = 0.0;     // normalization constant, inverse of the defining integral
};

struct NormalizationReport {
    double integral = std::numeric_limits<double>::quiet_NaN();
    double integral_inverse = std::numeric_limits<double>::quiet_NaN();
    double gamma_printed = std::numeric_limits<double>::quiet_NaN();
    double ratio = std::numeric_limits<double>::quiet_NaN();
    bool integral_divergent = false;
    double quadrature_error = 0.0;
};

namespace detail {

// Angular factor of the defining integral after reduction to radius:
//   I = int_0^inf r^(-1-2a) * phi_N(r) dr,   phi_N(r) = int_{S^{N-1}} (1 - cos(r w_1)) dw.
inline double sphere_area(int N) {
    switch (N) {
        case 1: return 2.0;
        case 2: return 2.0 * M_PI;
        case 3: return 4.0 * M_PI;
    }
    throw invalid_argument("dimension must be 1, 2 or 3");
}

inline double angular_cos_avg(int N, double r) {
    // int_{S^{N-1}} cos(r w_1) dw / |S^{N-1}|
    switch (N) {
        case 1: return std::cos(r);
        case 2: return std::cyl_bessel_j(0.0, r);
        case 3: return r == 0.0 ? 1.0 : std::sin(r) / r;
    }
    throw invalid_argument("dimension must be 1, 2 or 3");
}

// (1 - angular_cos_avg(N, r)) / r^2, evaluated cancellation-free near r = 0.
inline double cos_avg_deficit_over_r2(int N, double r) {
    switch (N) {
        case 1: {
            if (r == 0.0) return 0.5;
            const double s = std::sin(0.5 * r) / r;
            return 2.0 * s * s;
        }
        case 2: {
            if (r < 0.5) {
                const double r2 = r * r;
                return 1.0 / 4.0 - r2 / 64.0 + r2 * r2 / 2304.0 - r2 * r2 * r2 / 147456.0 +
                       r2 * r2 * r2 * r2 / 14745600.0;
            }
            return (1.0 - std::cyl_bessel_j(0.0, r)) / (r * r);
        }
        case 3: {
            if (r < 0.5) {
                const double r2 = r * r;
                return 1.0 / 6.0 - r2 / 120.0 + r2 * r2 / 5040.0 - r2 * r2 * r2 / 362880.0 +
                       r2 * r2 * r2 * r2 / 39916800.0;
            }
            return (1.0 - std::sin(r) / r) / (r * r);
        }
    }
    throw invalid_argument("dimension must be 1, 2 or 3");
}

}  // namespace detail

// Defining integral I(N, order) = int_{R^N} (1 - cos xi_1) / |xi|^(N+2*order) dxi,
// split as a graded head, the exact power tail of the constant part, and an
// Euler-accelerated oscillatory tail. Integrable at the origin only for
// order < 1; for order in (1,2) the report flags divergence and carries only
// the closed-form expression.
inline NormalizationReport normalization_constant(int N, double order,
                                                  int refinement_levels = 3) {
    require(N >= 1 && N <= 3, "normalization_constant: N must be 1, 2 or 3");
    require((order > 0.0 && order < 1.0) || (order > 1.0 && order < 2.0),
            "normalization_constant: order must lie in (0,1) or (1,2)");

    NormalizationReport rep;
    // Expression as printed: 2^(2s-1) pi^(-N/2) Gamma((N+2s)/2) / |Gamma(-s)|.
    rep.gamma_printed = std::pow(2.0, 2.0 * order - 1.0) * std::pow(M_PI, -0.5 * N) *
                        std::tgamma(0.5 * (N + 2.0 * order)) /
                        std::abs(std::tgamma(-order));

    if (order >= 1.0) {
        rep.integral_divergent = true;
        return rep;
    }

    const double area = detail::sphere_area(N);
    const double a = order;

    // Head integrand r^(1-2a) * G(r) with G smooth; the substitution
    // r = t^(1/(2-2a)) removes the endpoint singularity entirely.
    const double beta = 1.0 / (2.0 - 2.0 * a);
    auto head_integrand = [&](double t) {
        const double r = std::pow(t, beta);
        return beta * area * detail::cos_avg_deficit_over_r2(N, r);
    };

    const double A = 8.0;
    double head = 0.0, head_err = 0.0;
    {
        double tol = 1e-12;
        bool ok = false;
        for (int lvl = 0; lvl < refinement_levels && !ok; ++lvl) {
            auto res = quad::adaptive_integrate(head_integrand, 0.0,
                                                std::pow(A, 2.0 - 2.0 * a), tol, 1e-12,
                                                2000 << lvl);
            head = res.value;
            head_err = res.error;
            ok = res.converged;
            if (!ok && lvl + 1 == refinement_levels)
                throw error("normalization_constant: head quadrature did not converge",
                            {res.value, res.error});
        }
    }

    // Tail beyond A: area * A^(-2a) / (2a) minus the oscillatory remainder.
    const double const_tail = area * std::pow(A, -2.0 * a) / (2.0 * a);
    auto osc_block = [&](int k) {
        const double lo = A + k * M_PI, hi = lo + M_PI;
        auto f = [&](double r) {
            return std::pow(r, -1.0 - 2.0 * a) * area * detail::angular_cos_avg(N, r);
        };
        auto r1 = quad::detail::gk15(f, lo, 0.5 * (lo + hi));
        auto r2 = quad::detail::gk15(f, 0.5 * (lo + hi), hi);
        return r1.kronrod + r2.kronrod;
    };
    const double osc_tail = quad::alternating_series(osc_block, 28);

    rep.integral = head + const_tail - osc_tail;
    rep.integral_inverse = 1.0 / rep.integral;
    rep.ratio = rep.integral_inverse / rep.gamma_printed;
    rep.quadrature_error = head_err;
    return rep;
}

// Params with the constant c evaluated once per (N, sigma) and cached.
inline Params make_params(int N, double sigma) {
    require(N == 1 || N == 2 || N == 3, "make_params: N must be 1, 2 or 3");
    require(sigma > 0.0 && sigma < 1.0, "make_params: sigma must lie in (0,1)");

    static std::mutex mu;
    static std::map<std::pair<int, long long>, double> cache;
    const auto key = std::make_pair(N, static_cast<long long>(std::llround(sigma * 1e12)));
    double c;
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(key);
        if (it != cache.end()) {
            c = it->second;
        } else {
            c = normalization_constant(N, sigma).integral_inverse;
            cache.emplace(key, c);
        }
    }
    Params p;
    p.dim = N;
    p.sigma = sigma;
    p.s = 1.0 + sigma;
    p.c = c;
    return p;
}

}  // namespace fnl
