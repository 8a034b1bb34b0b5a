#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "fnl/core/geometry.hpp"

namespace fnl {

// Scalar function on R^N with analytic derivatives. Non-affine fields carry a
// finite support radius (value and derivatives vanish identically beyond it);
// only affine fields may declare infinite support.
template <int N>
struct Field {
    std::function<double(const Point<N>&)> value;
    std::function<Point<N>(const Point<N>&)> gradient;
    std::function<double(const Point<N>&)> laplacian;
    double support_radius = std::numeric_limits<double>::infinity();
    Point<N> support_center = Point<N>::Zero();
    bool affine = false;
    std::string name;

    bool vanishes_at(const Point<N>& x) const {
        return !affine && (x - support_center).norm() >= support_radius;
    }
    // smallest radius around `origin` covering the support
    double support_extent(const Point<N>& origin) const {
        return (support_center - origin).norm() + support_radius;
    }
};

namespace fields {

template <int N>
Field<N> affine(double c0, const Point<N>& slope) {
    Field<N> f;
    f.value = [=](const Point<N>& x) { return c0 + slope.dot(x); };
    f.gradient = [=](const Point<N>&) { return slope; };
    f.laplacian = [](const Point<N>&) { return 0.0; };
    f.affine = true;
    f.name = "affine";
    return f;
}

template <int N>
Field<N> constant(double c0) {
    return affine<N>(c0, Point<N>::Zero());
}

// coordinate function x_d
template <int N>
Field<N> coordinate(int d) {
    Point<N> e = Point<N>::Zero();
    e[d] = 1.0;
    return affine<N>(0.0, e);
}

// Gaussian truncated where its value and first two derivatives drop below
// 1e-17 of the amplitude scale; the cut introduces a jump far below double
// roundoff of order-one quantities.
template <int N>
Field<N> gaussian(const Point<N>& center, double width, double amplitude = 1.0) {
    require(width > 0.0, "gaussian: width must be positive");
    const double w2 = width * width;
    const double R0 = width * std::sqrt(2.0 * 42.0);  // exp(-42) ~ 5.7e-19
    Field<N> f;
    f.value = [=](const Point<N>& x) {
        const Point<N> d = x - center;
        const double q = d.squaredNorm() / (2.0 * w2);
        return q > 42.0 ? 0.0 : amplitude * std::exp(-q);
    };
    f.gradient = [=](const Point<N>& x) {
        const Point<N> d = x - center;
        const double q = d.squaredNorm() / (2.0 * w2);
        if (q > 42.0) return Point<N>(Point<N>::Zero());
        return Point<N>(-amplitude * std::exp(-q) / w2 * d);
    };
    f.laplacian = [=](const Point<N>& x) {
        const Point<N> d = x - center;
        const double q = d.squaredNorm() / (2.0 * w2);
        if (q > 42.0) return 0.0;
        return amplitude * std::exp(-q) * (d.squaredNorm() / (w2 * w2) - N / w2);
    };
    f.support_radius = R0;
    f.support_center = center;
    f.name = "gaussian";
    return f;
}

// C^(p-1) compactly supported bump  A (1 - |x-c|^2/R^2)^p_+ .
template <int N>
Field<N> poly_bump_pow(const Point<N>& center, double radius, int power,
                       double amplitude = 1.0) {
    require(radius > 0.0, "poly_bump: radius must be positive");
    require(power >= 2, "poly_bump: power must be at least 2");
    const double R2 = radius * radius;
    const double p = power;
    Field<N> f;
    f.value = [=](const Point<N>& x) {
        const double t = 1.0 - (x - center).squaredNorm() / R2;
        return t <= 0.0 ? 0.0 : amplitude * std::pow(t, p);
    };
    f.gradient = [=](const Point<N>& x) {
        const Point<N> d = x - center;
        const double t = 1.0 - d.squaredNorm() / R2;
        if (t <= 0.0) return Point<N>(Point<N>::Zero());
        return Point<N>(-2.0 * p * amplitude * std::pow(t, p - 1) / R2 * d);
    };
    f.laplacian = [=](const Point<N>& x) {
        const Point<N> d = x - center;
        const double r2 = d.squaredNorm();
        const double t = 1.0 - r2 / R2;
        if (t <= 0.0) return 0.0;
        return amplitude * (4.0 * p * (p - 1) * std::pow(t, p - 2) * r2 / (R2 * R2) -
                            2.0 * p * N * std::pow(t, p - 1) / R2);
    };
    f.support_radius = radius;
    f.support_center = center;
    f.name = "poly_bump";
    return f;
}

// C^3 bump, the default polynomial-cutoff profile.
template <int N>
Field<N> poly_bump(const Point<N>& center, double radius, double amplitude = 1.0) {
    return poly_bump_pow<N>(center, radius, 4, amplitude);
}

// Tent (1 - |x-c|/R)_+ ; continuous only, derivatives unavailable.
template <int N>
Field<N> tent(const Point<N>& center, double radius, double amplitude = 1.0) {
    require(radius > 0.0, "tent: radius must be positive");
    Field<N> f;
    f.value = [=](const Point<N>& x) {
        const double t = 1.0 - (x - center).norm() / radius;
        return t <= 0.0 ? 0.0 : amplitude * t;
    };
    f.gradient = [](const Point<N>&) -> Point<N> {
        throw error("tent field: gradient not available");
    };
    f.laplacian = [](const Point<N>&) -> double {
        throw error("tent field: laplacian not available");
    };
    f.support_radius = radius;
    f.support_center = center;
    f.name = "tent";
    return f;
}

// C^1 bump A (1 - |x-c|^2/R^2)^2_+ (the mountain-pass profile for s > 1).
template <int N>
Field<N> c1_bump(const Point<N>& center, double radius, double amplitude = 1.0) {
    require(radius > 0.0, "c1_bump: radius must be positive");
    const double R2 = radius * radius;
    Field<N> f;
    f.value = [=](const Point<N>& x) {
        const double t = 1.0 - (x - center).squaredNorm() / R2;
        return t <= 0.0 ? 0.0 : amplitude * t * t;
    };
    f.gradient = [=](const Point<N>& x) {
        const Point<N> d = x - center;
        const double t = 1.0 - d.squaredNorm() / R2;
        if (t <= 0.0) return Point<N>(Point<N>::Zero());
        return Point<N>(-4.0 * amplitude * t / R2 * d);
    };
    f.laplacian = [=](const Point<N>& x) {
        const Point<N> d = x - center;
        const double r2 = d.squaredNorm();
        const double t = 1.0 - r2 / R2;
        if (t <= 0.0) return 0.0;
        return amplitude * (8.0 * r2 / (R2 * R2) - 4.0 * N * t / R2);
    };
    f.support_radius = radius;
    f.support_center = center;
    f.name = "c1_bump";
    return f;
}

namespace detail {
// Quintic Hermite blend on [r1, r2]: matches (v, d, k) = (value, slope,
// curvature) at r1 and decays to zero value/slope/curvature at r2.
struct QuinticBlend {
    double r1, r2, v, d, k;
    double t(double r) const { return (r - r1) / (r2 - r1); }
    double eval(double r) const {
        const double L = r2 - r1, x = t(r);
        const double h00 = 1 + x * x * x * (-10 + 15 * x - 6 * x * x);
        const double h10 = x + x * x * x * (-6 + 8 * x - 3 * x * x);
        const double h20 = 0.5 * (x * x - 3 * x * x * x + 3 * x * x * x * x - x * x * x * x * x);
        return v * h00 + L * d * h10 + L * L * k * h20;
    }
    double deriv(double r) const {
        const double L = r2 - r1, x = t(r);
        const double d00 = x * x * (-30 + 60 * x - 30 * x * x);
        const double d10 = 1 + x * x * (-18 + 32 * x - 15 * x * x);
        const double d20 = 0.5 * (2 * x - 9 * x * x + 12 * x * x * x - 5 * x * x * x * x);
        return (v * d00) / L + d * d10 + L * k * d20;
    }
    double deriv2(double r) const {
        const double L = r2 - r1, x = t(r);
        const double s00 = x * (-60 + 180 * x - 120 * x * x);
        const double s10 = x * (-36 + 96 * x - 60 * x * x);
        const double s20 = 0.5 * (2 - 18 * x + 36 * x * x - 20 * x * x * x);
        return (v * s00) / (L * L) + (d * s10) / L + k * s20;
    }
};
}  // namespace detail

// |x|^2/2 inside B_{R1}, blended C^2-smoothly to zero on [R1, 2 R1]. The
// profile behind the divergence of div((-Delta)^sigma_Omega grad u) outside
// the unit ball.
template <int N>
Field<N> quadratic_cutoff(double R1) {
    require(R1 > 0.0, "quadratic_cutoff: R1 must be positive");
    const double R2 = 2.0 * R1;
    const detail::QuinticBlend blend{R1, R2, 0.5 * R1 * R1, R1, 1.0};
    auto psi = [=](double r) {
        if (r <= R1) return 0.5 * r * r;
        if (r >= R2) return 0.0;
        return blend.eval(r);
    };
    auto dpsi = [=](double r) {
        if (r <= R1) return r;
        if (r >= R2) return 0.0;
        return blend.deriv(r);
    };
    auto ddpsi = [=](double r) {
        if (r <= R1) return 1.0;
        if (r >= R2) return 0.0;
        return blend.deriv2(r);
    };
    Field<N> f;
    f.value = [=](const Point<N>& x) { return psi(x.norm()); };
    f.gradient = [=](const Point<N>& x) {
        const double r = x.norm();
        if (r == 0.0) return Point<N>(Point<N>::Zero());
        return Point<N>(dpsi(r) / r * x);
    };
    f.laplacian = [=](const Point<N>& x) {
        const double r = x.norm();
        if (r < 1e-12) return static_cast<double>(N);
        return ddpsi(r) + (N - 1) * dpsi(r) / r;
    };
    f.support_radius = R2;
    f.name = "quadratic_cutoff";
    return f;
}

// u(. - a)
template <int N>
Field<N> translate(const Field<N>& u, const Point<N>& a) {
    Field<N> f = u;
    f.value = [u, a](const Point<N>& x) { return u.value(x - a); };
    f.gradient = [u, a](const Point<N>& x) { return u.gradient(x - a); };
    f.laplacian = [u, a](const Point<N>& x) { return u.laplacian(x - a); };
    f.support_center = u.support_center + a;
    return f;
}

// u(lambda .)
template <int N>
Field<N> dilate(const Field<N>& u, double lambda) {
    Field<N> f = u;
    f.value = [u, lambda](const Point<N>& x) { return u.value(lambda * x); };
    f.gradient = [u, lambda](const Point<N>& x) {
        return Point<N>(lambda * u.gradient(lambda * x));
    };
    f.laplacian = [u, lambda](const Point<N>& x) {
        return lambda * lambda * u.laplacian(lambda * x);
    };
    f.support_center = u.support_center / lambda;
    f.support_radius = u.support_radius / lambda;
    return f;
}

}  // namespace fields

// Central finite-difference consistency of gradient and laplacian against the
// value callback; returns the worst relative error over the samples.
template <int N>
double fd_consistency(const Field<N>& u, const std::vector<Point<N>>& samples,
                      double step = 1e-4) {
    double worst = 0.0;
    for (const auto& x : samples) {
        Point<N> g_fd;
        double lap_fd = 0.0;
        for (int d = 0; d < N; ++d) {
            Point<N> e = Point<N>::Zero();
            e[d] = step;
            const double fp = u.value(x + e), fm = u.value(x - e), f0 = u.value(x);
            g_fd[d] = (fp - fm) / (2.0 * step);
            lap_fd += (fp - 2.0 * f0 + fm) / (step * step);
        }
        const double gs = std::max(1.0, u.gradient(x).norm());
        const double ls = std::max(1.0, std::abs(u.laplacian(x)));
        worst = std::max(worst, (g_fd - u.gradient(x)).norm() / gs);
        worst = std::max(worst, std::abs(lap_fd - u.laplacian(x)) / ls);
    }
    return worst;
}

}  // namespace fnl
