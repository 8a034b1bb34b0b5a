#pragma once

#include <cmath>
#include <functional>

#include "fnl/core/field.hpp"
#include "fnl/core/params.hpp"

namespace fnl {

// Region of integration for the regional operator: a bounded convex geometry
// or the complement of its closure.
template <int N>
struct Region {
    Geometry<N> base;
    bool complement = false;
};

enum class FracOrder { sigma, s };       // kernel window: w = u  or  w = -lap u
enum class PVMode { split, direct };     // direct only valid for sigma < 1/2

namespace detail {

// Scalar window w under the kernel, with its support ball. Outside the ball
// the window vanishes identically, so those kernel segments integrate in
// closed form against w(x).
template <int N>
struct Window {
    std::function<double(const Point<N>&)> eval;
    double wx = 0.0;     // w at the evaluation point
    Point<N> sc = Point<N>::Zero();
    double sr = 0.0;     // support radius (0 => window is identically zero)
};

template <int N>
Window<N> value_window(const Field<N>& u, const Point<N>& x) {
    Window<N> w;
    w.eval = u.value;
    w.wx = u.value(x);
    w.sc = u.support_center;
    w.sr = u.support_radius;
    return w;
}

template <int N>
Window<N> neg_laplacian_window(const Field<N>& u, const Point<N>& x) {
    Window<N> w;
    w.eval = [lap = u.laplacian](const Point<N>& y) { return -lap(y); };
    w.wx = -u.laplacian(x);
    w.sc = u.support_center;
    w.sr = u.support_radius;
    return w;
}

template <int N>
Window<N> partial_window(const Field<N>& u, const Point<N>& x, int d) {
    Window<N> w;
    w.eval = [grad = u.gradient, d](const Point<N>& y) { return grad(y)[d]; };
    w.wx = u.gradient(x)[d];
    w.sc = u.support_center;
    w.sr = u.support_radius;
    return w;
}

// int_p^q t^(-1-2a) dt, q may be infinite.
inline double kernel_segment(double p, double q, double a) {
    if (!(q > p) || p <= 0.0) return 0.0;
    const double hi = std::isinf(q) ? 0.0 : std::pow(q, -2.0 * a);
    return (std::pow(p, -2.0 * a) - hi) / (2.0 * a);
}

// Intersection of the ray x + t*dir (t >= 0) with the window's support ball.
template <int N>
std::optional<std::pair<double, double>> ray_support(const Window<N>& w, const Point<N>& x,
                                                     const Point<N>& dir) {
    const Point<N> m = x - w.sc;
    const double b = m.dot(dir);
    const double c = m.squaredNorm() - w.sr * w.sr;
    const double disc = b * b - c;
    if (disc <= 0.0) return std::nullopt;
    const double sq = std::sqrt(disc);
    double t0 = std::max(-b - sq, 0.0), t1 = -b + sq;
    if (t1 <= t0) return std::nullopt;
    return std::make_pair(t0, t1);
}

// int over the radial segment [p, q] of (w(x) - w(x + t dir)) t^(-1-2a) dt.
// Only the part crossing the support ball needs nodes; the rest is w(x)
// against the closed-form kernel integral. `singular_at_p` grades toward p.
template <int N>
double segment_contribution(const Window<N>& w, const Point<N>& x, const Point<N>& dir,
                            double p, double q, double a, const QuadratureSpec& spec,
                            bool singular_at_p) {
    if (!(q > p)) return 0.0;
    auto supp = ray_support(w, x, dir);
    double lo = q, hi = q;  // empty by default
    if (supp) {
        lo = std::max(p, supp->first);
        hi = std::min(q, supp->second);
    }
    double total = 0.0;
    if (supp && hi > lo) {
        auto f = [&](double t) {
            return (w.wx - w.eval(x + t * dir)) * std::pow(t, -1.0 - 2.0 * a);
        };
        total += quad::integrate_radial(f, lo, hi, spec.h, spec.grade_levels,
                                        singular_at_p && lo <= p * (1.0 + 1e-14),
                                        spec.rel_step);
        if (w.wx != 0.0) {
            total += w.wx * kernel_segment(p, lo, a);
            total += w.wx * kernel_segment(hi, q, a);
        }
    } else if (w.wx != 0.0) {
        total += w.wx * kernel_segment(p, q, a);
    }
    return total;
}

// Symmetric-pair integral over the ball B_delta(x):
//   int_{B_delta} (w(x) - w(y)) / |x-y|^(N+2a) dy
// evaluated with antipodal node pairs, which cancels the odd (gradient) part
// of the integrand exactly and realizes the principal value.
template <int N>
double pv_ball(const Window<N>& w, const Point<N>& x, double delta, double a,
               const QuadratureSpec& spec) {
    auto radial = [&](const Point<N>& dir) {
        auto f = [&](double t) {
            return (2.0 * w.wx - w.eval(x + t * dir) - w.eval(x - t * dir)) *
                   std::pow(t, -1.0 - 2.0 * a);
        };
        return quad::integrate_radial(f, 0.0, delta, spec.h, spec.grade_levels, true,
                                      spec.rel_step);
    };
    if constexpr (N == 1) {
        return radial(Point<1>{1.0});
    } else {
        const int m = std::max(8, spec.angular_nodes / 2);
        const double dth = M_PI / m;
        double s = 0.0;
        for (int k = 0; k < m; ++k) {
            const double th = (k + 0.5) * dth;
            Point<N> dir;
            dir << std::cos(th), std::sin(th);
            s += radial(dir);
        }
        return s * dth;
    }
}

// Directions and angular weights of the polar far-field rule.
template <int N, typename Fn>
double angular_sum(const QuadratureSpec& spec, Fn&& per_direction) {
    if constexpr (N == 1) {
        return per_direction(Point<1>{1.0}) + per_direction(Point<1>{-1.0});
    } else {
        const int m = std::max(8, spec.angular_nodes);
        const double dth = 2.0 * M_PI / m;
        double s = 0.0;
        for (int k = 0; k < m; ++k) {
            const double th = (k + 0.5) * dth;
            Point<N> dir;
            dir << std::cos(th), std::sin(th);
            s += per_direction(dir);
        }
        return s * dth;
    }
}

// Visibility cone of a convex geometry from an exterior point: center
// direction angle and half-width.
template <int N>
std::pair<double, double> visibility_cone(const Geometry<N>& G, const Point<N>& x) {
    static_assert(N == 2, "cone parametrization is two-dimensional");
    if (G.shape() == Geometry<N>::Shape::ball) {
        const Point<N> v = G.ball_center() - x;
        const double d = v.norm();
        const double beta = std::atan2(v[1], v[0]);
        return {beta, std::asin(std::min(1.0, G.ball_radius() / d))};
    }
    const Point<N> v = G.center() - x;
    const double beta = std::atan2(v[1], v[0]);
    double half = 0.0;
    for (int i = 0; i < 4; ++i) {
        Point<N> corner;
        corner << (i & 1 ? G.hi()[0] : G.lo()[0]), (i & 2 ? G.hi()[1] : G.lo()[1]);
        const Point<N> w = corner - x;
        double dth = std::atan2(w[1], w[0]) - beta;
        while (dth > M_PI) dth -= 2.0 * M_PI;
        while (dth < -M_PI) dth += 2.0 * M_PI;
        half = std::max(half, std::abs(dth));
    }
    return {beta, half};
}

// Sum of per-direction chord integrals of G seen from an exterior (or
// boundary) point x. The substitution theta = beta + A sin(phi) removes the
// square-root kink of chord integrals at the tangency angles.
// PerDir: double(const Point<N>& dir, double t_enter, double t_exit)
template <int N, typename PerDir>
double cone_sum(const Geometry<N>& G, const Point<N>& x, const QuadratureSpec& spec,
                PerDir&& per_dir) {
    if constexpr (N == 1) {
        double s = 0.0;
        for (double sgn : {-1.0, 1.0}) {
            const Point<1> dir{sgn};
            if (auto clip = G.ray_clip(x, dir)) s += per_dir(dir, clip->first, clip->second);
        }
        return s;
    } else {
        const auto [beta, half] = visibility_cone(G, x);
        const int m = std::max(8, spec.angular_nodes);
        const double dphi = M_PI / m;
        double s = 0.0;
        for (int k = 0; k < m; ++k) {
            const double phi = -0.5 * M_PI + (k + 0.5) * dphi;
            const double th = beta + half * std::sin(phi);
            Point<N> dir;
            dir << std::cos(th), std::sin(th);
            auto clip = G.ray_clip(x, dir);
            if (!clip) continue;
            s += per_dir(dir, clip->first, clip->second) * half * std::cos(phi) * dphi;
        }
        return s;
    }
}

template <int N>
double chords_from_outside(const Window<N>& w, const Point<N>& x, const Geometry<N>& G,
                           double p_lo, double a, const QuadratureSpec& spec) {
    return cone_sum(G, x, spec, [&](const Point<N>& dir, double t0, double t1) {
        const double pstart = std::max(p_lo, t0);
        return segment_contribution(w, x, dir, pstart, t1, a, spec, pstart <= 1e-300);
    });
}

}  // namespace detail

// ---------------------------------------------------------------------------
// (-Delta)^order over R^N at a point. order = sigma applies the kernel to u,
// order = s = 1 + sigma applies it to -lap u. The principal value is realized
// by the symmetric-ball split; with PVMode::direct (sigma < 1/2 only) the
// absolutely convergent integral is quadratured without the split.
template <int N>
double frac_laplacian(const Field<N>& u, const Point<N>& x, const Params& params,
                      const QuadratureSpec& q, FracOrder order = FracOrder::s,
                      PVMode pv = PVMode::split) {
    q.validate();
    if (u.affine) return 0.0;  // integrand identically zero under PV symmetry
    const double edge = std::abs((x - u.support_center).norm() - u.support_radius);
    require(edge > 1e-12 * std::max(1.0, u.support_radius),
            "frac_laplacian: evaluation on the support sphere is refused");

    const double a = params.sigma;
    auto w = (order == FracOrder::sigma) ? detail::value_window(u, x)
                                         : detail::neg_laplacian_window(u, x);
    require(std::isfinite(w.wx), "frac_laplacian: non-finite field value");

    double total = 0.0;
    if (pv == PVMode::split) {
        const double delta = q.pv_split_radius;
        total += detail::pv_ball(w, x, delta, a, q);
        total += detail::angular_sum<N>(q, [&](const Point<N>& dir) {
            return detail::segment_contribution(w, x, dir, delta,
                                                std::numeric_limits<double>::infinity(), a,
                                                q, false);
        });
    } else {
        require(a < 0.5, "frac_laplacian: direct quadrature requires sigma < 1/2");
        total += detail::angular_sum<N>(q, [&](const Point<N>& dir) {
            return detail::segment_contribution(w, x, dir, 0.0,
                                                std::numeric_limits<double>::infinity(), a,
                                                q, true);
        });
    }
    const double value = params.c * total;
    if (!std::isfinite(value)) throw error("frac_laplacian: non-finite result");
    return value;
}

// ---------------------------------------------------------------------------
// Regional operator (-Delta)^sigma_A w at x not on the boundary of A. For
// interior points with sigma >= 1/2 the two-piece formula is used: plain
// integral over A minus the inscribed ball, symmetric-pair integral inside.
template <int N>
double regional_laplacian_window(const detail::Window<N>& w, const Point<N>& x,
                                 const Region<N>& region, const Params& params,
                                 const QuadratureSpec& q, bool allow_boundary = false) {
    q.validate();
    const double a = params.sigma;
    const auto& G = region.base;
    const double rho = G.dist_boundary(x);
    // Boundary evaluation is absolutely convergent when sigma < 1/2, or when
    // the window vanishes identically in a neighborhood of x.
    const double support_gap = (x - w.sc).norm() - w.sr;
    if (!allow_boundary)
        require(rho > 0.0, "regional operator: boundary point, use trace evaluation");
    else
        require(a < 0.5 || support_gap > 0.0,
                "regional operator: boundary evaluation requires sigma < 1/2 or a "
                "window vanishing near the point");

    const double inf = std::numeric_limits<double>::infinity();
    // Points passed with allow_boundary sit on the boundary up to roundoff;
    // pin their classification so degenerate ray clips cannot occur.
    const bool in_base = G.contains(x) && !allow_boundary;
    double total = 0.0;

    if (!region.complement) {
        if (in_base) {
            // interior of the base: exit distances are smooth in the angle
            if (a >= 0.5) {
                const double split = std::min(q.pv_split_radius, rho);
                total += detail::pv_ball(w, x, split, a, q);
                total += detail::angular_sum<N>(q, [&](const Point<N>& dir) {
                    return detail::segment_contribution(w, x, dir, split,
                                                        G.ray_exit(x, dir), a, q, false);
                });
            } else {
                total += detail::angular_sum<N>(q, [&](const Point<N>& dir) {
                    return detail::segment_contribution(w, x, dir, 0.0, G.ray_exit(x, dir),
                                                        a, q, true);
                });
            }
        } else {
            // exterior view of a convex body: cone rule kills the tangency kink
            total += detail::chords_from_outside(w, x, G, 0.0, a, q);
        }
    } else {
        if (in_base) {
            // from inside the base the complement starts at the smooth exit
            total += detail::angular_sum<N>(q, [&](const Point<N>& dir) {
                return detail::segment_contribution(w, x, dir, G.ray_exit(x, dir), inf, a,
                                                    q, false);
            });
        } else {
            // interior of the complement: full rays minus the chords of the base
            if (a >= 0.5 && rho > 0.0) {
                const double split = std::min(q.pv_split_radius, rho);
                total += detail::pv_ball(w, x, split, a, q);
                total += detail::angular_sum<N>(q, [&](const Point<N>& dir) {
                    return detail::segment_contribution(w, x, dir, split, inf, a, q, false);
                });
                total -= detail::chords_from_outside(w, x, G, split, a, q);
            } else {
                total += detail::angular_sum<N>(q, [&](const Point<N>& dir) {
                    return detail::segment_contribution(w, x, dir, 0.0, inf, a, q, true);
                });
                total -= detail::chords_from_outside(w, x, G, 0.0, a, q);
            }
        }
    }
    const double value = params.c * total;
    if (!std::isfinite(value)) throw error("regional operator: non-finite result");
    return value;
}

template <int N>
double regional_laplacian(const Field<N>& u, const Point<N>& x, const Region<N>& region,
                          const Params& params, const QuadratureSpec& q) {
    if (u.affine) return 0.0;
    return regional_laplacian_window(detail::value_window(u, x), x, region, params, q);
}

// ---------------------------------------------------------------------------
// N_sigma w(x) = c int_Omega (w(x) - w(y)) / |x-y|^(N+2sigma) dy for exterior x.
template <int N>
double nonlocal_derivative_Ns(const Field<N>& w, const Point<N>& x, const Geometry<N>& omega,
                              const Params& params, const QuadratureSpec& q) {
    require(!omega.contains(x) && omega.dist_boundary(x) > 0.0,
            "nonlocal_derivative_Ns: x must lie outside the closed domain");
    return regional_laplacian_window(detail::value_window(w, x), x,
                                     Region<N>{omega, false}, params, q);
}

// ---------------------------------------------------------------------------
// N^1_sigma u(x) = -div((-Delta)^sigma_Omega grad u)(x) for exterior x, via the
// single-integral identity
//   div(...) = c int_Omega [lap u(x) - (N+2s)(grad u(x)-grad u(y)).(x-y)/|x-y|^2]
//              / |x-y|^(N+2s) dy.
template <int N>
double neumann_n1(const Field<N>& u, const Point<N>& x, const Geometry<N>& omega,
                  const Params& params, const QuadratureSpec& q) {
    q.validate();
    require(!omega.contains(x) && omega.dist_boundary(x) > 0.0,
            "neumann_n1: x must lie outside the closed domain");
    if (u.affine) return 0.0;  // grad u constant, lap u = 0: integrand vanishes

    const double a = params.sigma;
    const double lap_x = u.laplacian(x);
    const Point<N> grad_x = u.gradient(x);
    detail::Window<N> supp = detail::value_window(u, x);  // for ray/support geometry

    auto per_direction = [&](const Point<N>& dir, double p, double qq) {
        // window-crossing part with nodes, remainder in closed form
        auto sray = detail::ray_support(supp, x, dir);
        double lo = qq, hi = qq;
        if (sray) {
            lo = std::max(p, sray->first);
            hi = std::min(qq, sray->second);
        }
        const double gdir = grad_x.dot(dir);
        auto integrand = [&](double t) {
            // (grad u(x) - grad u(y)) . (x - y)/|x-y|^2 = (grad u(y) - grad u(x)) . dir / t
            const Point<N> gy = u.gradient(x + t * dir);
            const double radial_term = (gy - grad_x).dot(dir) / t;
            return (lap_x - (N + 2.0 * a) * radial_term) * std::pow(t, -1.0 - 2.0 * a);
        };
        double s = 0.0;
        if (sray && hi > lo)
            s += quad::integrate_radial(integrand, lo, hi, q.h, q.grade_levels, false,
                                        q.rel_step);
        // outside the support: grad u(y) = 0
        auto closed = [&](double c0, double c1) {
            if (!(c1 > c0)) return 0.0;
            double v = lap_x * detail::kernel_segment(c0, c1, a);
            if (gdir != 0.0) {
                // int t^(-2-2a) dt term from  +(N+2a) grad u(x).dir / t
                const double k2 = (std::pow(c0, -1.0 - 2.0 * a) -
                                   (std::isinf(c1) ? 0.0 : std::pow(c1, -1.0 - 2.0 * a))) /
                                  (1.0 + 2.0 * a);
                v += (N + 2.0 * a) * gdir * k2;
            }
            return v;
        };
        s += closed(p, lo);
        s += closed(hi, qq);
        return s;
    };

    const double div_value = params.c * detail::cone_sum(omega, x, q, per_direction);
    if (!std::isfinite(div_value)) throw error("neumann_n1: non-finite result");
    return -div_value;
}

// ---------------------------------------------------------------------------
// N^2_sigma u(x) = (-Delta)^sigma_{complement}(grad u)(x) . nu(x) for x on the
// boundary. Direct quadrature for sigma < 1/2; for sigma >= 1/2 the trace is
// taken along x + eps nu with first-order Richardson extrapolation over a
// geometric eps sequence.
struct TraceOptions {
    double eps0 = 0.0;          // 0: derived from the quadrature step
    int levels = 5;
    double rel_tol = 1e-3;
    bool force_extrapolation = false;  // use the eps path even for sigma < 1/2
};

template <int N>
double neumann_n2(const Field<N>& u, const Point<N>& x, const Geometry<N>& omega,
                  const Params& params, const QuadratureSpec& q,
                  TraceOptions topt = {}) {
    q.validate();
    require(omega.dist_boundary(x) <= 1e-10 * std::max(1.0, omega.diameter()),
            "neumann_n2: x must lie on the boundary");
    if (u.affine) return 0.0;  // grad u constant: integrand identically zero

    const Point<N> nu = omega.normal(x);
    const Region<N> comp{omega, true};
    auto eval_at = [&](const Point<N>& p, bool on_boundary) {
        double v = 0.0;
        for (int d = 0; d < N; ++d)
            v += nu[d] * regional_laplacian_window(detail::partial_window(u, p, d), p, comp,
                                                   params, q, on_boundary);
        return v;
    };

    if (params.sigma < 0.5 && !topt.force_extrapolation) return eval_at(x, true);

    // For sigma >= 1/2 a genuine pointwise trace exists when grad u vanishes
    // identically near x; the direct integral is then absolutely convergent
    // and sharper than any extrapolation.
    const bool grad_clear_of_x =
        (x - u.support_center).norm() - u.support_radius > 0.0;
    if (grad_clear_of_x && !topt.force_extrapolation) return eval_at(x, true);

    // Boundary layer of the regional operator behaves like eps^(1-2sigma) for
    // sigma < 1/2; for sigma >= 1/2 the operator has a boundary trace only
    // when that layer's coefficient vanishes (gradients flat near the
    // boundary), leaving a smooth O(eps) error. Two extrapolation stages
    // remove the leading and first subleading exponents.
    const double a1 = params.sigma < 0.5 ? 1.0 - 2.0 * params.sigma : 1.0;
    const double a2 = params.sigma < 0.5 ? 1.0 : 2.0;
    const double w1 = std::pow(2.0, a1), w2 = std::pow(2.0, a2);
    const double eps0 = topt.eps0 > 0.0 ? topt.eps0
                                        : std::min(2.0 * q.h, 0.25 * omega.inradius());
    std::vector<double> g(topt.levels);
    for (int k = 0; k < topt.levels; ++k)
        g[k] = eval_at(x + (eps0 * std::ldexp(1.0, -k)) * nu, false);
    std::vector<double> t1(topt.levels - 1), t2(topt.levels - 2);
    for (int k = 0; k + 1 < topt.levels; ++k) t1[k] = (w1 * g[k + 1] - g[k]) / (w1 - 1.0);
    for (int k = 0; k + 2 < topt.levels; ++k) t2[k] = (w2 * t1[k + 1] - t1[k]) / (w2 - 1.0);
    const double result = t2.back();
    const double prev = t2.size() >= 2 ? t2[t2.size() - 2] : t1.back();
    const double scale = std::max({std::abs(result), std::abs(prev), 1e-14});
    const double residual = std::abs(result - prev) / scale;
    if (residual > topt.rel_tol) {
        std::vector<double> detail_seq(g);
        detail_seq.insert(detail_seq.end(), t2.begin(), t2.end());
        throw error("neumann_n2: trace extrapolation residual above tolerance", detail_seq);
    }
    return result;
}

}  // namespace fnl
