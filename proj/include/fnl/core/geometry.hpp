#pragma once

#include <Eigen/Core>
#include <cmath>
#include <optional>
#include <vector>

#include "fnl/common/error.hpp"
#include "fnl/core/quadrature.hpp"

namespace fnl {

template <int N>
using Point = Eigen::Matrix<double, N, 1>;

template <int N>
struct QNode {
    Point<N> x;
    double w;
};

template <int N>
struct BoundaryNode {
    Point<N> x;
    double w;
    Point<N> normal;
};

// Bounded convex domain: a box (interval for N = 1) or a ball. Convexity is
// relied upon by the polar quadratures, which clip rays against the domain.
template <int N>
class Geometry {
public:
    enum class Shape { box, ball };

    static Geometry box(Point<N> lo, Point<N> hi) {
        Geometry g;
        g.shape_ = Shape::box;
        g.lo_ = lo;
        g.hi_ = hi;
        for (int d = 0; d < N; ++d) require(lo[d] < hi[d], "Geometry: empty box");
        return g;
    }
    static Geometry interval(double a, double b) {
        static_assert(N == 1, "interval is one-dimensional");
        return box(Point<1>{a}, Point<1>{b});
    }
    static Geometry ball(Point<N> center, double radius) {
        require(radius > 0.0, "Geometry: radius must be positive");
        Geometry g;
        g.shape_ = Shape::ball;
        g.center_ = center;
        g.radius_ = radius;
        return g;
    }

    Shape shape() const { return shape_; }
    const Point<N>& lo() const { return lo_; }
    const Point<N>& hi() const { return hi_; }
    const Point<N>& ball_center() const { return center_; }
    double ball_radius() const { return radius_; }

    bool contains(const Point<N>& p) const {
        if (shape_ == Shape::ball) return (p - center_).norm() < radius_;
        for (int d = 0; d < N; ++d)
            if (p[d] <= lo_[d] || p[d] >= hi_[d]) return false;
        return true;
    }

    // rho(x) = dist(x, boundary), nonnegative on both sides.
    double dist_boundary(const Point<N>& p) const {
        if (shape_ == Shape::ball) return std::abs((p - center_).norm() - radius_);
        bool inside = true;
        double inner = std::numeric_limits<double>::max();
        Point<N> gap = Point<N>::Zero();
        for (int d = 0; d < N; ++d) {
            inner = std::min(inner, std::min(p[d] - lo_[d], hi_[d] - p[d]));
            if (p[d] < lo_[d]) {
                gap[d] = lo_[d] - p[d];
                inside = false;
            } else if (p[d] > hi_[d]) {
                gap[d] = p[d] - hi_[d];
                inside = false;
            }
        }
        return inside ? inner : gap.norm();
    }

    // Unit outward normal at (or near) a boundary point.
    Point<N> normal(const Point<N>& p) const {
        if (shape_ == Shape::ball) {
            Point<N> v = p - center_;
            const double n = v.norm();
            require(n > 0.0, "Geometry::normal: center has no normal");
            return v / n;
        }
        int best_d = 0;
        double best = std::numeric_limits<double>::max();
        double sign = 1.0;
        for (int d = 0; d < N; ++d) {
            if (std::abs(p[d] - lo_[d]) < best) {
                best = std::abs(p[d] - lo_[d]);
                best_d = d;
                sign = -1.0;
            }
            if (std::abs(p[d] - hi_[d]) < best) {
                best = std::abs(p[d] - hi_[d]);
                best_d = d;
                sign = 1.0;
            }
        }
        Point<N> nu = Point<N>::Zero();
        nu[best_d] = sign;
        return nu;
    }

    double measure() const {
        if (shape_ == Shape::ball)
            return N == 1 ? 2.0 * radius_ : M_PI * radius_ * radius_;
        double m = 1.0;
        for (int d = 0; d < N; ++d) m *= hi_[d] - lo_[d];
        return m;
    }

    double boundary_measure() const {
        if (shape_ == Shape::ball) return N == 1 ? 2.0 : 2.0 * M_PI * radius_;
        if (N == 1) return 2.0;
        double per = 0.0;
        for (int d = 0; d < N; ++d) per += 2.0 * (hi_[d] - lo_[d]);
        return per;
    }

    Point<N> center() const {
        return shape_ == Shape::ball ? center_ : Point<N>(0.5 * (lo_ + hi_));
    }

    double diameter() const {
        return shape_ == Shape::ball ? 2.0 * radius_ : (hi_ - lo_).norm();
    }

    double inradius() const {
        if (shape_ == Shape::ball) return radius_;
        double r = std::numeric_limits<double>::max();
        for (int d = 0; d < N; ++d) r = std::min(r, 0.5 * (hi_[d] - lo_[d]));
        return r;
    }

    // Intersection of the ray {x + t*dir, t > 0} with the domain, as [t0, t1].
    std::optional<std::pair<double, double>> ray_clip(const Point<N>& x,
                                                      const Point<N>& dir) const {
        if (shape_ == Shape::ball) {
            const Point<N> m = x - center_;
            const double b = m.dot(dir);
            const double c = m.squaredNorm() - radius_ * radius_;
            const double disc = b * b - c;
            if (disc <= 0.0) return std::nullopt;
            const double sq = std::sqrt(disc);
            double t0 = -b - sq, t1 = -b + sq;
            t0 = std::max(t0, 0.0);
            if (t1 <= t0) return std::nullopt;
            return std::make_pair(t0, t1);
        }
        double t0 = 0.0, t1 = std::numeric_limits<double>::max();
        for (int d = 0; d < N; ++d) {
            if (dir[d] == 0.0) {
                if (x[d] <= lo_[d] || x[d] >= hi_[d]) return std::nullopt;
                continue;
            }
            double ta = (lo_[d] - x[d]) / dir[d];
            double tb = (hi_[d] - x[d]) / dir[d];
            if (ta > tb) std::swap(ta, tb);
            t0 = std::max(t0, ta);
            t1 = std::min(t1, tb);
        }
        if (t1 <= t0) return std::nullopt;
        return std::make_pair(t0, t1);
    }

    // Exit distance along dir for x inside the domain.
    double ray_exit(const Point<N>& x, const Point<N>& dir) const {
        auto seg = ray_clip(x, dir);
        require(seg.has_value() && seg->first == 0.0, "ray_exit: x must lie inside");
        return seg->second;
    }

    // Nodes and weights for int_{boundary} . dS. In 1D the boundary measure is
    // counting measure on the two endpoints.
    std::vector<BoundaryNode<N>> boundary_quadrature(int nodes_hint = 64) const {
        std::vector<BoundaryNode<N>> out;
        if constexpr (N == 1) {
            const double a = shape_ == Shape::ball ? center_[0] - radius_ : lo_[0];
            const double b = shape_ == Shape::ball ? center_[0] + radius_ : hi_[0];
            out.push_back({Point<1>{a}, 1.0, Point<1>{-1.0}});
            out.push_back({Point<1>{b}, 1.0, Point<1>{+1.0}});
        } else if (shape_ == Shape::ball) {
            const int m = std::max(8, nodes_hint);
            const double w = 2.0 * M_PI * radius_ / m;
            for (int k = 0; k < m; ++k) {
                const double th = 2.0 * M_PI * (k + 0.5) / m;
                Point<N> nu;
                nu << std::cos(th), std::sin(th);
                out.push_back({Point<N>(center_ + radius_ * nu), w, nu});
            }
        } else {
            // four edges, composite midpoint each
            const int m = std::max(4, nodes_hint / 4);
            auto edge = [&](Point<N> a, Point<N> b, Point<N> nu) {
                const double len = (b - a).norm();
                for (int k = 0; k < m; ++k) {
                    Point<N> x = a + (b - a) * ((k + 0.5) / m);
                    out.push_back({x, len / m, nu});
                }
            };
            auto nvec = [](double a, double b) {
                Point<N> v;
                v << a, b;
                return v;
            };
            Point<N> ll = lo_, hh = hi_;
            Point<N> lr = nvec(hh[0], ll[1]), ul = nvec(ll[0], hh[1]);
            edge(ll, lr, nvec(0, -1));
            edge(lr, hh, nvec(1, 0));
            edge(hh, ul, nvec(0, 1));
            edge(ul, ll, nvec(-1, 0));
        }
        return out;
    }

    // Composite midpoint covering of the interior at step ~h. With
    // grade_toward_boundary set, steps shrink dyadically toward the boundary
    // (for integrands with an integrable boundary singularity).
    std::vector<QNode<N>> interior_quadrature(double h, bool grade_toward_boundary = false,
                                              int grade_levels = 30,
                                              int graded_cell_nodes = 0) const {
        // Dyadic cells shrinking toward the boundary get at least
        // graded_cell_nodes midpoints each; with a single midpoint the rule
        // carries a constant relative bias on power-law boundary layers.
        const int gmin = graded_cell_nodes > 0
                             ? graded_cell_nodes
                             : std::max(2, static_cast<int>(std::ceil(0.25 / h)));
        // 1D graded subdivision of [0, L] toward 0
        auto graded_cells = [&](double L) {
            std::vector<std::pair<double, double>> cells;  // (start, len)
            auto add_block = [&](double lo, double hi, int nmin) {
                const int n = std::max(nmin, static_cast<int>(std::ceil((hi - lo) / h)));
                const double step = (hi - lo) / n;
                for (int i = 0; i < n; ++i) cells.push_back({lo + i * step, step});
            };
            if (!grade_toward_boundary) {
                add_block(0.0, L, 1);
                return cells;
            }
            double lo = L * std::ldexp(1.0, -grade_levels);
            cells.push_back({0.0, lo});  // innermost sliver, one midpoint
            for (int k = grade_levels; k >= 1; --k) {
                const double hi = L * std::ldexp(1.0, -(k - 1));
                add_block(lo, hi, hi - lo < h ? gmin : 1);
                lo = hi;
            }
            return cells;
        };

        std::vector<QNode<N>> out;
        if constexpr (N == 1) {
            const double a = shape_ == Shape::ball ? center_[0] - radius_ : lo_[0];
            const double b = shape_ == Shape::ball ? center_[0] + radius_ : hi_[0];
            // grade toward both endpoints: split at the midpoint
            const double mid = 0.5 * (a + b);
            for (auto [s, len] : graded_cells(mid - a)) {
                out.push_back({Point<1>{a + s + 0.5 * len}, len});
                out.push_back({Point<1>{b - s - 0.5 * len}, len});
            }
        } else if (shape_ == Shape::ball) {
            for (auto [s, len] : graded_cells(radius_)) {
                const double r = radius_ - s - 0.5 * len;  // graded toward r = radius
                const int m = std::max(8, static_cast<int>(std::ceil(2.0 * M_PI *
                                                                     std::max(r, h) / h)));
                const double dth = 2.0 * M_PI / m;
                for (int k = 0; k < m; ++k) {
                    const double th = (k + 0.5) * dth;
                    Point<N> x;
                    x << center_[0] + r * std::cos(th), center_[1] + r * std::sin(th);
                    out.push_back({x, r * len * dth});
                }
            }
        } else {
            std::vector<std::pair<double, double>> c0, c1;  // (center offset, len) per dim
            const double m0 = 0.5 * (hi_[0] - lo_[0]), m1 = 0.5 * (hi_[1] - lo_[1]);
            for (auto [s, len] : graded_cells(m0)) {
                c0.push_back({lo_[0] + s + 0.5 * len, len});
                c0.push_back({hi_[0] - s - 0.5 * len, len});
            }
            for (auto [s, len] : graded_cells(m1)) {
                c1.push_back({lo_[1] + s + 0.5 * len, len});
                c1.push_back({hi_[1] - s - 0.5 * len, len});
            }
            for (auto [x0, l0] : c0)
                for (auto [x1, l1] : c1) {
                    Point<N> x;
                    x << x0, x1;
                    out.push_back({x, l0 * l1});
                }
        }
        return out;
    }

    // Covering of B_R(domain center) minus the closed domain, built in polar
    // coordinates around the center so no cell straddles the boundary.
    // Radial steps are graded dyadically toward the domain boundary when
    // `grade_toward_boundary` is set (shell integrands may blow up there).
    std::vector<QNode<N>> exterior_quadrature(double R, double h, int angular_nodes = 64,
                                              bool grade_toward_boundary = false,
                                              int grade_levels = 18,
                                              double inner_gap = 0.0,
                                              double far_stretch_start = 0.0) const {
        std::vector<QNode<N>> out;
        const Point<N> c0 = center();
        auto radial = [&](const Point<N>& dir, double jac_scale, auto&& weight_of_r) {
            const double texit = ray_exit(c0, dir) + inner_gap;
            if (texit >= R) return;
            auto add_block = [&](double lo, double hi) {
                const int n = std::max(1, static_cast<int>(std::ceil((hi - lo) / h)));
                const double step = (hi - lo) / n;
                for (int i = 0; i < n; ++i) {
                    const double t = lo + (i + 0.5) * step;
                    out.push_back({Point<N>(c0 + t * dir), jac_scale * step * weight_of_r(t)});
                }
            };
            auto add_block_min = [&](double lo, double hi, int nmin) {
                const int n = std::max(nmin, static_cast<int>(std::ceil((hi - lo) / h)));
                const double step = (hi - lo) / n;
                for (int i = 0; i < n; ++i) {
                    const double t = lo + (i + 0.5) * step;
                    out.push_back({Point<N>(c0 + t * dir), jac_scale * step * weight_of_r(t)});
                }
            };
            const int gmin = std::max(2, static_cast<int>(std::ceil(0.25 / h)));
            // near part, optionally graded toward the boundary
            const double stretch = far_stretch_start > 0.0 ? far_stretch_start
                                                           : std::numeric_limits<double>::max();
            const double near_hi = std::min(R, texit + stretch);
            if (!grade_toward_boundary) {
                add_block(texit, near_hi);
            } else {
                const double L = near_hi - texit;
                double hi_r = near_hi;
                for (int k = 0; k < grade_levels; ++k) {
                    const double lo_r = texit + L * std::ldexp(1.0, -(k + 1));
                    add_block_min(lo_r, hi_r, hi_r - lo_r < h ? gmin : 1);
                    hi_r = lo_r;
                }
                add_block(texit, hi_r);
            }
            // far part: octave blocks, fixed node budget per octave
            double lo_r = near_hi;
            while (lo_r < R) {
                const double hi_r = std::min(R, 2.0 * lo_r);
                const int n = std::max(8, static_cast<int>(std::ceil(stretch / h)));
                const double step = (hi_r - lo_r) / n;
                for (int i = 0; i < n; ++i) {
                    const double t = lo_r + (i + 0.5) * step;
                    out.push_back({Point<N>(c0 + t * dir), jac_scale * step * weight_of_r(t)});
                }
                lo_r = hi_r;
            }
        };
        if constexpr (N == 1) {
            for (double sgn : {-1.0, 1.0})
                radial(Point<1>{sgn}, 1.0, [](double) { return 1.0; });
        } else {
            const int m = std::max(8, angular_nodes);
            const double dth = 2.0 * M_PI / m;
            for (int k = 0; k < m; ++k) {
                const double th = (k + 0.5) * dth;
                Point<N> dir;
                dir << std::cos(th), std::sin(th);
                radial(dir, dth, [](double t) { return t; });
            }
        }
        return out;
    }

private:
    Shape shape_ = Shape::box;
    Point<N> lo_ = Point<N>::Zero(), hi_ = Point<N>::Ones();
    Point<N> center_ = Point<N>::Zero();
    double radius_ = 1.0;
};

}  // namespace fnl
