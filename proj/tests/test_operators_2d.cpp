#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "fnl/core/fourier.hpp"
#include "fnl/core/operators.hpp"

using namespace fnl;
using P2 = Point<2>;

namespace {
QuadratureSpec spec_2d() {
    QuadratureSpec q;
    q.h = 0.05;
    q.R = 12.0;
    q.pv_split_radius = 0.3;
    q.angular_nodes = 64;
    return q;
}

// (-Delta)^s of exp(-|x|^2/2) at the origin in 2D: 2^s Gamma(s+1) / Gamma(1).
double gaussian_origin_value_2d(double s) { return std::pow(2.0, s) * std::tgamma(s + 1.0); }
}  // namespace

TEST_CASE("2D Gaussian at the origin matches the closed Fourier value") {
    auto q = spec_2d();
    P2 c0 = P2::Zero();
    auto u = fields::gaussian<2>(c0, 1.0);
    for (double sigma : {0.25, 0.5, 0.75}) {
        auto p = make_params(2, sigma);
        const double got = frac_laplacian(u, c0, p, q, FracOrder::s);
        const double ref = gaussian_origin_value_2d(1.0 + sigma);
        CHECK(std::abs(got - ref) <= 1e-3 * ref);
    }
}

TEST_CASE("2D geometry primitives") {
    auto disk = Geometry<2>::ball(P2::Zero(), 1.0);
    CHECK(disk.contains(P2{0.5, 0.5}));
    CHECK_FALSE(disk.contains(P2{0.8, 0.8}));
    CHECK(std::abs(disk.measure() - M_PI) < 1e-14);
    CHECK(std::abs(disk.boundary_measure() - 2 * M_PI) < 1e-14);
    auto bq = disk.boundary_quadrature(128);
    double per = 0.0;
    for (auto& n : bq) {
        per += n.w;
        CHECK(std::abs(n.normal.norm() - 1.0) < 1e-14);
    }
    CHECK(std::abs(per - 2 * M_PI) < 1e-12);

    // interior quadrature integrates a smooth function over the disk
    double m = 0.0;
    for (auto& n : disk.interior_quadrature(0.02)) m += n.w * n.x.squaredNorm();
    CHECK(std::abs(m - M_PI / 2.0) < 5e-4);

    // exterior quadrature covers an annulus exactly
    double area = 0.0;
    for (auto& n : disk.exterior_quadrature(3.0, 0.02, 256)) area += n.w;
    CHECK(std::abs(area - M_PI * 8.0) < 1e-10);

    auto box = Geometry<2>::box(P2{-1, -2}, P2{1, 2});
    CHECK(std::abs(box.measure() - 8.0) < 1e-14);
    double barea = 0.0;
    for (auto& n : box.exterior_quadrature(4.0, 0.05, 128)) barea += n.w;
    CHECK(std::abs(barea - (M_PI * 16.0 - 8.0)) < 2e-2);
}

TEST_CASE("2D regional decomposition on the disk") {
    auto q = spec_2d();
    auto disk = Geometry<2>::ball(P2::Zero(), 1.0);
    auto u = fields::gaussian<2>(P2{0.2, -0.1}, 0.6);
    for (double sigma : {0.3, 0.7}) {
        auto p = make_params(2, sigma);
        for (auto& t : {P2{0.3, 0.2}, P2{1.2, 0.9}}) {
            const double inner = regional_laplacian(u, t, Region<2>{disk, false}, p, q);
            const double outer = regional_laplacian(u, t, Region<2>{disk, true}, p, q);
            const double full = frac_laplacian(u, t, p, q, FracOrder::sigma);
            CHECK(std::abs(inner + outer - full) <= 2e-3 * std::max(1.0, std::abs(full)));
        }
    }
}

TEST_CASE("2D rotational symmetry of neumann_n2 on the disk") {
    auto q = spec_2d();
    auto disk = Geometry<2>::ball(P2::Zero(), 1.0);
    auto u = fields::poly_bump<2>(P2::Zero(), 0.8);  // radial, flat near the circle
    auto p = make_params(2, 0.6);
    std::vector<double> vals;
    for (double th : {0.0, 1.1, 2.7, 4.5}) {
        const P2 x{std::cos(th), std::sin(th)};
        vals.push_back(neumann_n2(u, x, disk, p, q));
    }
    double lo = vals[0], hi = vals[0];
    for (double v : vals) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    CHECK(std::isfinite(vals[0]));
    CHECK(hi - lo <= 1e-3 * std::max(1.0, std::abs(vals[0])));
}

TEST_CASE("2D neumann_n1: independent-quadrature and divergence oracles") {
    auto q = spec_2d();
    auto disk = Geometry<2>::ball(P2::Zero(), 1.0);
    auto u = fields::gaussian<2>(P2{0.1, 0.0}, 0.8);
    auto p = make_params(2, 0.4);
    const P2 x{1.4, 0.5};
    const double got = neumann_n1(u, x, disk, p, q);

    // independent route: same single-integral formula on the disk's own
    // area quadrature instead of the polar ray rule
    const double lap_x = u.laplacian(x);
    const P2 gx = u.gradient(x);
    double direct = 0.0;
    for (auto& n : disk.interior_quadrature(0.01)) {
        const P2 d = x - n.x;
        const double r2 = d.squaredNorm();
        const double radial = (gx - u.gradient(n.x)).dot(d) / r2;
        direct += n.w * (lap_x - (2.0 + 2.0 * p.sigma) * radial) *
                  std::pow(r2, -0.5 * (2.0 + 2.0 * p.sigma));
    }
    direct *= -p.c;
    CHECK(std::abs(got - direct) <= 2.5e-3 * std::abs(got));
    const double fine = neumann_n1(u, x, disk, p, q.refined());
    CHECK(std::abs(fine - direct) < std::abs(got - direct));

    // coarse finite-difference divergence of the componentwise regional
    // operator (step-halving); loose tolerance, the two evaluations do not
    // share quadrature nodes
    auto F = [&](const P2& pt, int d) {
        return regional_laplacian_window(detail::partial_window(u, pt, d), pt,
                                         Region<2>{disk, false}, p, q);
    };
    auto div_at = [&](double h) {
        double v = 0.0;
        for (int d = 0; d < 2; ++d) {
            P2 e = P2::Zero();
            e[d] = h;
            v += (F(x + e, d) - F(x - e, d)) / (2.0 * h);
        }
        return v;
    };
    const double fd = (4.0 * div_at(0.05) - div_at(0.1)) / 3.0;
    CHECK(std::abs(got + fd) <= 2e-2 * std::max(0.1, std::abs(got)));
}

TEST_CASE("2D grid symbol: factored routes and single mode") {
    PeriodicGrid<2> grid{M_PI, 32};
    Field<2> u;
    u.value = [](const P2& x) { return std::sin(3.0 * x[0]) * std::sin(2.0 * x[1]); };
    u.support_radius = 1e9;
    auto gu = sample_on_grid(grid, u);
    auto out = fourier_power(gu, 0.6);
    const double lam = std::pow(13.0, 0.6);  // |k|^2 = 9 + 4
    for (int i = 0; i < grid.size(); ++i)
        CHECK(std::abs(out.values[i] - lam * gu.values[i]) < 1e-10);

    auto gw = sample_on_grid(PeriodicGrid<2>{10.0, 128}, fields::gaussian<2>(P2{0.3, -0.2}, 0.9));
    auto r1 = route_outer_laplacian(gw, 0.6);
    auto r2 = route_inner_laplacian(gw, 0.6);
    auto r3 = route_div_grad(gw, 0.6);
    double m = 0.0;
    for (int i = 0; i < gw.grid.size(); ++i) {
        m = std::max(m, std::abs(r1.values[i] - r2.values[i]));
        m = std::max(m, std::abs(r1.values[i] - r3.values[i]));
    }
    CHECK(m < 1e-10);
}
