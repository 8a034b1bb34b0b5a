#pragma once

#include <vector>

#include "fnl/identities/identities.hpp"

namespace fnl {

struct PoincareRow {
    double ball_radius;
    double r1;              // Wirtinger ratio for the function
    double r2;              // Wirtinger ratio for the gradient, D^2-weighted
    bool exact_zero = false;  // affine field: numerator and seminorm vanish
};

// Ratios bounding the Poincare-Wirtinger inequalities on growing balls:
//   r1(B) = int_B (u - avg_Omega u)^2 / (|B|^(1+1/N) int_B |grad u|^2)
//   r2(B) = int_B |grad u - avg_Omega grad u|^2 / (|B|^(1+2sigma/N) D2_B(u))
// with D2_B(u) the pair seminorm restricted to B x Omega.
template <int N>
std::vector<PoincareRow> poincare_probe(const Field<N>& u,
                                        const std::vector<Geometry<N>>& balls,
                                        const Geometry<N>& omega, const Params& params,
                                        const QuadratureSpec& q) {
    const double oh = 2.0 * q.h;
    const double avg_u = [&] {
        double s = 0.0;
        for (auto& n : omega.interior_quadrature(oh)) s += n.w * u.value(n.x);
        return s / omega.measure();
    }();
    Point<N> avg_grad = Point<N>::Zero();
    for (auto& n : omega.interior_quadrature(oh)) avg_grad += n.w * u.gradient(n.x);
    avg_grad /= omega.measure();

    std::vector<PoincareRow> rows;
    for (const auto& B : balls) {
        require(B.inradius() > 0.5 * omega.diameter(),
                "poincare_probe: degenerate ball (radius <= diam(Omega)/2)");
        // the ball must contain Omega
        require(B.contains(omega.center()), "poincare_probe: ball must contain Omega");

        PoincareRow row;
        row.ball_radius = B.inradius();
        if (u.affine) {
            row.exact_zero = true;  // 0/0 guarded: reported as the exact-zero case
            row.r1 = 0.0;
            row.r2 = 0.0;
            rows.push_back(row);
            continue;
        }

        double num1 = 0.0, den1 = 0.0, num2 = 0.0, d2b = 0.0;
        for (auto& n : B.interior_quadrature(oh)) {
            const double du = u.value(n.x) - avg_u;
            num1 += n.w * du * du;
            den1 += n.w * u.gradient(n.x).squaredNorm();
            num2 += n.w * (u.gradient(n.x) - avg_grad).squaredNorm();
            d2b += n.w * green_pair_over_domain(u, u, n.x, omega, params, q);
        }
        const double volB = B.measure();
        row.r1 = num1 / (std::pow(volB, 1.0 + 1.0 / N) * den1);
        row.r2 = num2 / (std::pow(volB, 1.0 + 2.0 * params.sigma / N) * d2b);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace fnl
