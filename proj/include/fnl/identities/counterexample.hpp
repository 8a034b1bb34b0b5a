#pragma once

#include <vector>

#include "fnl/identities/identities.hpp"

namespace fnl {

struct CounterexampleRow {
    double delta;
    double integral;  // I(delta) = int over the shell of |div((-D)^sigma grad u)|
};

struct CounterexampleResult {
    std::vector<CounterexampleRow> table;
    double loglog_slope = 0.0;   // slope of log I against log delta
    double log_slope = 0.0;      // slope of I against log(1/delta)
    double limit_estimate = 0.0; // last I(delta), meaningful when converging
};

namespace detail {
inline std::pair<double, double> least_squares_slope(const std::vector<double>& xs,
                                                     const std::vector<double>& ys) {
    const int n = static_cast<int>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return {slope, (sy - slope * sx) / n};
}
}  // namespace detail

// Shell integrals I(delta) of |div((-Delta)^sigma_Omega grad u)| over
// {delta < dist(x, bdry) < delta0, x outside Omega} for the quadratic-profile
// field, with a log-log rate fit. delta0 is the largest delta supplied.
template <int N>
CounterexampleResult counterexample_divergence(double sigma,
                                               std::vector<double> deltas,
                                               const Geometry<N>& omega,
                                               QuadratureSpec q = {},
                                               double cutoff_radius = 0.0) {
    require(deltas.size() >= 3, "counterexample_divergence: need at least 3 delta values");
    std::sort(deltas.begin(), deltas.end(), std::greater<double>());
    const double delta0 = deltas.front();

    const double R1 = cutoff_radius > 0.0
                          ? cutoff_radius
                          : omega.diameter() * 0.5 + delta0 + 0.5;
    auto u = fields::quadratic_cutoff<N>(R1);
    auto params = make_params(N, sigma);

    CounterexampleResult out;
    double run = 0.0;
    double prev = delta0;
    for (std::size_t i = 1; i < deltas.size(); ++i) {
        run += n1_shell_integral(u, omega, params, q, deltas[i], prev);
        prev = deltas[i];
        out.table.push_back({deltas[i], run});
    }
    std::vector<double> lx, ly, ix;
    for (auto& row : out.table) {
        lx.push_back(std::log(row.delta));
        ly.push_back(std::log(std::max(row.integral, 1e-300)));
        ix.push_back(std::log(1.0 / row.delta));
    }
    out.loglog_slope = detail::least_squares_slope(lx, ly).first;
    std::vector<double> iy;
    for (auto& row : out.table) iy.push_back(row.integral);
    out.log_slope = detail::least_squares_slope(ix, iy).first;
    out.limit_estimate = out.table.back().integral;
    return out;
}

}  // namespace fnl
