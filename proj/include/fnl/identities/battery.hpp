#pragma once

#include <sstream>

#include "fnl/common/threading.hpp"
#include "fnl/identities/identities.hpp"

namespace fnl {

struct BatteryItem {
    IdentityId id;
    double sigma;
    std::string field_name;
    IdentityReport report;
};

struct BatteryConfig {
    std::vector<double> sigmas{0.25, 0.5, 0.75};
    QuadratureSpec q;
    IdentityOptions opt;
    int threads = 1;
};

// Standard verification battery over Gaussian bumps and polynomial-cutoff
// fields. For sigma >= 1/2 the N1-based identities run on fields supported
// strictly inside Omega, the regime in which the integrability condition
// holds (certified numerically before each check).
template <int N>
std::vector<BatteryItem> run_identity_battery(const Geometry<N>& omega, BatteryConfig cfg) {
    const double inr = omega.inradius();
    const Point<N> c0 = omega.center();

    auto off = [&](double frac) {
        Point<N> p = c0;
        p[0] += frac * inr;
        return p;
    };

    // fields allowed to overlap the boundary (power-8 bumps are C^7, smooth
    // enough that (-D)^s u has no visible cusp at the support sphere)
    const Field<N> gauss_any = fields::gaussian<N>(off(0.15), 0.5 * inr);
    const Field<N> bump_any = fields::poly_bump_pow<N>(off(-0.2), 1.4 * inr, 8);
    // fields supported strictly inside Omega
    const Field<N> bump_in = fields::poly_bump_pow<N>(off(0.1), 0.6 * inr, 8);
    const Field<N> bump_in2 = fields::poly_bump_pow<N>(off(-0.08), 0.55 * inr, 8);
    // Green test field
    const Field<N> v_green = fields::poly_bump_pow<N>(off(-0.15), 0.5 * inr, 8);

    struct Job {
        IdentityId id;
        const Field<N>* u;
        std::optional<Field<N>> v;
        double sigma;
        std::string name;
    };
    std::vector<Job> jobs;
    for (double sigma : cfg.sigmas) {
        const bool needs_inside = sigma >= 0.5;
        const Field<N>* u_any = &gauss_any;
        const Field<N>* u_n1 = needs_inside ? &bump_in : &gauss_any;
        jobs.push_back({IdentityId::REG_ZERO_MEAN, u_any, std::nullopt, sigma, "gaussian"});
        jobs.push_back({IdentityId::IBP1, &bump_any, std::nullopt, sigma, "poly_bump"});
        jobs.push_back({IdentityId::CALC_I, u_any, std::nullopt, sigma, "gaussian"});
        jobs.push_back({IdentityId::CALC_II, &bump_any, std::nullopt, sigma, "poly_bump"});
        jobs.push_back({IdentityId::AFFINE_DUALITY, u_n1, fields::constant<N>(1.0), sigma,
                        needs_inside ? "bump_in x 1" : "gaussian x 1"});
        jobs.push_back({IdentityId::AFFINE_DUALITY, u_n1, fields::coordinate<N>(0), sigma,
                        needs_inside ? "bump_in x x1" : "gaussian x x1"});
        jobs.push_back({IdentityId::SPLITTING, u_n1, std::nullopt, sigma,
                        needs_inside ? "bump_in" : "gaussian"});
        jobs.push_back({IdentityId::GREEN, needs_inside ? &bump_in2 : u_n1, v_green, sigma,
                        needs_inside ? "bump_in2, bump" : "gaussian, bump"});
        jobs.push_back({IdentityId::FACTORIZATION, u_any, std::nullopt, sigma, "gaussian"});
    }

    std::vector<BatteryItem> items(jobs.size());
    blocked_reduce<std::vector<std::pair<std::size_t, BatteryItem>>>(
        jobs.size(), 1, cfg.threads,
        [&](std::size_t lo, std::size_t hi) {
            std::vector<std::pair<std::size_t, BatteryItem>> out;
            for (std::size_t i = lo; i < hi; ++i) {
                const Job& j = jobs[i];
                auto params = make_params(N, j.sigma);
                BatteryItem item;
                item.id = j.id;
                item.sigma = j.sigma;
                item.field_name = j.name;
                item.report = verify_identity<N>(j.id, *j.u, j.v ? &*j.v : nullptr, omega,
                                                 params, cfg.q, cfg.opt);
                out.emplace_back(i, std::move(item));
            }
            return out;
        },
        [&](std::vector<std::pair<std::size_t, BatteryItem>>&& blk) {
            for (auto& [i, item] : blk) items[i] = std::move(item);
        });
    return items;
}

inline std::string battery_summary(const std::vector<BatteryItem>& items) {
    std::ostringstream os;
    for (const auto& it : items) {
        os << (it.report.pass ? "[pass] " : "[FAIL] ") << identity_name(it.id) << " sigma="
           << it.sigma << " field=" << it.field_name << " rel_gap=" << it.report.rel_gap
           << " trace=";
        for (double t : it.report.refinement_trace) os << t << " ";
        os << "\n";
    }
    return os.str();
}

}  // namespace fnl
