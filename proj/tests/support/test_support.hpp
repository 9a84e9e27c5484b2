#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>

#include "capax/equilibrium.hpp"
#include "capax/params.hpp"

namespace capax::testing {

/// Reference market: 3000 h/yr, p = 6.5e6 €/h, 1400 €/kW, 15 €/MWh, 10-year half-life.
inline MarketParams reference_market() {
    MarketParams m;
    m.r = 0.1;
    m.delta = std::log(2.0) / 10.0;
    m.lambda = 5.0;
    m.eps = 0.1;
    m.h = 3000.0;
    m.p = 6.5e6;
    m.alpha = 1400.0 * units::eur_per_kW;
    m.c = 15.0;
    return m;
}

inline constexpr double kReferenceReserve = 70.0 * units::GW;
inline constexpr double kReferenceTarget = 60.0 * units::GW;
inline constexpr double kReferenceStart = 30.0 * units::GW;

/// Whole annual subsidy on production.
inline ConstantSubsidy annual_subsidy(const MarketParams& m, double cbar_sub) {
    return ConstantSubsidy{0.0, cbar_sub / m.h};
}

/// Plain bisection on a sign change; independent of the library's root finder.
inline double oracle_bisect(const std::function<double(double)>& f, double lo, double hi,
                            int iterations = 200) {
    double flo = f(lo);
    if (flo == 0.0) return lo;
    if ((flo > 0.0) == (f(hi) > 0.0)) throw std::logic_error("oracle_bisect: no sign change");
    for (int i = 0; i < iterations; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

/// Stationary excess value condition for the competitive market with a fixed reserve:
/// (r+δ)(α_net + δk/λ) - h(p/(k+ε_eff) - c_net), increasing in k.
inline double competitive_gap(const MarketParams& m, double cbar_net, double eps_eff, double k) {
    const double rate = m.r + m.delta;
    return rate * m.delta * k / m.lambda - (m.h * m.p / (k + eps_eff) - cbar_net);
}

/// Same for the monopoly margin hp ε/(k+ε)² - c̄.
inline double monopoly_gap(const MarketParams& m, double cbar_net, double eps_eff, double k) {
    const double rate = m.r + m.delta;
    return rate * m.delta * k / m.lambda -
           (m.h * m.p * eps_eff / ((k + eps_eff) * (k + eps_eff)) - cbar_net);
}

struct Draw {
    MarketParams market;
    double y0 = 0.0;
    double cbar_sub = 0.0;
    double k_star = 0.0;
};

/// Random market with a fixed reserve whose subsidized competitive equilibrium sits at a random
/// capacity; the subsidy comes from the inversion, c̄_net stays positive.
inline Draw random_draw(std::mt19937_64& rng) {
    auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
    for (;;) {
        Draw d;
        MarketParams& m = d.market;
        m.r = uniform(0.03, 0.15);
        m.delta = uniform(0.03, 0.15);
        m.lambda = uniform(0.5, 10.0);
        m.eps = uniform(0.05, 5.0);
        m.h = uniform(1500.0, 5000.0);
        m.p = uniform(2e6, 1e7);
        m.alpha = uniform(0.0, 2e6);
        m.c = uniform(0.0, 40.0);
        d.y0 = uniform(0.0, 100e3);
        const double target = uniform(5e3, 100e3);
        d.cbar_sub = subsidy_for_target(m, target, FixedReserve{d.y0});
        if (cbar(m) - d.cbar_sub <= 1e3) continue;
        d.k_star = target;
        return d;
    }
}

}  // namespace capax::testing
