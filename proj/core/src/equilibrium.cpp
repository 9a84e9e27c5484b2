#include "capax/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "capax/errors.hpp"
#include "capax/roots.hpp"

namespace capax {

namespace {

constexpr double kSameRateTol = 1e-8;

void require_positive_target(double k_bar) {
    if (!(k_bar > 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "target capacity must be > 0");
    }
}

// Positive root of δk² + (δε + Λ)k + Λε - λhp/(r+δ), Λ = λc̄/(r+δ), given c̄ε ≤ hp.
double competitive_root(double delta, double lambda, double rate, double eps, double p_h,
                        double cbar) {
    const double big_lambda = lambda * cbar / rate;
    const double b = delta * eps + big_lambda;
    const double neg_c = lambda * (p_h - eps * cbar) / rate;  // -constant term, >= 0
    const double diff = delta * eps - big_lambda;
    const double sq = std::sqrt(diff * diff + 4.0 * delta * lambda * p_h / rate);
    if (b > 0.0) return 2.0 * neg_c / (b + sq);
    return (-b + sq) / (2.0 * delta);
}

double poly3_fixed(double k, double delta, double lambda, double rate, double eps, double p_h,
                   double cbar) {
    const double big_lambda = lambda * cbar / rate;
    const double c3 = delta;
    const double c2 = 2.0 * eps * delta + big_lambda;
    const double c1 = delta * eps * eps + 2.0 * eps * big_lambda;
    const double c0 = eps * lambda * (cbar * eps - p_h) / rate;
    return ((c3 * k + c2) * k + c1) * k + c0;
}

}  // namespace

std::string_view to_string(Regime regime) {
    switch (regime) {
        case Regime::CompetitiveFixed: return "competitive-fixed";
        case Regime::MonopolyFixed: return "monopoly-fixed";
        case Regime::CompetitiveLinear: return "competitive-linear";
        case Regime::MonopolyLinear: return "monopoly-linear";
    }
    return "unknown";
}

std::string_view to_string(Competition competition) {
    return competition == Competition::Competitive ? "competitive" : "monopoly";
}

Equilibrium kstar_competitive(const MarketParams& params, const SubsidyScheme& scheme, double y0) {
    validate(params);
    const EffectiveMarket m = effective_market(params, scheme, y0);
    const double cbar_net = m.cbar();
    const double p_h = m.h * m.p;
    if (cbar_net * m.eps > p_h) {
        throw Error(ErrorKind::InadmissibleParams,
                    "no positive equilibrium: (cbar - cbar_sub) * eps_eff >= h * p_eff");
    }
    const double k = std::max(0.0, competitive_root(m.delta, m.lambda, m.rate(), m.eps, p_h, cbar_net));
    return {k, std::nullopt, m.anchor(k), Regime::CompetitiveFixed};
}

Equilibrium kstar_monopoly(const MarketParams& params, const SubsidyScheme& scheme, double y0) {
    validate(params);
    const EffectiveMarket m = effective_market(params, scheme, y0);
    const double cbar_net = m.cbar();
    const double p_h = m.h * m.p;
    if (cbar_net * m.eps > p_h) {
        throw Error(ErrorKind::InadmissibleParams,
                    "no positive monopoly equilibrium: (cbar - cbar_sub) * eps_eff >= h * p_eff");
    }
    auto poly = [&](double k) {
        return poly3_fixed(k, m.delta, m.lambda, m.rate(), m.eps, p_h, cbar_net);
    };
    double hi = 0.0;
    if (cbar_net > 0.0) {
        hi = p_h / cbar_net - m.eps;
    } else {
        hi = std::max(1.0, m.eps);
        while (poly(hi) <= 0.0 && hi < 1e15) hi *= 2.0;
    }
    const double k = bisect(poly, 0.0, std::max(hi, 0.0));
    return {k, std::nullopt, m.anchor(k), Regime::MonopolyFixed};
}

Equilibrium kstar_general(const MarketParams& params, const SubsidyScheme& scheme, double y0,
                          const CapacityFunction& phi, const CapacityFunction& psi) {
    validate(params);
    const double eps = params.eps + y0;
    const double alpha_net = params.alpha - alpha_sub_of(scheme);
    const double rate = params.rate();
    auto margin = [&](double k) { return params.p / (k + eps) - phi(k) + psi(k); };
    auto g = [&](double k) {
        return (params.delta * k / params.lambda + alpha_net) * rate -
               params.h * std::max(0.0, margin(k));
    };

    // The left side grows linearly while the right side is bounded by h·margin(0).
    double hi = std::max(1.0, eps);
    while (g(hi) <= 0.0) {
        hi *= 2.0;
        if (hi > 1e15) throw Error(ErrorKind::NoBracket, "no crossing found for general margin");
    }

    constexpr int kSamples = 1000;
    double prev = margin(0.0);
    for (int i = 1; i <= kSamples; ++i) {
        const double k = hi * i / kSamples;
        const double cur = margin(k);
        if (cur > prev + 1e-12 * std::max(1.0, std::abs(prev))) {
            throw Error(ErrorKind::NotMonotone,
                        "margin increases near k = " + std::to_string(k) + " MW");
        }
        prev = cur;
    }

    if (g(0.0) > 0.0) {
        throw Error(ErrorKind::InadmissibleParams, "margin at k = 0 does not cover annualized cost");
    }
    const double k = bisect(g, 0.0, hi);
    return {k, std::nullopt, alpha_net + params.delta * k / params.lambda,
            Regime::CompetitiveFixed};
}

Equilibrium kstar_reserve_competitive(const MarketParams& params, const SubsidyScheme& scheme,
                                      const LinearReserve& reserve) {
    validate(params);
    validate(ReserveModel{reserve});
    const EffectiveMarket m = effective_market(params, scheme);
    const double cbar_net = m.cbar();
    const double p_h = m.h * m.p;
    const double ratio = 1.0 - reserve.a / reserve.b;

    double k = 0.0;
    if (std::abs(ratio) < kSameRateTol) {
        const double total = reserve.gamma / reserve.a + m.eps;
        if (cbar_net * total > p_h) {
            throw Error(ErrorKind::InadmissibleParams,
                        "no positive equilibrium: (cbar - cbar_sub)(gamma/a + eps) >= h p");
        }
        k = m.lambda / (m.delta * m.rate()) * (p_h / total - cbar_net);
    } else {
        const double shifted = reserve.gamma / reserve.b + m.eps;
        if (ratio > 0.0) {
            if (cbar_net * shifted > p_h) {
                throw Error(ErrorKind::InadmissibleParams,
                            "no positive equilibrium: (cbar - cbar_sub)(gamma/b + eps) >= h p");
            }
            // Fixed-reserve quadratic with ε -> (γ/b + ε)/(1 - a/b) and p -> p/(1 - a/b).
            const double eps_r = shifted / ratio;
            const double ph_r = p_h / ratio;
            const double big_lambda = m.lambda * cbar_net / m.rate();
            const double a1 = m.delta * eps_r + big_lambda;
            const double a0 = big_lambda * eps_r - m.lambda * ph_r / m.rate();
            const auto root = largest_quadratic_root(m.delta, a1, a0);
            if (!root) throw Error(ErrorKind::InadmissibleParams, "negative discriminant");
            k = std::max(0.0, *root);
        } else {
            // a > b: total supply shrinks along the nullcline and the cleared condition is a
            // concave quadratic. Accept it only with a single sign change on y >= 0.
            const double k_max = reserve.gamma / reserve.a;
            auto q = [&](double kk) {
                return (m.rate() * m.delta * kk / m.lambda + cbar_net) * (shifted + ratio * kk) - p_h;
            };
            if ((q(0.0) > 0.0) == (q(k_max) > 0.0)) {
                throw Error(ErrorKind::InadmissibleParams,
                            "no unique equilibrium with linear reserve on y >= 0");
            }
            k = bisect(q, 0.0, k_max, {1e-15, 0.0, 500});
        }
    }
    const double y = reserve.nullcline(k);
    if (y < 0.0) {
        throw Error(ErrorKind::InadmissibleParams, "equilibrium reserve would be negative");
    }
    return {k, y, m.anchor(k), Regime::CompetitiveLinear};
}

Equilibrium kstar_reserve_monopoly(const MarketParams& params, const SubsidyScheme& scheme,
                                   const LinearReserve& reserve) {
    validate(params);
    validate(ReserveModel{reserve});
    const EffectiveMarket m = effective_market(params, scheme);
    const double cbar_net = m.cbar();
    const double p_h = m.h * m.p;
    const double shifted = reserve.gamma / reserve.b + m.eps;  // ε + γ/b
    if (cbar_net * shifted > p_h) {
        throw Error(ErrorKind::InadmissibleParams,
                    "no positive monopoly equilibrium: (cbar - cbar_sub)(eps + gamma/b) >= h p");
    }
    const Equilibrium upper = kstar_reserve_competitive(params, scheme, reserve);
    const double ratio = 1.0 - reserve.a / reserve.b;

    double k = 0.0;
    if (std::abs(ratio) < kSameRateTol) {
        auto g = [&](double kk) {
            const double y = reserve.nullcline(kk);
            const double total = kk + y + m.eps;
            return m.rate() * m.delta * kk / m.lambda + cbar_net - p_h * (y + m.eps) / (total * total);
        };
        k = bisect(g, 0.0, upper.k_star);
    } else {
        const double big_lambda = m.lambda * cbar_net / m.rate();
        const double s2 = ratio * ratio;
        const double c3 = m.delta;
        const double c2 = 2.0 * shifted * m.delta / ratio + big_lambda;
        const double c1 = m.delta * shifted * shifted / s2 + 2.0 * shifted * big_lambda / ratio +
                          (reserve.a / reserve.b) * p_h * m.lambda / (m.rate() * s2);
        const double c0 = m.lambda * shifted * (cbar_net * shifted - p_h) / (m.rate() * s2);
        auto poly = [&](double kk) { return ((c3 * kk + c2) * kk + c1) * kk + c0; };
        k = bisect(poly, 0.0, upper.k_star);
    }
    return {k, reserve.nullcline(k), m.anchor(k), Regime::MonopolyLinear};
}

Equilibrium equilibrium(const MarketParams& params, const SubsidyScheme& scheme,
                        const ReserveModel& reserve, Competition competition) {
    if (const auto* fixed = std::get_if<FixedReserve>(&reserve)) {
        return competition == Competition::Competitive
                   ? kstar_competitive(params, scheme, fixed->y0)
                   : kstar_monopoly(params, scheme, fixed->y0);
    }
    const auto& lin = std::get<LinearReserve>(reserve);
    return competition == Competition::Competitive
               ? kstar_reserve_competitive(params, scheme, lin)
               : kstar_reserve_monopoly(params, scheme, lin);
}

double subsidy_for_target(const MarketParams& params, double k_bar, const ReserveModel& reserve,
                          Competition competition) {
    validate(params);
    require_positive_target(k_bar);
    const double p_h = params.h * params.p;
    const double stationary_cost = params.rate() * params.delta * k_bar / params.lambda;

    double revenue = 0.0;  // annual margin before production cost at the target
    if (const auto* fixed = std::get_if<FixedReserve>(&reserve)) {
        const double eps = params.eps + fixed->y0;
        revenue = competition == Competition::Competitive
                      ? p_h / (k_bar + eps)
                      : p_h * eps / ((k_bar + eps) * (k_bar + eps));
    } else {
        const auto& lin = std::get<LinearReserve>(reserve);
        const double y = lin.nullcline(k_bar);
        if (y < 0.0) {
            throw Error(ErrorKind::TargetUnreachable,
                        "target requires a negative reserve on the reserve nullcline");
        }
        const double total = k_bar + y + params.eps;
        revenue = competition == Competition::Competitive ? p_h / total
                                                          : p_h * (y + params.eps) / (total * total);
    }
    return cbar(params) - revenue + stationary_cost;
}

double c1_for_target(const MarketParams& params, double k_bar, double y0, double cbar2_sub) {
    validate(params);
    require_positive_target(k_bar);
    const double eps = params.eps + y0;
    const double rhs = (cbar(params) - cbar2_sub) * (k_bar + eps) +
                       params.rate() * params.delta * k_bar * (k_bar + eps) / params.lambda;
    return rhs / params.h - params.p;
}

double stationarity_residual(const MarketParams& params, const SubsidyScheme& scheme,
                             const ReserveModel& reserve, const Equilibrium& eq) {
    const double y_fixed = std::holds_alternative<FixedReserve>(reserve)
                               ? std::get<FixedReserve>(reserve).y0
                               : 0.0;
    const EffectiveMarket m = effective_market(params, scheme, y_fixed);
    const double k = eq.k_star;
    const double u = eq.u_star;

    const double flow = m.lambda * (u - m.alpha);
    double res = std::abs(flow - m.delta * k) /
                 std::max({std::abs(flow), m.delta * k, m.lambda * std::abs(u), 1e-300});

    double y = 0.0;
    if (const auto* lin = std::get_if<LinearReserve>(&reserve)) {
        y = eq.y_star.value_or(0.0);
        const double f = lin->drift(k, y);
        res = std::max(res, std::abs(f) / std::max(lin->a * k + lin->b * y + lin->gamma, 1e-300));
    }
    const double total = k + y + m.eps;
    const bool monopoly =
        eq.regime == Regime::MonopolyFixed || eq.regime == Regime::MonopolyLinear;
    const double margin = monopoly ? m.h * m.p * (y + m.eps) / (total * total) - m.h * m.c
                                   : m.h * std::max(0.0, m.p / total - m.c);
    const double lhs = m.rate() * u;
    res = std::max(res, std::abs(lhs - margin) /
                            std::max({std::abs(lhs), std::abs(margin), 1e-300}));
    return res;
}

}  // namespace capax
