#include "capax/solver1d.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include <fmt/format.h>

#include "capax/errors.hpp"

namespace capax {

std::string_view to_string(MarginKind kind) {
    switch (kind) {
        case MarginKind::CompetitiveConstant: return "competitive-constant";
        case MarginKind::CompetitiveGeneral: return "competitive-general";
        case MarginKind::Monopoly: return "monopoly";
    }
    return "unknown";
}

double MarginFunction::operator()(double k) const {
    const double v = raw(k);
    return kind == MarginKind::Monopoly ? v : std::max(0.0, v);
}

MarginFunction MarginFunction::competitive(const EffectiveMarket& market) {
    const double h = market.h, p = market.p, eps = market.eps, c = market.c;
    return {MarginKind::CompetitiveConstant, [=](double k) { return h * (p / (k + eps) - c); }};
}

MarginFunction MarginFunction::monopoly(const EffectiveMarket& market) {
    const double h = market.h, p = market.p, eps = market.eps, c = market.c;
    return {MarginKind::Monopoly,
            [=](double k) { return h * p * eps / ((k + eps) * (k + eps)) - h * c; }};
}

MarginFunction MarginFunction::general(const MarketParams& params, double y0,
                                       const CapacityFunction& phi, const CapacityFunction& psi) {
    const double h = params.h, p = params.p, eps = params.eps + y0;
    return {MarginKind::CompetitiveGeneral,
            [=](double k) { return h * (p / (k + eps) - phi(k) + psi(k)); }};
}

double ValueFunction1D::operator()(double capacity) const {
    if (capacity <= k.front()) return u.front();
    if (capacity >= k.back()) return u.back();
    const double pos = (capacity - k.front()) / step();
    const auto i = std::min(static_cast<std::size_t>(pos), k.size() - 2);
    const double w = pos - static_cast<double>(i);
    return (1.0 - w) * u[i] + w * u[i + 1];
}

double ValueFunction1D::flow(double capacity) const {
    return market.lambda * ((*this)(capacity) - market.alpha);
}

ValueFunction1D solve_master_1d(const EffectiveMarket& market, const MarginFunction& margin,
                                double k_star, std::size_t n_grid) {
    if (n_grid < 2) throw Error(ErrorKind::InvalidArgument, "n_grid must be >= 2");
    if (!(k_star > 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "solve domain [0, k*] is empty (k* <= 0)");
    }

    const double lambda = market.lambda;
    const double delta = market.delta;
    const double rate = market.rate();
    const double dk = k_star / static_cast<double>(n_grid);

    ValueFunction1D out;
    out.market = market;
    out.margin = margin;
    out.k.resize(n_grid + 1);
    out.u.resize(n_grid + 1);
    for (std::size_t i = 0; i <= n_grid; ++i) {
        out.k[i] = k_star * static_cast<double>(i) / static_cast<double>(n_grid);
    }

    // March in excess value v = U - α, which keeps the quadratic free of cancellation when
    // α dominates U.
    std::vector<double> v(n_grid + 1);
    v[n_grid] = delta * k_star / lambda;
    for (std::size_t step = n_grid; step-- > 0;) {
        const double ki = out.k[step];
        const double raw = margin.raw(ki);
        if (margin.kind != MarginKind::Monopoly && !(raw > 0.0)) {
            throw Error(ErrorKind::SchemeFailure,
                        fmt::format("margin clipped at k = {:.6g} MW inside [0, k*]", ki));
        }
        const double source = margin(ki) - rate * market.alpha;
        const double next = v[step + 1];
        const double b = -dk * rate + lambda * next + delta * ki;
        const double c = dk * source - delta * ki * next;
        const double disc = b * b + 4.0 * lambda * c;
        if (disc < 0.0) {
            throw Error(ErrorKind::SchemeFailure,
                        fmt::format("negative discriminant at k = {:.6g} MW", ki));
        }
        const double sq = std::sqrt(disc);
        const double vi = b >= 0.0 ? (b + sq) / (2.0 * lambda) : (2.0 * c) / (sq - b);
        if (!(lambda * vi - delta * ki > 0.0)) {
            throw Error(ErrorKind::SchemeFailure,
                        fmt::format("non-positive installation drift at k = {:.6g} MW", ki));
        }
        if (!(vi > next)) {
            throw Error(ErrorKind::MonotonicityViolation,
                        fmt::format("U not decreasing at k = {:.6g} MW", ki));
        }
        v[step] = vi;
    }
    for (std::size_t i = 0; i <= n_grid; ++i) out.u[i] = market.alpha + v[i];
    out.u[n_grid] = market.anchor(k_star);
    return out;
}

ValueFunction1D solve_master_1d(const MarketParams& params, const SubsidyScheme& scheme,
                                double y0, Competition competition, std::size_t n_grid) {
    const EffectiveMarket market = effective_market(params, scheme, y0);
    if (competition == Competition::Competitive) {
        const Equilibrium eq = kstar_competitive(params, scheme, y0);
        return solve_master_1d(market, MarginFunction::competitive(market), eq.k_star, n_grid);
    }
    const Equilibrium eq = kstar_monopoly(params, scheme, y0);
    return solve_master_1d(market, MarginFunction::monopoly(market), eq.k_star, n_grid);
}

double lipschitz_estimate(const ValueFunction1D& value) {
    double best = 0.0;
    for (std::size_t i = 0; i + 1 < value.u.size(); ++i) {
        const double slope = std::abs(value.u[i + 1] - value.u[i]) / (value.k[i + 1] - value.k[i]);
        best = std::max(best, slope);
    }
    return best;
}

double lipschitz_bound(const EffectiveMarket& market) {
    return 2.0 * market.h * market.p / (market.eps * market.eps * market.delta);
}

void write_csv(std::ostream& out, const ValueFunction1D& value) {
    out << "k_mw,u_eur_per_mw\n";
    for (std::size_t i = 0; i < value.k.size(); ++i) {
        out << fmt::format("{:.12g},{:.12g}\n", value.k[i], value.u[i]);
    }
}

}  // namespace capax
