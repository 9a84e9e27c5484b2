#include "capax/params.hpp"

#include <cmath>
#include <sstream>

#include "capax/errors.hpp"

namespace capax {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string describe(double lhs, const char* op, double rhs) {
    std::ostringstream os;
    os.precision(10);
    os << lhs << ' ' << op << ' ' << rhs;
    return os.str();
}

}  // namespace

EffectiveMarket effective_market(const MarketParams& params, const SubsidyScheme& scheme,
                                 double fixed_reserve) {
    EffectiveMarket m;
    m.r = params.r;
    m.delta = params.delta;
    m.lambda = params.lambda;
    m.h = params.h;
    m.eps = params.eps + fixed_reserve;
    std::visit(overloaded{
                   [&](const ConstantSubsidy& s) {
                       m.p = params.p;
                       m.alpha = params.alpha - s.alpha_sub;
                       m.c = params.c - s.c_sub;
                   },
                   [&](const AffineSubsidy& s) {
                       m.p = params.p + s.c1_sub;
                       m.alpha = params.alpha - s.alpha_sub;
                       m.c = params.c - s.c2_sub;
                   },
               },
               scheme);
    return m;
}

double cbar(const MarketParams& params) {
    return params.h * params.c + params.rate() * params.alpha;
}

double cbar_sub(const MarketParams& params, const SubsidyScheme& scheme) {
    return std::visit(overloaded{
                          [&](const ConstantSubsidy& s) {
                              return params.h * s.c_sub + params.rate() * s.alpha_sub;
                          },
                          [&](const AffineSubsidy& s) {
                              return params.h * s.c2_sub + params.rate() * s.alpha_sub;
                          },
                      },
                      scheme);
}

double alpha_sub_of(const SubsidyScheme& scheme) {
    return std::visit([](const auto& s) { return s.alpha_sub; }, scheme);
}

void validate(const MarketParams& params) {
    const auto require_positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw Error(ErrorKind::InvalidArgument, std::string(name) + " must be > 0");
        }
    };
    require_positive(params.r, "r");
    require_positive(params.delta, "delta");
    require_positive(params.lambda, "lambda");
    require_positive(params.eps, "eps");
    require_positive(params.h, "h");
    require_positive(params.p, "p");
    if (!(params.alpha >= 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "alpha must be >= 0");
    }
    if (!std::isfinite(params.c)) {
        throw Error(ErrorKind::InvalidArgument, "c must be finite");
    }
}

void validate(const ReserveModel& reserve) {
    std::visit(overloaded{
                   [](const FixedReserve& f) {
                       if (!(f.y0 >= 0.0)) {
                           throw Error(ErrorKind::InvalidArgument, "fixed reserve y0 must be >= 0");
                       }
                   },
                   [](const LinearReserve& l) {
                       if (!(l.a > 0.0 && l.b > 0.0 && l.gamma > 0.0)) {
                           throw Error(ErrorKind::InvalidArgument,
                                       "linear reserve requires a, b, gamma > 0");
                       }
                   },
               },
               reserve);
}

bool AdmissibilityReport::all_passed() const {
    for (const auto& c : checks) {
        if (!c.passed) return false;
    }
    return true;
}

const AdmissibilityCheck* AdmissibilityReport::find(const std::string& name) const {
    for (const auto& c : checks) {
        if (c.name == name) return &c;
    }
    return nullptr;
}

AdmissibilityReport check_admissibility(const MarketParams& params, const SubsidyScheme& scheme,
                                        const ReserveModel& reserve, std::optional<double> y_max) {
    AdmissibilityReport report;
    auto add = [&](std::string name, bool passed, std::string detail) {
        report.checks.push_back({std::move(name), passed, std::move(detail)});
    };

    const bool market_ok = params.r > 0 && params.delta > 0 && params.lambda > 0 &&
                           params.eps > 0 && params.h > 0 && params.p > 0;
    add("market_positive", market_ok, "r, delta, lambda, eps, h, p > 0");
    add("installation_cost_nonnegative", params.alpha >= 0.0, describe(params.alpha, ">=", 0.0));

    const double a_sub = alpha_sub_of(scheme);
    add("installation_subsidy_bound", params.alpha - a_sub >= 0.0,
        describe(a_sub, "<=", params.alpha));

    if (const auto* affine = std::get_if<AffineSubsidy>(&scheme)) {
        add("price_indexed_subsidy_positive", affine->c1_sub > 0.0,
            describe(affine->c1_sub, ">", 0.0));
    }

    if (const auto* fixed = std::get_if<FixedReserve>(&reserve)) {
        add("reserve_valid", fixed->y0 >= 0.0, describe(fixed->y0, ">=", 0.0));
        const EffectiveMarket m = effective_market(params, scheme, fixed->y0);
        const double lhs = m.cbar() * m.eps;
        const double rhs = m.h * m.p;
        add("cost_below_remuneration", lhs < rhs, describe(lhs, "<", rhs));
    } else {
        const auto& lin = std::get<LinearReserve>(reserve);
        add("reserve_valid", lin.a > 0 && lin.b > 0 && lin.gamma > 0, "a, b, gamma > 0");
        const EffectiveMarket m = effective_market(params, scheme);
        const double cnet = m.cbar();
        const double hp = m.h * m.p;
        if (lin.b > 0.0 && lin.a > 0.0) {
            const double ratio = 1.0 - lin.a / lin.b;
            const double shifted = lin.gamma / lin.b + m.eps;
            bool exists = false;
            std::string detail;
            if (std::abs(ratio) < 1e-8) {
                exists = cnet * (lin.gamma / lin.a + m.eps) < hp;
                detail = describe(cnet * (lin.gamma / lin.a + m.eps), "<", hp);
            } else {
                const double v = (cnet * shifted - hp) / ratio;
                exists = v < 0.0;
                detail = describe(v, "<", 0.0);
            }
            add("reserve_equilibrium_exists", exists, detail);
            const double ym = y_max.value_or(lin.gamma / lin.b);
            const double bound = cnet > 0.0 ? hp / cnet - m.eps : INFINITY;
            add("reserve_domain_bound", ym <= bound, describe(ym, "<=", bound));
        }
    }
    return report;
}

}  // namespace capax
