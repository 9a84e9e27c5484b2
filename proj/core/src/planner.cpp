#include "capax/planner.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include <fmt/format.h>

#include "capax/dynamics.hpp"
#include "capax/equilibrium.hpp"
#include "capax/errors.hpp"
#include "capax/solver1d.hpp"

namespace capax {

namespace {

struct SolvedPath {
    Equilibrium eq;
    EffectiveMarket market;
    Trajectory traj;
};

SolvedPath solve_path(const MarketParams& params, const SubsidyScheme& scheme, double y0,
                      const PlannerConfig& config) {
    SolvedPath out;
    out.eq = kstar_competitive(params, scheme, y0);
    if (config.k0 > out.eq.k_star * (1.0 + 1e-12)) {
        throw Error(ErrorKind::InvalidArgument,
                    fmt::format("k0 = {:.6g} MW lies above k* = {:.6g} MW", config.k0, out.eq.k_star));
    }
    out.market = effective_market(params, scheme, y0);
    const ValueFunction1D value = solve_master_1d(
        out.market, MarginFunction::competitive(out.market), out.eq.k_star, config.n_grid);
    out.traj = simulate_capacity(value, std::min(config.k0, out.eq.k_star),
                                 quadrature_horizon(params, config), config.dt);
    return out;
}

}  // namespace

void validate(const PlannerConfig& config) {
    if (!(config.mu >= 0.0)) throw Error(ErrorKind::InvalidArgument, "mu must be >= 0");
    if (!(config.k_bar > 0.0)) throw Error(ErrorKind::InvalidArgument, "k_bar must be > 0");
    if (!(config.k0 >= 0.0)) throw Error(ErrorKind::InvalidArgument, "k0 must be >= 0");
    if (!(config.dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "dt must be > 0");
    if (!(config.horizon >= 0.0)) throw Error(ErrorKind::InvalidArgument, "horizon must be >= 0");
    if (config.scan_points < 3) throw Error(ErrorKind::InvalidArgument, "scan_points must be >= 3");
    if (!(config.tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "tol must be > 0");
    if (config.lower && config.upper && !(*config.lower < *config.upper)) {
        throw Error(ErrorKind::InvalidArgument, "optimizer bracket must satisfy lower < upper");
    }
}

double quadrature_horizon(const MarketParams& params, const PlannerConfig& config) {
    if (config.horizon > 0.0) return config.horizon;
    return std::ceil(std::log(1e6) / params.r);
}

PlannerCost planner_cost_constant(const MarketParams& params, double y0,
                                  const ConstantSubsidy& subsidy, const PlannerConfig& config) {
    validate(config);
    const SolvedPath path = solve_path(params, subsidy, y0, config);
    const double r = params.r;
    const double delta = params.delta;
    const double k0 = config.k0;
    const double cs = cbar_sub(params, subsidy);

    const double int_k =
        discounted_integral(path.traj, r, [](const TrajectorySample& s) { return s.k; });
    const double int_s = discounted_integral(path.traj, r, [&](const TrajectorySample& s) {
        return s.k - k0 * std::exp(-delta * s.t);
    });
    const double int_flow =
        discounted_integral(path.traj, r, [](const TrajectorySample& s) { return s.flow; });

    PlannerCost out;
    out.cbar_sub = cs;
    out.k_star = path.eq.k_star;
    out.tracking = config.mu * (path.eq.k_star - config.k_bar) * (path.eq.k_star - config.k_bar);
    out.spend = cs * int_k - k0 * cs / params.rate();
    out.spend_bis = cs * int_s;
    out.spend_flow = subsidy.alpha_sub * int_flow + params.h * subsidy.c_sub * int_s;
    return out;
}

PlannerCost planner_cost_constant(const MarketParams& params, double y0, double cbar_sub,
                                  const PlannerConfig& config) {
    return planner_cost_constant(params, y0, ConstantSubsidy{0.0, cbar_sub / params.h}, config);
}

ConstantOptimum optimize_constant_subsidy(const MarketParams& params, double y0,
                                          const PlannerConfig& config) {
    validate(config);
    const ReserveModel reserve = FixedReserve{y0};
    const double lower = config.lower.value_or(
        std::max(0.0, subsidy_for_target(params, config.k0, reserve)));
    const double upper =
        config.upper.value_or(1.1 * subsidy_for_target(params, config.k_bar, reserve));
    if (!(lower < upper)) {
        throw Error(ErrorKind::InvalidArgument,
                    fmt::format("empty subsidy bracket [{:.6g}, {:.6g}]", lower, upper));
    }

    // Evaluations are cached on a grid far finer than the tolerance; golden section revisits
    // its interior points.
    std::map<long long, PlannerCost> cache;
    const double key_step = config.tol * 1e-3;
    auto evaluate = [&](double x) -> const PlannerCost& {
        const long long key = std::llround(x / key_step);
        auto it = cache.find(key);
        if (it == cache.end()) {
            it = cache.emplace(key, planner_cost_constant(params, y0, x, config)).first;
        }
        return it->second;
    };

    const std::size_t n = config.scan_points;
    std::vector<double> xs(n);
    std::vector<double> fs(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = lower + (upper - lower) * static_cast<double>(i) / static_cast<double>(n - 1);
        fs[i] = evaluate(xs[i]).total();
    }
    const std::size_t best =
        static_cast<std::size_t>(std::min_element(fs.begin(), fs.end()) - fs.begin());

    std::size_t minima = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const bool left = i == 0 || fs[i] < fs[i - 1];
        const bool right = i + 1 == n || fs[i] <= fs[i + 1];
        if (left && right) ++minima;
    }

    double a = xs[best == 0 ? 0 : best - 1];
    double b = xs[std::min(best + 1, n - 1)];
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = evaluate(c).total();
    double fd = evaluate(d).total();
    while (b - a > config.tol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = evaluate(c).total();
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = evaluate(d).total();
        }
    }

    ConstantOptimum out;
    out.lower = lower;
    out.upper = upper;
    out.non_unimodal = minima > 1;
    for (const auto& [key, cost] : cache) out.evaluations.push_back(cost);
    const auto argmin = std::min_element(
        out.evaluations.begin(), out.evaluations.end(),
        [](const PlannerCost& x, const PlannerCost& y) { return x.total() < y.total(); });
    out.cbar_sub = argmin->cbar_sub;
    out.k_star = argmin->k_star;
    out.objective = argmin->total();
    return out;
}

AffineCost planner_cost_affine(const MarketParams& params, double y0, double c1_sub,
                               double cbar2_sub, const PlannerConfig& config) {
    validate(config);
    const AffineSubsidy scheme{0.0, c1_sub, cbar2_sub / params.h};
    const SolvedPath path = solve_path(params, scheme, y0, config);
    const double r = params.r;
    const double delta = params.delta;
    const double k0 = config.k0;
    const double eps_eff = params.eps + y0;

    auto path_gap = [&](const TrajectorySample& s) { return s.k - k0 * std::exp(-delta * s.t); };
    const double int_s = discounted_integral(path.traj, r, path_gap);
    const double int_share = discounted_integral(path.traj, r, [&](const TrajectorySample& s) {
        return path_gap(s) / (s.k + eps_eff);
    });

    AffineCost out;
    out.c1_sub = c1_sub;
    out.cbar2_sub = cbar2_sub;
    out.k_star = path.eq.k_star;
    out.tracking = config.mu * (path.eq.k_star - config.k_bar) * (path.eq.k_star - config.k_bar);
    out.spend_constant = cbar2_sub * int_s;
    out.spend_indexed = params.h * c1_sub * int_share;
    for (std::size_t i = 0; i < path.traj.size(); ++i) {
        const TrajectorySample s = path.traj.sample(i);
        out.max_share = std::max(out.max_share, path_gap(s) / (s.k + eps_eff));
    }
    return out;
}

std::vector<AffineCost> target_line_sweep(const MarketParams& params, double y0,
                                          const PlannerConfig& config, std::size_t points) {
    validate(config);
    if (points == 0) throw Error(ErrorKind::InvalidArgument, "sweep needs at least one point");
    const double top = subsidy_for_target(params, config.k_bar, FixedReserve{y0});
    if (!(top > 0.0)) {
        throw Error(ErrorKind::TargetUnreachable,
                    "target is reached without subsidy; the price-indexed line is empty");
    }
    std::vector<AffineCost> out;
    out.reserve(points);
    for (std::size_t i = 0; i < points; ++i) {
        const double cbar2 = top * static_cast<double>(i) / static_cast<double>(points);
        const double c1 = c1_for_target(params, config.k_bar, y0, cbar2);
        out.push_back(planner_cost_affine(params, y0, c1, cbar2, config));
    }
    return out;
}

AffineCost optimize_affine_subsidy(const MarketParams& params, double y0,
                                   const PlannerConfig& config, std::size_t points) {
    const std::vector<AffineCost> sweep = target_line_sweep(params, y0, config, points);
    return *std::min_element(sweep.begin(), sweep.end(), [](const AffineCost& x, const AffineCost& y) {
        return x.spend() < y.spend();
    });
}

SubsidySeries time_varying_subsidy_report(const MarketParams& params, double y0, double c1_sub,
                                          double cbar2_sub, const PlannerConfig& config,
                                          double horizon) {
    PlannerConfig display = config;
    display.horizon = horizon;
    validate(display);
    const AffineSubsidy scheme{0.0, c1_sub, cbar2_sub / params.h};
    const SolvedPath path = solve_path(params, scheme, y0, display);
    const double eps_eff = params.eps + y0;

    SubsidySeries out;
    out.t = path.traj.t;
    out.value.reserve(path.traj.size());
    for (double k : path.traj.k) out.value.push_back(c1_sub / (k + eps_eff));
    out.limit = c1_sub / (path.eq.k_star + eps_eff);
    return out;
}

void write_csv(std::ostream& out, const ConstantOptimum& optimum) {
    out << "cbar_sub,k_star_mw,tracking_eur,spend_eur,total_eur\n";
    for (const PlannerCost& e : optimum.evaluations) {
        out << fmt::format("{:.12g},{:.12g},{:.12g},{:.12g},{:.12g}\n", e.cbar_sub, e.k_star,
                           e.tracking, e.spend, e.total());
    }
}

void write_csv(std::ostream& out, const std::vector<AffineCost>& sweep) {
    out << "c1_sub_eur_per_h,cbar2_sub,k_star_mw,spend_constant_eur,spend_indexed_eur,spend_eur\n";
    for (const AffineCost& e : sweep) {
        out << fmt::format("{:.12g},{:.12g},{:.12g},{:.12g},{:.12g},{:.12g}\n", e.c1_sub,
                           e.cbar2_sub, e.k_star, e.spend_constant, e.spend_indexed, e.spend());
    }
}

}  // namespace capax
