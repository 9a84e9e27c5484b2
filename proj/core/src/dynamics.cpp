#include "capax/dynamics.hpp"

#include <cmath>
#include <ostream>

#include <fmt/format.h>

#include "capax/errors.hpp"
#include "capax/solver2d.hpp"

namespace capax {

namespace {

std::size_t step_count(double horizon, double dt) {
    if (!(horizon > 0.0) || !(dt > 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "horizon and dt must be positive");
    }
    return static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9));
}

// ∫₀ʰ e^{-ρs} s ds, with a series for small ρh where the closed form cancels.
double first_moment(double rate, double h) {
    const double x = rate * h;
    if (x < 1e-3) {
        const double series = x * x / 2 - x * x * x / 3 + x * x * x * x / 8 -
                              x * x * x * x * x / 30 + x * x * x * x * x * x / 144;
        return series / (rate * rate);
    }
    return (1.0 - std::exp(-x) * (1.0 + x)) / (rate * rate);
}

}  // namespace

TrajectorySample Trajectory::sample(std::size_t i) const {
    return {t[i], k[i], has_reserve() ? y[i] : 0.0, price[i], flow[i]};
}

Trajectory simulate_capacity(const ValueFunction1D& value, double k0, double horizon, double dt) {
    const std::size_t n = step_count(horizon, dt);
    const double h = horizon / static_cast<double>(n);
    const double delta = value.market.delta;
    const double k_star = value.k_star();
    const double slack = value.step();
    const double p = value.market.p;
    const double eps = value.market.eps;

    const auto rhs = [&](double cap) { return value.flow(cap) - delta * cap; };
    const auto check = [&](double cap, double t) {
        if (cap < -slack || cap > k_star + slack || !std::isfinite(cap)) {
            throw Error(ErrorKind::StepOutOfDomain,
                        fmt::format("K = {:.6g} MW at t = {:.4g} yr is outside [0, {:.6g}] MW",
                                    cap, t, k_star));
        }
    };
    check(k0, 0.0);

    Trajectory traj;
    traj.t.reserve(n + 1);
    traj.k.reserve(n + 1);
    traj.price.reserve(n + 1);
    traj.flow.reserve(n + 1);
    auto push = [&](double t, double cap) {
        traj.t.push_back(t);
        traj.k.push_back(cap);
        traj.price.push_back(p / (cap + eps));
        traj.flow.push_back(value.flow(cap));
    };

    double cap = k0;
    push(0.0, cap);
    for (std::size_t s = 1; s <= n; ++s) {
        const double k1 = rhs(cap);
        const double k2 = rhs(cap + 0.5 * h * k1);
        const double k3 = rhs(cap + 0.5 * h * k2);
        const double k4 = rhs(cap + h * k3);
        cap += h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
        const double t = h * static_cast<double>(s);
        check(cap, t);
        push(t, cap);
    }
    traj.limit = {INFINITY, k_star, 0.0, p / (k_star + eps), delta * k_star};
    return traj;
}

Trajectory simulate_capacity_2d(const ValueFunction2D& value, double k0, double y0,
                                double horizon, double dt) {
    const std::size_t n = step_count(horizon, dt);
    const double h = horizon / static_cast<double>(n);
    const Grid2D& grid = value.grid;
    const Problem2D& problem = value.problem;
    const double delta = problem.market.delta;
    const double p = problem.market.p;
    const double eps = problem.market.eps;

    const auto check = [&](double cap, double res, double t) {
        const bool inside = cap >= grid.k.front() - grid.dk && cap <= grid.k.back() + grid.dk &&
                            res >= grid.y.front() - grid.dy && res <= grid.y.back() + grid.dy;
        if (!inside || !std::isfinite(cap) || !std::isfinite(res)) {
            throw Error(ErrorKind::StepOutOfDomain,
                        fmt::format("(K, Y) = ({:.6g}, {:.6g}) MW at t = {:.4g} yr is outside "
                                    "the solve rectangle",
                                    cap, res, t));
        }
    };
    check(k0, y0, 0.0);

    struct State {
        double k;
        double y;
    };
    const auto rhs = [&](State s) {
        return State{value.flow(s.k, s.y) - delta * s.k, problem.reserve.drift(s.k, s.y)};
    };

    Trajectory traj;
    for (auto* v : {&traj.t, &traj.k, &traj.y, &traj.price, &traj.flow}) v->reserve(n + 1);
    auto push = [&](double t, State s) {
        traj.t.push_back(t);
        traj.k.push_back(s.k);
        traj.y.push_back(s.y);
        traj.price.push_back(p / (s.k + s.y + eps));
        traj.flow.push_back(value.flow(s.k, s.y));
    };

    State s{k0, y0};
    push(0.0, s);
    for (std::size_t step = 1; step <= n; ++step) {
        const State a = rhs(s);
        const State b = rhs({s.k + 0.5 * h * a.k, s.y + 0.5 * h * a.y});
        const State c = rhs({s.k + 0.5 * h * b.k, s.y + 0.5 * h * b.y});
        const State d = rhs({s.k + h * c.k, s.y + h * c.y});
        s.k += h * (a.k + 2.0 * b.k + 2.0 * c.k + d.k) / 6.0;
        s.y += h * (a.y + 2.0 * b.y + 2.0 * c.y + d.y) / 6.0;
        const double t = h * static_cast<double>(step);
        check(s.k, s.y, t);
        push(t, s);
    }
    const double k_star = grid.k.back();
    const double y_star = grid.y.front();
    traj.limit = {INFINITY, k_star, y_star, p / (k_star + y_star + eps), delta * k_star};
    return traj;
}

double discounted_integral(const Trajectory& traj, double rate, const SampleWeight& weight) {
    if (!(rate > 0.0)) throw Error(ErrorKind::InvalidArgument, "discount rate must be positive");
    if (traj.size() == 0) throw Error(ErrorKind::InvalidArgument, "empty trajectory");
    double total = 0.0;
    double w0 = weight(traj.sample(0));
    for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
        const double w1 = weight(traj.sample(i + 1));
        const double h = traj.t[i + 1] - traj.t[i];
        const double zeroth = -std::expm1(-rate * h) / rate;
        const double first = first_moment(rate, h);
        total += std::exp(-rate * traj.t[i]) * (w0 * zeroth + (w1 - w0) * first / h);
        w0 = w1;
    }
    total += weight(traj.limit) * std::exp(-rate * traj.t.back()) / rate;
    return total;
}

void write_csv(std::ostream& out, const Trajectory& traj) {
    out << "t_years,k_mw,y_mw,price_eur_per_mwh,flow_mw_per_year\n";
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const std::string y = traj.has_reserve() ? fmt::format("{:.12g}", traj.y[i]) : "";
        out << fmt::format("{:.12g},{:.12g},{},{:.12g},{:.12g}\n", traj.t[i], traj.k[i], y,
                           traj.price[i], traj.flow[i]);
    }
}

}  // namespace capax
