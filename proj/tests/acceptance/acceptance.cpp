// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "capax/dynamics.hpp"
#include "capax/equilibrium.hpp"
#include "capax/errors.hpp"
#include "capax/planner.hpp"
#include "capax/solver1d.hpp"
#include "capax/solver2d.hpp"
#include "test_support.hpp"

namespace {

using namespace capax;
using testing::annual_subsidy;
using testing::kReferenceReserve;
using testing::kReferenceStart;
using testing::kReferenceTarget;
using testing::reference_market;

struct Outcome {
    bool pass = true;
    std::vector<std::string> notes;

    void check(bool ok, std::string note) {
        pass = pass && ok;
        notes.push_back((ok ? "" : "[x] ") + std::move(note));
    }
};

PlannerConfig reference_planner() {
    PlannerConfig cfg;
    cfg.mu = 1000.0;
    cfg.k_bar = kReferenceTarget;
    cfg.k0 = kReferenceStart;
    return cfg;
}

double sample_at(const Trajectory& traj, double t) {
    const auto it = std::lower_bound(traj.t.begin(), traj.t.end(), t - 1e-9);
    return traj.k[static_cast<std::size_t>(it - traj.t.begin())];
}

// Observed order from three levels h, h/2, h/4.
double observed_order(double coarse, double mid, double fine) {
    return std::log2(std::abs(coarse - mid) / std::abs(mid - fine));
}

struct Reserve2D {
    MarketParams market;
    LinearReserve reserve;
    double cbar_sub = 0.0;
    Problem2D problem;
    Equilibrium eq;
};

Reserve2D reserve_case(double a) {
    Reserve2D c;
    c.market = reference_market();
    c.reserve = LinearReserve{a, 1.0, 130e3};
    c.cbar_sub = subsidy_for_target(c.market, kReferenceTarget, c.reserve);
    const SubsidyScheme s = annual_subsidy(c.market, c.cbar_sub);
    c.problem = make_problem_2d(c.market, s, c.reserve, Competition::Competitive);
    c.eq = kstar_reserve_competitive(c.market, s, c.reserve);
    return c;
}

ValueFunction2D solve_rectangle(const Reserve2D& c, double k_lo, double y_hi, std::size_t n) {
    const Grid2D grid = equilibrium_rectangle(c.eq, k_lo, y_hi, n, n);
    return solve_master_2d(c.problem, grid, constant_guess(grid, c.problem.market.anchor(c.eq.k_star)));
}

Outcome criterion_1() {
    Outcome o;
    const double value = cbar(reference_market());
    o.check(std::abs(value - 282040.6) <= 1.0, fmt::format("cbar = {:.4f} (282,040.6 +/- 1)", value));
    return o;
}

Outcome criterion_2() {
    Outcome o;
    const MarketParams m = reference_market();
    const double cs = subsidy_for_target(m, kReferenceTarget, FixedReserve{kReferenceReserve});
    const double k = kstar_competitive(m, annual_subsidy(m, cs), kReferenceReserve).k_star;
    const double rel = std::abs(k - kReferenceTarget) / kReferenceTarget;
    o.check(rel <= 1e-9, fmt::format("round trip k* = {:.9f} MW, rel err {:.2e} (<= 1e-9)", k, rel));
    const double dev = (cs - 133400.0) / 133400.0;
    o.check(std::abs(dev) <= 0.02, fmt::format("cbar_sub(60 GW) = {:.2f}, {:+.2f}% vs 133,400 (2%)", cs, 100 * dev));
    return o;
}

Outcome criterion_3() {
    Outcome o;
    const MarketParams m = reference_market();
    const auto start = std::chrono::steady_clock::now();
    const ConstantOptimum opt = optimize_constant_subsidy(m, kReferenceReserve, reference_planner());
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const double target = subsidy_for_target(m, kReferenceTarget, FixedReserve{kReferenceReserve});
    const double dc = (opt.cbar_sub - 132500.0) / 132500.0;
    const double dk = (opt.k_star - 59.2e3) / 59.2e3;
    o.check(std::abs(dc) <= 0.02, fmt::format("cbar_sub^ = {:.2f}, {:+.2f}% vs 132,500 (2%)", opt.cbar_sub, 100 * dc));
    o.check(std::abs(dk) <= 0.02, fmt::format("k*(cbar_sub^) = {:.2f} MW, {:+.2f}% vs 59.2 GW (2%)", opt.k_star, 100 * dk));
    o.check(opt.cbar_sub < target, fmt::format("cbar_sub^ < cbar_sub(60 GW) = {:.2f}", target));
    o.check(secs < 60.0, fmt::format("{} evaluations in {:.2f} s (< 60 s)", opt.evaluations.size(), secs));
    return o;
}

Outcome criterion_4() {
    Outcome o;
    const MarketParams m = reference_market();
    const ConstantOptimum opt = optimize_constant_subsidy(m, kReferenceReserve, reference_planner());
    const ValueFunction1D vf = solve_master_1d(m, annual_subsidy(m, opt.cbar_sub), kReferenceReserve,
                                               Competition::Competitive, 4000);
    const Trajectory traj = simulate_capacity(vf, kReferenceStart, 50.0, 0.01);
    const double gain3 = sample_at(traj, 3.0) - kReferenceStart;
    const double gain10 = sample_at(traj, 10.0) - kReferenceStart;
    const double gap50 = vf.k_star() - traj.k.back();
    o.check(gain3 >= 20e3, fmt::format("K_3 - K_0 = {:.1f} MW (>= 20 GW)", gain3));
    o.check(gain10 >= 30e3, fmt::format("K_10 - K_0 = {:.1f} MW (>= 30 GW; k* - K_0 = {:.1f} MW)", gain10,
                                        vf.k_star() - kReferenceStart));
    o.check(gap50 > 0.0 && gap50 >= 1.0 && gap50 <= 10.0,
            fmt::format("k* - K_50 = {:.3e} MW (positive, order 1-10 MW)", gap50));
    return o;
}

Outcome criterion_5() {
    Outcome o;
    std::mt19937_64 rng(5);
    std::size_t violations = 0;
    std::size_t samples = 0;
    std::size_t bound_violations = 0;
    double worst_ratio = 0.0;
    for (int d = 0; d < 50; ++d) {
        const testing::Draw draw = testing::random_draw(rng);
        const ValueFunction1D vf = solve_master_1d(draw.market, annual_subsidy(draw.market, draw.cbar_sub), draw.y0,
                                                   Competition::Competitive, 4000);
        const double L = lipschitz_estimate(vf);
        const double bound = lipschitz_bound(vf.market);
        if (!(L <= bound)) ++bound_violations;
        worst_ratio = std::max(worst_ratio, L / bound);
        const double fast = vf.market.lambda * L + vf.market.delta;
        const double horizon = std::min(std::log(1e6) / fast, 200.0);
        const double dt = std::min(0.01, 0.05 / fast);
        const double k_star = vf.k_star();
        const double k0 = 0.5 * k_star;
        const Trajectory traj = simulate_capacity(vf, k0, horizon, dt);
        for (std::size_t i = 0; i < traj.size(); ++i) {
            const double gap = k_star - traj.k[i];
            const double lower = (k_star - k0) * std::exp(-fast * traj.t[i]);
            const double upper = (k_star - k0) * std::exp(-vf.market.delta * traj.t[i]);
            const double slack = 1e-9 * k_star;
            if (gap < lower - slack || gap > upper + slack) ++violations;
            ++samples;
        }
    }
    o.check(violations == 0, fmt::format("{} envelope violations over {} samples, 50 draws", violations, samples));
    o.check(bound_violations == 0,
            fmt::format("L <= 2hp/(eps_eff^2 delta) on all draws (max L/bound = {:.3e})", worst_ratio));
    return o;
}

Outcome criterion_6() {
    Outcome o;
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::size_t fixed_bad = 0;
    for (int d = 0; d < 200; ++d) {
        const testing::Draw draw = testing::random_draw(rng);
        const SubsidyScheme s = annual_subsidy(draw.market, draw.cbar_sub);
        if (!(kstar_monopoly(draw.market, s, draw.y0).k_star < kstar_competitive(draw.market, s, draw.y0).k_star)) {
            ++fixed_bad;
        }
    }
    std::size_t linear_bad = 0;
    int linear_done = 0;
    while (linear_done < 200) {
        const testing::Draw draw = testing::random_draw(rng);
        const LinearReserve lr{0.2 + 1.8 * u(rng), 0.2 + 1.8 * u(rng), 50e3 + 150e3 * u(rng)};
        const double target = (0.1 + 0.8 * u(rng)) * lr.gamma / lr.a;
        double comp = 0.0;
        double mono = 0.0;
        try {
            const SubsidyScheme s = annual_subsidy(draw.market, subsidy_for_target(draw.market, target, lr));
            comp = kstar_reserve_competitive(draw.market, s, lr).k_star;
            mono = kstar_reserve_monopoly(draw.market, s, lr).k_star;
        } catch (const Error&) {
            continue;  // not admissible for one of the regimes; redraw
        }
        if (!(mono < comp)) ++linear_bad;
        ++linear_done;
    }
    o.check(fixed_bad == 0, fmt::format("fixed reserve: {} violations / 200", fixed_bad));
    o.check(linear_bad == 0, fmt::format("linear reserve: {} violations / 200", linear_bad));
    return o;
}

Outcome criterion_7() {
    Outcome o;
    const MarketParams m = reference_market();
    const double horizon_ref = std::ceil(std::log(1e6) / m.rate());
    const ValueFunction1D ref = solve_master_1d(m, annual_subsidy(m, 132500.0), kReferenceReserve,
                                                Competition::Competitive, 4000);
    const double gap_ref = consistency_check(ref, kReferenceStart, horizon_ref);
    o.check(gap_ref < 5e-3, fmt::format("reference: rel gap {:.3e} (< 5e-3)", gap_ref));
    std::mt19937_64 rng(7);
    double worst = 0.0;
    for (int d = 0; d < 20; ++d) {
        const testing::Draw draw = testing::random_draw(rng);
        const ValueFunction1D vf = solve_master_1d(draw.market, annual_subsidy(draw.market, draw.cbar_sub), draw.y0,
                                                   Competition::Competitive, 4000);
        const double horizon = std::ceil(std::log(1e6) / draw.market.rate());
        worst = std::max(worst, consistency_check(vf, 0.5 * vf.k_star(), horizon));
    }
    o.check(worst < 5e-3, fmt::format("20 draws: worst rel gap {:.3e} (< 5e-3)", worst));
    return o;
}

Outcome criterion_8() {
    Outcome o;
    std::mt19937_64 rng(8);
    double worst = 0.0;
    for (int d = 0; d < 20; ++d) {
        const testing::Draw draw = testing::random_draw(rng);
        PlannerConfig cfg;
        cfg.mu = 1000.0;
        cfg.k_bar = draw.k_star;
        cfg.k0 = 0.5 * draw.k_star;
        const PlannerCost cost = planner_cost_constant(draw.market, draw.y0, draw.cbar_sub, cfg);
        worst = std::max(worst, std::abs(cost.spend - cost.spend_bis) / std::abs(cost.spend));
    }
    o.check(worst < 1e-5, fmt::format("20 draws: worst rel difference {:.3e} (< 1e-5)", worst));
    return o;
}

Outcome criterion_9() {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    const Reserve2D c = reserve_case(1.0);
    const ValueFunction2D vf = solve_rectangle(c, 30e3, 100e3, 201);
    bool decreasing = true;
    for (Eigen::Index j = 0; j < vf.u.cols(); ++j) {
        for (Eigen::Index i = 0; i + 1 < vf.u.rows(); ++i) decreasing = decreasing && vf.u(i, j) > vf.u(i + 1, j);
    }
    const double dominance = check_diagonal_dominance(vf);
    const Trajectory traj = simulate_capacity_2d(vf, 30e3, 100e3, 300.0, 0.01);
    const double gap_k = std::abs(traj.k.back() - c.eq.k_star);
    const double gap_y = std::abs(traj.y.back() - *c.eq.y_star);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    o.check(vf.final_scaled_residual < 1e-8,
            fmt::format("Newton: {} iterations, scaled residual {:.2e} (< 1e-8)", vf.iterations, vf.final_scaled_residual));
    o.check(decreasing, "U strictly decreasing in k");
    o.check(dominance > 0.0, fmt::format("diagonal-dominance margin {:.6f} (> 0)", dominance));
    o.check(gap_k < 300.0, fmt::format("|K_300 - k*| = {:.2f} MW (< 300)", gap_k));
    o.check(gap_y < 300.0, fmt::format("|Y_300 - y*| = {:.2f} MW (< 300)", gap_y));
    o.check(secs < 120.0, fmt::format("cbar - cbar_sub = {:.2f}, {:.1f} s (< 120 s)", cbar(c.market) - c.cbar_sub, secs));
    return o;
}

Outcome criterion_10() {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    const Reserve2D c = reserve_case(2.0 / 3.0);
    const double net = cbar(c.market) - c.cbar_sub;
    const double dev = (net - 129900.0) / 129900.0;
    o.check(std::abs(dev) <= 0.005, fmt::format("cbar - cbar_sub = {:.2f}, {:+.3f}% vs 129,900 (0.5%)", net, 100 * dev));
    o.check(std::abs(*c.eq.y_star - 90e3) <= 1e-6, fmt::format("y* = {:.9f} MW (90 GW)", *c.eq.y_star));
    const double y_hi = std::max(100e3, c.reserve.nullcline(30e3));
    const ValueFunction2D vf = solve_rectangle(c, 30e3, y_hi, 201);
    const Trajectory traj = simulate_capacity_2d(vf, 30e3, 100e3, 50.0, 0.01);
    const double gap_k = std::abs(traj.k.back() - c.eq.k_star);
    const double gap_y = std::abs(traj.y.back() - *c.eq.y_star);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    o.check(gap_k < 50.0, fmt::format("|K_50 - k*| = {:.4f} MW (< 50)", gap_k));
    o.check(gap_y < 50.0, fmt::format("|Y_50 - y*| = {:.4f} MW (< 50)", gap_y));
    o.check(secs < 120.0, fmt::format("Newton {} iterations, {:.1f} s (< 120 s)", vf.iterations, secs));
    return o;
}

Outcome criterion_11() {
    Outcome o;
    const MarketParams m = reference_market();
    const double c1 = c1_for_target(m, kReferenceTarget, kReferenceReserve, 0.0);
    const double dev = (c1 - 5.78e6) / 5.78e6;
    o.check(std::abs(dev) <= 0.01, fmt::format("c1* = {:.2f} EUR/h, {:+.2f}% vs 5.78e6 (1%)", c1, 100 * dev));
    o.check(std::abs(c1 / m.p - 0.89) <= 0.01, fmt::format("c1*/p = {:.6f} (0.89 +/- 0.01)", c1 / m.p));
    const std::vector<AffineCost> line = target_line_sweep(m, kReferenceReserve, reference_planner(), 16);
    std::size_t breaks = 0;
    for (std::size_t i = 0; i + 1 < line.size(); ++i) {
        if (!(line[i].spend() < line[i + 1].spend())) ++breaks;
    }
    o.check(breaks == 0,
            fmt::format("spend decreasing as cbar2 falls: {} of {} steps violate (spend {:.5e} at cbar2 = 0, "
                        "{:.5e} at cbar2 = {:.0f})",
                        breaks, line.size() - 1, line.front().spend(), line.back().spend(), line.back().cbar2_sub));
    return o;
}

Outcome criterion_12() {
    Outcome o;
    const MarketParams m = reference_market();
    auto u1 = [&](std::size_t n) {
        return solve_master_1d(m, annual_subsidy(m, 132500.0), kReferenceReserve, Competition::Competitive, n)(
            kReferenceStart);
    };
    const double order1 = observed_order(u1(1000), u1(2000), u1(4000));
    o.check(order1 >= 0.8 && order1 <= 1.2, fmt::format("1D order at 30 GW: {:.3f} ([0.8, 1.2])", order1));
    const Reserve2D c = reserve_case(1.0);
    auto u2 = [&](std::size_t n) { return solve_rectangle(c, 30e3, 100e3, n)(45e3, 85e3); };
    const double order2 = observed_order(u2(51), u2(101), u2(201));
    o.check(order2 >= 0.8 && order2 <= 1.2, fmt::format("2D order at (45, 85) GW: {:.3f} ([0.8, 1.2])", order2));
    return o;
}

const std::vector<std::function<Outcome()>> kCriteria = {
    criterion_1, criterion_2, criterion_3, criterion_4,  criterion_5,  criterion_6,
    criterion_7, criterion_8, criterion_9, criterion_10, criterion_11, criterion_12,
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"capax acceptance checks"};
    std::vector<int> only;
    app.add_option("--only", only, "criterion numbers to run")->check(CLI::Range(1, static_cast<int>(kCriteria.size())));
    CLI11_PARSE(app, argc, argv);
    if (only.empty()) {
        for (int i = 1; i <= static_cast<int>(kCriteria.size()); ++i) only.push_back(i);
    }

    int failed = 0;
    for (int id : only) {
        const auto start = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = kCriteria[static_cast<std::size_t>(id - 1)]();
        } catch (const std::exception& e) {
            outcome.check(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::string detail;
        for (const std::string& note : outcome.notes) detail += (detail.empty() ? "" : "; ") + note;
        std::cout << fmt::format("criterion {:>2}: {}  ({:.2f} s)  {}\n", id, outcome.pass ? "PASS" : "FAIL", secs,
                                 detail);
        if (!outcome.pass) ++failed;
    }
    return failed == 0 ? 0 : 1;
}
