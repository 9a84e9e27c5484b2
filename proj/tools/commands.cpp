#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "capax/dynamics.hpp"
#include "capax/errors.hpp"
#include "capax/planner.hpp"
#include "capax/solver1d.hpp"
#include "capax/solver2d.hpp"

namespace capax::cli {

namespace {

std::ofstream open_output(const RunConfig& cfg, const std::string& name) {
    std::filesystem::create_directories(cfg.output_dir);
    const std::filesystem::path path = cfg.output_dir / name;
    std::ofstream file(path);
    if (!file) throw Error(ErrorKind::InvalidArgument, "cannot write " + path.string());
    return file;
}

const LinearReserve& require_linear(const RunConfig& cfg, const char* what) {
    const auto* linear = std::get_if<LinearReserve>(&cfg.reserve);
    if (!linear) throw ConfigError(fmt::format("{} needs [reserve] model = linear", what));
    return *linear;
}

double require_fixed(const RunConfig& cfg, const char* what) {
    if (!std::holds_alternative<FixedReserve>(cfg.reserve)) {
        throw ConfigError(fmt::format("{} needs [reserve] model = fixed", what));
    }
    return cfg.fixed_reserve();
}

std::optional<double> start_capacity(const RunConfig& cfg) {
    if (cfg.numerics.start_k) return cfg.numerics.start_k;
    if (cfg.planner) return cfg.planner->k0;
    return std::nullopt;
}

// Left edge of the 2D rectangle and its top, which must contain the start point and the
// nullcline above the left edge so that the top edge is invariant.
struct Rectangle {
    double k_lo = 0.0;
    double y_hi = 0.0;
};

std::optional<Rectangle> rectangle(const RunConfig& cfg, const LinearReserve& reserve) {
    const std::optional<double> k_lo = cfg.numerics.k_lo ? cfg.numerics.k_lo : start_capacity(cfg);
    if (!k_lo) return std::nullopt;
    double y_hi = cfg.numerics.y_hi.value_or(reserve.nullcline(*k_lo));
    if (!cfg.numerics.y_hi && cfg.numerics.start_y) y_hi = std::max(y_hi, *cfg.numerics.start_y);
    return Rectangle{*k_lo, y_hi};
}

std::string optional_cell(const std::optional<double>& v) {
    return v ? fmt::format("{:.12g}", *v) : std::string();
}

}  // namespace

int cmd_check(const RunConfig& cfg, std::ostream& out) {
    std::optional<double> y_max;
    if (const auto* linear = std::get_if<LinearReserve>(&cfg.reserve)) {
        if (const auto rect = rectangle(cfg, *linear)) y_max = rect->y_hi;
    }
    const AdmissibilityReport report = check_admissibility(cfg.market, cfg.scheme, cfg.reserve, y_max);
    for (const AdmissibilityCheck& c : report.checks) {
        out << fmt::format("{} {}: {}\n", c.passed ? "PASS" : "FAIL", c.name, c.detail);
    }
    return report.all_passed() ? kExitOk : kExitFailure;
}

int cmd_equilibrium(const RunConfig& cfg, const EquilibriumOptions& options, std::ostream& out) {
    const Competition competition = options.regime.value_or(cfg.competition);
    const bool linear = std::holds_alternative<LinearReserve>(cfg.reserve);
    if (options.reserve && (*options.reserve == ReserveKind::Linear) != linear) {
        throw ConfigError(fmt::format("--reserve {} does not match the configured reserve model",
                                      *options.reserve == ReserveKind::Linear ? "linear" : "fixed"));
    }
    const Equilibrium eq = equilibrium(cfg.market, cfg.scheme, cfg.reserve, competition);
    const double cb = cbar(cfg.market);
    const double cs = cbar_sub(cfg.market, cfg.scheme);

    out << fmt::format("regime     {}\n", to_string(eq.regime));
    out << fmt::format("k*         {:.6f} MW\n", eq.k_star);
    if (eq.y_star) out << fmt::format("y*         {:.6f} MW\n", *eq.y_star);
    out << fmt::format("u*         {:.6f} EUR/MW\n", eq.u_star);
    out << fmt::format("cbar       {:.6f} EUR/(MW yr)\n", cb);
    out << fmt::format("cbar_sub   {:.6f} EUR/(MW yr)\n", cs);
    out << fmt::format("cbar_net   {:.6f} EUR/(MW yr)\n", cb - cs);
    if (const auto* affine = std::get_if<AffineSubsidy>(&cfg.scheme)) {
        out << fmt::format("c1_sub     {:.6f} EUR/h ({:.6f} of p)\n", affine->c1_sub,
                           affine->c1_sub / cfg.market.p);
    }

    std::ofstream csv = open_output(cfg, "equilibrium.csv");
    csv << "regime,k_star_mw,y_star_mw,u_star_eur_per_mw,cbar,cbar_sub\n";
    csv << fmt::format("{},{:.12g},{},{:.12g},{:.12g},{:.12g}\n", to_string(eq.regime), eq.k_star,
                       optional_cell(eq.y_star), eq.u_star, cb, cs);
    return kExitOk;
}

int cmd_solve_simulate(const RunConfig& cfg, const SimulateOptions& options, std::ostream& out) {
    const bool linear = std::holds_alternative<LinearReserve>(cfg.reserve);
    const int dim = options.dim.value_or(linear ? 2 : 1);
    const double horizon = options.horizon.value_or(cfg.numerics.horizon);
    if (dim != 1 && dim != 2) throw ConfigError("--dim must be 1 or 2");
    if (!(horizon > 0.0)) throw ConfigError("--horizon must be > 0");

    if (dim == 1) {
        const double y0 = require_fixed(cfg, "a 1D solve");
        const ValueFunction1D value =
            solve_master_1d(cfg.market, cfg.scheme, y0, cfg.competition, cfg.numerics.n_grid);
        const double k0 = start_capacity(cfg).value_or(0.0);
        const Trajectory traj = simulate_capacity(value, k0, horizon, cfg.numerics.dt);
        {
            std::ofstream csv = open_output(cfg, "value_function.csv");
            write_csv(csv, value);
        }
        {
            std::ofstream csv = open_output(cfg, "trajectory.csv");
            write_csv(csv, traj);
        }
        out << fmt::format("k*          {:.6f} MW\n", value.k_star());
        out << fmt::format("K_0         {:.6f} MW\n", k0);
        out << fmt::format("K_T         {:.6f} MW (T = {:g} yr)\n", traj.k.back(), horizon);
        out << fmt::format("K_T - k*    {:.6g} MW\n", traj.k.back() - value.k_star());
        return kExitOk;
    }

    const LinearReserve& reserve = require_linear(cfg, "a 2D solve");
    const auto rect = rectangle(cfg, reserve);
    if (!rect) throw ConfigError("a 2D solve needs [numerics] k_lo or start_k");
    const Equilibrium eq = equilibrium(cfg.market, cfg.scheme, cfg.reserve, cfg.competition);
    const Problem2D problem = make_problem_2d(cfg.market, cfg.scheme, reserve, cfg.competition);
    const Grid2D grid =
        equilibrium_rectangle(eq, rect->k_lo, rect->y_hi, cfg.numerics.nk, cfg.numerics.ny);
    NewtonOptions newton;
    newton.tol = cfg.numerics.newton_tol;
    newton.max_iterations = cfg.numerics.max_iterations;
    const ValueFunction2D value = solve_master_2d(problem, grid, constant_guess(grid, eq.u_star), newton);
    const double k0 = cfg.numerics.start_k.value_or(rect->k_lo);
    const double y0 = cfg.numerics.start_y.value_or(rect->y_hi);
    const Trajectory traj = simulate_capacity_2d(value, k0, y0, horizon, cfg.numerics.dt);
    {
        std::ofstream csv = open_output(cfg, "value_function.csv");
        write_csv(csv, value);
    }
    {
        std::ofstream csv = open_output(cfg, "trajectory.csv");
        write_csv(csv, traj);
    }
    out << fmt::format("rectangle   [{:.6g}, {:.6g}] x [{:.6g}, {:.6g}] MW, {} x {} nodes\n",
                       grid.k.front(), grid.k.back(), grid.y.front(), grid.y.back(), grid.nk(),
                       grid.ny());
    out << fmt::format("newton      {} iterations, scaled residual {:.3e}\n", value.iterations,
                       value.final_scaled_residual);
    out << fmt::format("dominance   {:.6g}\n", check_diagonal_dominance(value));
    out << fmt::format("k*, y*      {:.6f}, {:.6f} MW\n", eq.k_star, *eq.y_star);
    out << fmt::format("K_T - k*    {:.6g} MW (T = {:g} yr)\n", traj.k.back() - eq.k_star, horizon);
    out << fmt::format("Y_T - y*    {:.6g} MW\n", traj.y.back() - *eq.y_star);
    return kExitOk;
}

int cmd_optimize(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    if (!cfg.planner) throw ConfigError("optimize needs a [planner] section");
    const PlannerConfig& pc = *cfg.planner;
    const double y0 = require_fixed(cfg, "optimize");

    if (cfg.planner_mode == PlannerMode::Constant) {
        const ConstantOptimum opt = optimize_constant_subsidy(cfg.market, y0, pc);
        const double target = subsidy_for_target(cfg.market, pc.k_bar, FixedReserve{y0});
        {
            std::ofstream csv = open_output(cfg, "optimizer.csv");
            write_csv(csv, opt);
        }
        if (opt.non_unimodal) err << "warning: objective scan shows several local minima\n";
        out << fmt::format("cbar_sub*        {:.6f} EUR/(MW yr)\n", opt.cbar_sub);
        out << fmt::format("k*(cbar_sub*)    {:.6f} MW\n", opt.k_star);
        out << fmt::format("gap to target    {:.6f} MW\n", pc.k_bar - opt.k_star);
        out << fmt::format("objective        {:.6e} EUR\n", opt.objective);
        out << fmt::format("target subsidy   {:.6f} EUR/(MW yr)\n", target);
        out << fmt::format("evaluations      {}\n", opt.evaluations.size());
        return kExitOk;
    }

    const std::vector<AffineCost> line = target_line_sweep(cfg.market, y0, pc, cfg.line_points);
    {
        std::ofstream csv = open_output(cfg, "affine_line.csv");
        write_csv(csv, line);
    }
    const AffineCost& indexed_only = line.front();
    const AffineCost& best = *std::min_element(
        line.begin(), line.end(), [](const AffineCost& a, const AffineCost& b) { return a.spend() < b.spend(); });
    const SubsidySeries series = time_varying_subsidy_report(cfg.market, y0, indexed_only.c1_sub, 0.0,
                                                             pc, cfg.numerics.horizon);
    {
        std::ofstream csv = open_output(cfg, "subsidy_series.csv");
        csv << "t_years,subsidy_eur_per_mwh\n";
        for (std::size_t i = 0; i < series.t.size(); ++i) {
            csv << fmt::format("{:.12g},{:.12g}\n", series.t[i], series.value[i]);
        }
    }
    out << fmt::format("c1* (cbar2 = 0)  {:.6f} EUR/h ({:.6f} of p)\n", indexed_only.c1_sub,
                       indexed_only.c1_sub / cfg.market.p);
    out << fmt::format("spend            {:.6e} EUR\n", indexed_only.spend());
    out << fmt::format("cheapest point   c1 = {:.6f} EUR/h, cbar2 = {:.6f} EUR/(MW yr), spend {:.6e} EUR\n",
                       best.c1_sub, best.cbar2_sub, best.spend());
    out << fmt::format("subsidy limit    {:.6f} EUR/MWh\n", series.limit);
    return kExitOk;
}

std::size_t sweep_threads() {
    if (const char* env = std::getenv("CAPAX_THREADS")) {
        char* end = nullptr;
        const long n = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && n > 0) return static_cast<std::size_t>(n);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

int cmd_sweep(const RawConfig& raw, const SweepOptions& options, std::ostream& out) {
    if (options.points == 0) throw ConfigError("--points must be >= 1");
    {
        RawConfig probe = raw;
        probe.set(options.param, "0");
    }
    const RunConfig base = resolve(raw);

    const std::size_t n = options.points;
    std::vector<std::string> rows(n);
    auto evaluate = [&](std::size_t i) {
        const double x = n == 1 ? options.from
                                : options.from + (options.to - options.from) * static_cast<double>(i) /
                                                     static_cast<double>(n - 1);
        std::string prefix = fmt::format("{:.12g}", x);
        try {
            RawConfig point = raw;
            point.set(options.param, fmt::format("{:.17g}", x));
            const RunConfig cfg = resolve(point);
            const Equilibrium eq = equilibrium(cfg.market, cfg.scheme, cfg.reserve, cfg.competition);
            std::optional<double> objective;
            std::string status = "ok";
            const auto* constant = std::get_if<ConstantSubsidy>(&cfg.scheme);
            if (cfg.planner && constant && std::holds_alternative<FixedReserve>(cfg.reserve) &&
                cfg.competition == Competition::Competitive) {
                try {
                    objective = planner_cost_constant(cfg.market, cfg.fixed_reserve(), *constant,
                                                      *cfg.planner)
                                    .total();
                } catch (const Error& e) {
                    status = fmt::format("objective:{}", to_string(e.kind()));
                }
            }
            rows[i] = fmt::format("{},{:.12g},{},{},{}\n", prefix, eq.k_star, optional_cell(eq.y_star),
                                  optional_cell(objective), status);
        } catch (const Error& e) {
            rows[i] = fmt::format("{},,,,{}\n", prefix, to_string(e.kind()));
        } catch (const ConfigError&) {
            rows[i] = fmt::format("{},,,,InvalidConfig\n", prefix);
        }
    };

    const std::size_t threads = std::max<std::size_t>(1, std::min(options.threads, n));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) evaluate(i);
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (std::thread& t : pool) t.join();

    std::ofstream csv = open_output(base, "sweep.csv");
    csv << options.param << ",k_star_mw,y_star_mw,objective_eur,status\n";
    std::size_t failed = 0;
    for (const std::string& row : rows) {
        csv << row;
        if (!row.ends_with(",ok\n")) ++failed;
    }
    out << fmt::format("{} points, {} not ok, written to {}\n", n, failed,
                       (base.output_dir / "sweep.csv").string());
    return kExitOk;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Capacity-investment equilibria, value functions and planner subsidies"};
    app.name("capax");
    app.require_subcommand(1);

    std::string config_path;
    std::string output_dir;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "configuration file")->required();
        sub->add_option("--output-dir", output_dir, "overrides [output] dir");
    };

    CLI::App* check = app.add_subcommand("check", "report admissibility conditions");
    add_common(check);

    CLI::App* eq = app.add_subcommand("equilibrium", "stationary state");
    add_common(eq);
    std::string regime;
    std::string reserve;
    eq->add_option("--regime", regime)->check(CLI::IsMember({"competitive", "monopoly"}));
    eq->add_option("--reserve", reserve)->check(CLI::IsMember({"fixed", "linear"}));

    CLI::App* sim = app.add_subcommand("solve-simulate", "value function and capacity path");
    add_common(sim);
    std::optional<int> dim;
    std::optional<double> horizon;
    sim->add_option("--dim", dim)->check(CLI::IsMember({1, 2}));
    sim->add_option("--horizon", horizon, "years");

    CLI::App* opt = app.add_subcommand("optimize", "planner subsidy");
    add_common(opt);

    CLI::App* sweep = app.add_subcommand("sweep", "equilibrium and objective over one parameter");
    add_common(sweep);
    SweepOptions sweep_options;
    sweep->add_option("--param", sweep_options.param)->required();
    sweep->add_option("--from", sweep_options.from)->required();
    sweep->add_option("--to", sweep_options.to)->required();
    sweep->add_option("--points", sweep_options.points)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        std::ifstream in(config_path);
        if (!in) throw ConfigError(fmt::format("cannot open config '{}'", config_path));
        const RawConfig raw = read_raw_config(in, config_path);
        if (*sweep) {
            RawConfig with_dir = raw;
            if (!output_dir.empty()) with_dir.sections["output"]["dir"] = {output_dir, 0};
            sweep_options.threads = sweep_threads();
            return cmd_sweep(with_dir, sweep_options, out);
        }
        RunConfig cfg = resolve(raw);
        if (!output_dir.empty()) cfg.output_dir = output_dir;
        if (*check) return cmd_check(cfg, out);
        if (*eq) {
            EquilibriumOptions options;
            if (!regime.empty()) {
                options.regime = regime == "monopoly" ? Competition::Monopoly : Competition::Competitive;
            }
            if (!reserve.empty()) {
                options.reserve = reserve == "linear" ? ReserveKind::Linear : ReserveKind::Fixed;
            }
            return cmd_equilibrium(cfg, options, out);
        }
        if (*sim) return cmd_solve_simulate(cfg, {dim, horizon}, out);
        return cmd_optimize(cfg, out, err);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

}  // namespace capax::cli
