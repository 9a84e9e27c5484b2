#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

#include "capax/params.hpp"

namespace capax {

/// Central-planner setup on the fixed-reserve competitive market.
struct PlannerConfig {
    double mu = 0.0;       ///< tracking weight, €/MW²
    double k_bar = 0.0;    ///< target capacity, MW
    double k0 = 0.0;       ///< initial capacity, MW
    double horizon = 0.0;  ///< quadrature horizon in years; 0 picks e^{-rT} < 1e-6
    double dt = 0.01;      ///< years
    std::size_t n_grid = 4000;

    std::optional<double> lower;  ///< scan bracket for c̄_sub, €/(MW·yr)
    std::optional<double> upper;
    std::size_t scan_points = 64;
    double tol = 100.0;  ///< golden-section tolerance on c̄_sub, €/(MW·yr)
};

/// Throws InvalidArgument unless mu ≥ 0, k_bar > 0, k0 ≥ 0, dt > 0, scan_points ≥ 3, tol > 0.
void validate(const PlannerConfig& config);

/// Horizon actually used for the planner integrals.
double quadrature_horizon(const MarketParams& params, const PlannerConfig& config);

/// One evaluation of the constant-subsidy objective, in €.
struct PlannerCost {
    double cbar_sub = 0.0;   ///< €/(MW·yr)
    double k_star = 0.0;     ///< MW
    double tracking = 0.0;   ///< μ(k* - k̄)²
    double spend = 0.0;      ///< c̄_sub ∫e^{-rt}K dt - k0 c̄_sub/(r+δ)
    double spend_bis = 0.0;  ///< c̄_sub ∫e^{-rt}(K - k0 e^{-δt}) dt
    double spend_flow = 0.0; ///< α_sub ∫e^{-rt}λ(U-α_net) dt + h c_sub ∫e^{-rt}(K - k0 e^{-δt}) dt

    double total() const { return tracking + spend; }
};

/// Objective for the split subsidy (α_sub, c_sub) with reserve y0: equilibrium, 1D solve,
/// trajectory from k0 and discounted spend in its three equivalent forms.
/// Throws InvalidArgument when k0 lies above the induced k*.
PlannerCost planner_cost_constant(const MarketParams& params, double y0,
                                  const ConstantSubsidy& subsidy, const PlannerConfig& config);

/// Same with the whole annual subsidy on production: c_sub = c̄_sub/h, α_sub = 0.
PlannerCost planner_cost_constant(const MarketParams& params, double y0, double cbar_sub,
                                  const PlannerConfig& config);

struct ConstantOptimum {
    double cbar_sub = 0.0;
    double k_star = 0.0;
    double objective = 0.0;
    double lower = 0.0;  ///< bracket actually scanned
    double upper = 0.0;
    bool non_unimodal = false;  ///< the scan showed more than one local minimum
    std::vector<PlannerCost> evaluations;  ///< every distinct evaluation, sorted by c̄_sub
};

/// Grid scan over [lower, upper] followed by golden-section refinement around the best scan
/// point. The default bracket is [max(0, c̄_sub(k0)), 1.1·c̄_sub(k̄)], where c̄_sub(k) is the
/// subsidy putting the equilibrium at k; below c̄_sub(k0) the start would sit above k*.
ConstantOptimum optimize_constant_subsidy(const MarketParams& params, double y0,
                                          const PlannerConfig& config);

/// Spend under the price-indexed scheme, in €.
struct AffineCost {
    double c1_sub = 0.0;       ///< €/h
    double cbar2_sub = 0.0;    ///< €/(MW·yr)
    double k_star = 0.0;       ///< MW
    double tracking = 0.0;     ///< μ(k* - k̄)², for comparison only
    double spend_constant = 0.0;  ///< c̄² ∫e^{-rt}S dt, S = K - k0 e^{-δt}
    double spend_indexed = 0.0;   ///< h c1 ∫e^{-rt}S/(K + ε_eff) dt
    double max_share = 0.0;       ///< max over samples of S/(K + ε_eff)

    double spend() const { return spend_constant + spend_indexed; }
};

/// Spend for the scheme ψ(k) = c1/(k+ε_eff) + c̄2/h with α_sub = 0 and reserve y0.
AffineCost planner_cost_affine(const MarketParams& params, double y0, double c1_sub,
                               double cbar2_sub, const PlannerConfig& config);

/// Points along the line that keeps the equilibrium at k̄: c̄² uniform on
/// [0, c̄_sub(k̄)), c1 = c1_for_target(k̄, c̄²). The endpoint c1 = 0 is excluded.
std::vector<AffineCost> target_line_sweep(const MarketParams& params, double y0,
                                          const PlannerConfig& config, std::size_t points);

/// Spend-minimizing point of target_line_sweep.
AffineCost optimize_affine_subsidy(const MarketParams& params, double y0,
                                   const PlannerConfig& config, std::size_t points = 16);

/// Effective production subsidy c1/(K_t + ε_eff) in €/MWh along the path from k0.
struct SubsidySeries {
    std::vector<double> t;      ///< years
    std::vector<double> value;  ///< €/MWh
    double limit = 0.0;         ///< c1/(k* + ε_eff)
};

SubsidySeries time_varying_subsidy_report(const MarketParams& params, double y0, double c1_sub,
                                          double cbar2_sub, const PlannerConfig& config,
                                          double horizon);

/// CSV with header `cbar_sub,k_star_mw,tracking_eur,spend_eur,total_eur`.
void write_csv(std::ostream& out, const ConstantOptimum& optimum);

/// CSV with header `c1_sub_eur_per_h,cbar2_sub,k_star_mw,spend_constant_eur,spend_indexed_eur,spend_eur`.
void write_csv(std::ostream& out, const std::vector<AffineCost>& sweep);

}  // namespace capax
