#pragma once

#include <functional>
#include <optional>
#include <string_view>

#include "capax/params.hpp"

namespace capax {

enum class Competition { Competitive, Monopoly };

enum class Regime { CompetitiveFixed, MonopolyFixed, CompetitiveLinear, MonopolyLinear };

std::string_view to_string(Regime regime);
std::string_view to_string(Competition competition);

/// Stationary state (k*, y*, u*). y_star is empty under a fixed reserve.
struct Equilibrium {
    double k_star = 0.0;
    std::optional<double> y_star;
    double u_star = 0.0;
    Regime regime = Regime::CompetitiveFixed;
};

/// A function of aggregate capacity k (MW), e.g. a production cost or subsidy in €/MWh.
using CapacityFunction = std::function<double(double)>;

/// Competitive equilibrium with a fixed reserve y0, from the closed-form positive root of
/// δk² + (δε + λc̄/(r+δ))k + λ(εc̄ - hp)/(r+δ) = 0 with ε, p, c̄ replaced by their effective
/// values. Returns k* = 0 on the boundary c̄ε = hp; throws InadmissibleParams beyond it.
Equilibrium kstar_competitive(const MarketParams& params, const SubsidyScheme& scheme,
                              double y0 = 0.0);

/// Monopoly equilibrium with a fixed reserve: the unique positive root of the cubic
/// δk³ + (2εδ + Λ)k² + (δε² + 2εΛ)k + ελ(c̄ε - hp)/(r+δ), Λ = λc̄/(r+δ), by bisection on
/// [0, hp/c̄ - ε].
Equilibrium kstar_monopoly(const MarketParams& params, const SubsidyScheme& scheme,
                           double y0 = 0.0);

/// Competitive equilibrium for a capacity-dependent production cost phi and subsidy psi
/// (€/MWh). Solves (δk/λ + α_net)(r+δ) = h (p/(k+ε) - phi(k) + psi(k))⁺ by bisection.
/// Only the installation subsidy of `scheme` is used; production terms come from phi and psi.
/// Throws NotMonotone when the sampled margin p/(k+ε) - phi + psi is not decreasing.
Equilibrium kstar_general(const MarketParams& params, const SubsidyScheme& scheme, double y0,
                          const CapacityFunction& phi, const CapacityFunction& psi);

/// Competitive equilibrium with the linear reserve drift.
Equilibrium kstar_reserve_competitive(const MarketParams& params, const SubsidyScheme& scheme,
                                      const LinearReserve& reserve);

/// Monopoly equilibrium with the linear reserve drift; root of the reduced cubic for a ≠ b,
/// of the scalar stationarity equation for a = b.
Equilibrium kstar_reserve_monopoly(const MarketParams& params, const SubsidyScheme& scheme,
                                   const LinearReserve& reserve);

/// Dispatches on reserve model and competition regime.
Equilibrium equilibrium(const MarketParams& params, const SubsidyScheme& scheme,
                        const ReserveModel& reserve, Competition competition);

/// Annualized constant subsidy c̄_sub that places the equilibrium exactly at k_bar.
/// Exact inversion of the stationarity system; may be negative (a tax) when k_bar lies below
/// the unsubsidized equilibrium.
double subsidy_for_target(const MarketParams& params, double k_bar, const ReserveModel& reserve,
                          Competition competition = Competition::Competitive);

/// Price-indexed subsidy c1 (€/h) that, together with the constant part cbar2_sub, places the
/// competitive fixed-reserve equilibrium at k_bar:
///   h (p + c1) = (c̄ - c̄²)(k̄ + ε) + (r+δ) δ k̄ (k̄ + ε) / λ.
/// The result is ≤ 0 when cbar2_sub alone already reaches the target.
double c1_for_target(const MarketParams& params, double k_bar, double y0, double cbar2_sub);

/// Residual of the defining stationary system, relative to the largest term. Zero at the exact
/// equilibrium.
double stationarity_residual(const MarketParams& params, const SubsidyScheme& scheme,
                             const ReserveModel& reserve, const Equilibrium& eq);

}  // namespace capax
