#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "capax/equilibrium.hpp"
#include "capax/params.hpp"

namespace capax {

enum class MarginKind { CompetitiveConstant, CompetitiveGeneral, Monopoly };

std::string_view to_string(MarginKind kind);

/// Source term of the 1D master equation: net revenue rate of one MW at aggregate capacity k,
/// in €/(MW·yr), before installation costs.
struct MarginFunction {
    MarginKind kind = MarginKind::CompetitiveConstant;
    /// Argument of the positive part for competitive margins (the margin itself for monopoly).
    std::function<double(double)> raw;

    double operator()(double k) const;

    /// h (p/(k+ε) - c)⁺ on the effective market.
    static MarginFunction competitive(const EffectiveMarket& market);
    /// h p ε/(k+ε)² - h c on the effective market.
    static MarginFunction monopoly(const EffectiveMarket& market);
    /// h (p/(k+ε) - phi(k) + psi(k))⁺ with ε = params.eps + y0.
    static MarginFunction general(const MarketParams& params, double y0,
                                  const CapacityFunction& phi, const CapacityFunction& psi);
};

/// Gridded solution U of the stationary master equation on [0, k*].
struct ValueFunction1D {
    std::vector<double> k;  ///< MW, uniform, k.back() == k*
    std::vector<double> u;  ///< €/MW
    EffectiveMarket market;
    MarginFunction margin;

    double k_star() const { return k.back(); }
    double step() const { return k[1] - k[0]; }
    /// Linear interpolation, clamped to [0, k*].
    double operator()(double capacity) const;
    /// Installation flow λ(U(k) - α) in MW/yr.
    double flow(double capacity) const;
};

/// Backward implicit march from the stationary anchor u_n = α + δk*/λ. Each step solves
///   -(r+δ)u_i + (λ(u_i - α) - δk_i)(u_{i+1} - u_i)/Δk + margin(k_i) = 0
/// for u_i, taking the root with positive drift.
///
/// Throws SchemeFailure on a negative discriminant, a non-positive drift or a clipped margin
/// inside the domain, and MonotonicityViolation if the result is not strictly decreasing.
ValueFunction1D solve_master_1d(const EffectiveMarket& market, const MarginFunction& margin,
                                double k_star, std::size_t n_grid = 4000);

/// Convenience: effective market, competitive or monopoly equilibrium and solve in one call.
ValueFunction1D solve_master_1d(const MarketParams& params, const SubsidyScheme& scheme,
                                double y0, Competition competition, std::size_t n_grid = 4000);

/// Relative gap between U(k_start) and the discounted margin integral along the simulated
/// equilibrium path from k_start: |∫e^{-(r+δ)s} margin(K_s) ds - U(k_start)| / U(k_start).
double consistency_check(const ValueFunction1D& value, double k_start, double horizon,
                         double dt = 0.01);

/// Largest |Δu/Δk| over grid cells.
double lipschitz_estimate(const ValueFunction1D& value);

/// Bound on the Lipschitz constant, 2hp/(ε²δ) on the effective market.
double lipschitz_bound(const EffectiveMarket& market);

/// CSV with header `k_mw,u_eur_per_mw`.
void write_csv(std::ostream& out, const ValueFunction1D& value);

}  // namespace capax
