#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace capax {

// Canonical units: MW, years, euros. p is in €/hour, so p/(K+ε) is €/MWh.
namespace units {
inline constexpr double MW = 1.0;
inline constexpr double GW = 1.0e3;
inline constexpr double kW = 1.0e-3;
inline constexpr double eur_per_kW = 1.0e3;  // expressed in €/MW
inline constexpr double eur_per_MW = 1.0;
}  // namespace units

/// Market and technology constants.
struct MarketParams {
    double r = 0.0;       ///< discount rate, 1/yr
    double delta = 0.0;   ///< capacity decay rate, 1/yr
    double lambda = 0.0;  ///< installation responsiveness, MW²/(€·yr)
    double eps = 0.0;     ///< price-floor capacity, MW
    double h = 0.0;       ///< production hours per year
    double p = 0.0;       ///< spot-price numerator, €/h
    double alpha = 0.0;   ///< installation cost, €/MW
    double c = 0.0;       ///< production cost, €/MWh

    double rate() const { return r + delta; }
};

/// Constant subsidy to installation and production.
struct ConstantSubsidy {
    double alpha_sub = 0.0;  ///< €/MW
    double c_sub = 0.0;      ///< €/MWh
};

/// Production subsidy c1/(K+ε) + c2 indexed on the spot price, plus an installation subsidy.
struct AffineSubsidy {
    double alpha_sub = 0.0;  ///< €/MW
    double c1_sub = 0.0;     ///< €/h
    double c2_sub = 0.0;     ///< €/MWh
};

using SubsidyScheme = std::variant<ConstantSubsidy, AffineSubsidy>;

struct FixedReserve {
    double y0 = 0.0;  ///< MW
};

/// Reserve drift f(k, y) = -a k - b y + gamma.
struct LinearReserve {
    double a = 0.0;      ///< 1/yr
    double b = 0.0;      ///< 1/yr
    double gamma = 0.0;  ///< MW/yr

    double drift(double k, double y) const { return -a * k - b * y + gamma; }
    /// Reserve on the nullcline f(k, y) = 0.
    double nullcline(double k) const { return (gamma - a * k) / b; }
};

using ReserveModel = std::variant<FixedReserve, LinearReserve>;

/// The reduced market a producer actually faces once subsidies and a fixed reserve are folded in:
/// p -> p + c1, ε -> ε + Y0, α -> α - α_sub, c -> c - c_sub (or c - c2).
struct EffectiveMarket {
    double r = 0.0;
    double delta = 0.0;
    double lambda = 0.0;
    double h = 0.0;
    double p = 0.0;
    double eps = 0.0;
    double alpha = 0.0;
    double c = 0.0;

    double rate() const { return r + delta; }
    double cbar() const { return h * c + rate() * alpha; }
    /// Stationary value of one unit at capacity k: u = α + δk/λ.
    double anchor(double k) const { return alpha + delta * k / lambda; }
};

EffectiveMarket effective_market(const MarketParams& params, const SubsidyScheme& scheme,
                                 double fixed_reserve = 0.0);

/// Annualized all-in cost of one new MW: h c + (r + δ) α.
double cbar(const MarketParams& params);

/// Annualized subsidy h c_sub + (r + δ) α_sub. For the affine scheme only the constant part
/// h c2_sub + (r + δ) α_sub is counted.
double cbar_sub(const MarketParams& params, const SubsidyScheme& scheme);

double alpha_sub_of(const SubsidyScheme& scheme);

/// Throws InvalidArgument unless r, δ, λ, ε, h, p > 0 and α ≥ 0.
void validate(const MarketParams& params);
void validate(const ReserveModel& reserve);

struct AdmissibilityCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct AdmissibilityReport {
    std::vector<AdmissibilityCheck> checks;

    bool all_passed() const;
    const AdmissibilityCheck* find(const std::string& name) const;
};

/// Evaluates every admissibility condition without throwing. For a linear reserve, y_max is the
/// largest reserve the 2D solve will visit (defaults to γ/b).
AdmissibilityReport check_admissibility(const MarketParams& params, const SubsidyScheme& scheme,
                                        const ReserveModel& reserve,
                                        std::optional<double> y_max = std::nullopt);

}  // namespace capax
