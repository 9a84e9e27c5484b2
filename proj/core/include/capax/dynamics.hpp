#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "capax/solver1d.hpp"

namespace capax {

struct ValueFunction2D;

/// One sample of a capacity path.
struct TrajectorySample {
    double t = 0.0;       ///< years
    double k = 0.0;       ///< MW
    double y = 0.0;       ///< MW; the fixed reserve is folded into ε and reported as 0
    double price = 0.0;   ///< €/MWh
    double flow = 0.0;    ///< installation flow λ(U - α), MW/yr
};

/// Capacity path with its stationary limit (k*, y*, price*, δk*) for quadrature tails.
struct Trajectory {
    std::vector<double> t;
    std::vector<double> k;
    std::vector<double> y;  ///< empty for a fixed reserve
    std::vector<double> price;
    std::vector<double> flow;
    TrajectorySample limit;

    std::size_t size() const { return t.size(); }
    bool has_reserve() const { return !y.empty(); }
    TrajectorySample sample(std::size_t i) const;
};

/// Integrates dK/dt = λ(U(K) - α) - δK with classical RK4 and step dt up to horizon.
/// Throws StepOutOfDomain if K leaves [0, k*] by more than one grid cell.
Trajectory simulate_capacity(const ValueFunction1D& value, double k0, double horizon,
                             double dt = 0.01);

/// Coupled path dK/dt = λ(U(K,Y) - α) - δK, dY/dt = f(K, Y) with bilinear U.
/// Throws StepOutOfDomain if (K, Y) leaves the solve rectangle by more than one grid cell.
Trajectory simulate_capacity_2d(const ValueFunction2D& value, double k0, double y0,
                                double horizon, double dt = 0.01);

using SampleWeight = std::function<double(const TrajectorySample&)>;

/// ∫₀^∞ e^{-rate t} weight dt: exponentially fitted trapezoid rule over the samples (the
/// linear interpolant of the weight is integrated exactly against e^{-rate t}) plus the
/// analytic tail weight(limit) e^{-rate T}/rate. The limit sample has t = +∞.
double discounted_integral(const Trajectory& traj, double rate, const SampleWeight& weight);

/// CSV with header `t_years,k_mw,y_mw,price_eur_per_mwh,flow_mw_per_year`; y_mw is blank
/// under a fixed reserve.
void write_csv(std::ostream& out, const Trajectory& traj);

}  // namespace capax
