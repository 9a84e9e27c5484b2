#include <cmath>

#include "capax/dynamics.hpp"
#include "capax/solver1d.hpp"

namespace capax {

// Along the equilibrium path dU(K_t)/dt = (r+δ)U - margin, so U(k_start) is the discounted
// margin stream; the tail uses margin(k*)/(r+δ) = U(k*).
double consistency_check(const ValueFunction1D& value, double k_start, double horizon, double dt) {
    const Trajectory traj = simulate_capacity(value, k_start, horizon, dt);
    const double stream = discounted_integral(
        traj, value.market.rate(), [&](const TrajectorySample& s) { return value.margin(s.k); });
    const double u0 = value(k_start);
    return std::abs(stream - u0) / std::abs(u0);
}

}  // namespace capax
