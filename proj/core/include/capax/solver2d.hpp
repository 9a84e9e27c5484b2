#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include <Eigen/Core>

#include "capax/equilibrium.hpp"
#include "capax/params.hpp"

namespace capax {

/// Uniform tensor grid on [k_lo, k_hi] x [y_lo, y_hi]; row index i runs along k, column j
/// along y.
struct Grid2D {
    std::vector<double> k;
    std::vector<double> y;
    double dk = 0.0;
    double dy = 0.0;

    static Grid2D uniform(double k_lo, double k_hi, std::size_t nk, double y_lo, double y_hi,
                          std::size_t ny);

    std::size_t nk() const { return k.size(); }
    std::size_t ny() const { return y.size(); }
};

/// Stationary 2D master equation with the linear reserve drift.
struct Problem2D {
    EffectiveMarket market;  ///< no fixed reserve folded in: eps is the bare ε
    LinearReserve reserve;
    Competition competition = Competition::Competitive;

    /// h(p/(k+y+ε) - c)⁺ or hp(y+ε)/(k+y+ε)² - hc, €/(MW·yr). The competitive positive part
    /// is smoothed over a band of half-width 1e-6·h·max(|c|, 1).
    double source(double k, double y) const;
    /// Argument of the competitive positive part (the source itself for monopoly).
    double source_argument(double k, double y) const;
    double smoothing_band() const;
    /// Installation drift λ(u - α) - δk.
    double k_drift(double u, double k) const { return market.lambda * (u - market.alpha) - market.delta * k; }
};

Problem2D make_problem_2d(const MarketParams& params, const SubsidyScheme& scheme,
                          const LinearReserve& reserve, Competition competition);

/// Rectangle [k_lo, k*] x [y*, y_hi] around an equilibrium; the bottom-right corner is (k*, y*).
Grid2D equilibrium_rectangle(const Equilibrium& eq, double k_lo, double y_hi, std::size_t nk,
                             std::size_t ny);

enum class BoundaryPolicy {
    Strict,   ///< throw BoundaryOutflow when an edge cell needs a difference outside the grid
    Lenient,  ///< drop such terms and report the cells
};

struct GridCell {
    std::size_t i = 0;
    std::size_t j = 0;
};

struct Residual2D {
    Eigen::MatrixXd values;          ///< F_{i,j}(u), €/(MW·yr)
    std::vector<GridCell> outflow;   ///< edge cells whose drift points out of the rectangle
};

/// Upwind discretization F_{i,j}(u) of the stationary 2D master equation:
///   -(r+δ)u + a⁺ D⁺_k u - a⁻ D⁻_k u + f⁺ D⁺_y u - f⁻ D⁻_y u + source,
/// a = λ(u - α) - δk, f = -ak - by + γ. An outward drift larger than drift_tol at an edge is
/// an outflow; terms whose drift is exactly zero (or within drift_tol) are dropped.
Residual2D residual_2d(const Eigen::MatrixXd& u, const Problem2D& problem, const Grid2D& grid,
                       BoundaryPolicy policy = BoundaryPolicy::Strict, double drift_tol = 0.0);

/// max|F| / ((r+δ) max|u|).
double scaled_residual(const Eigen::MatrixXd& residual, const Eigen::MatrixXd& u,
                       const Problem2D& problem);

struct NewtonOptions {
    double tol = 1e-8;          ///< on the scaled residual
    int max_iterations = 100;
    int max_halvings = 20;
    double linear_tol = 1e-12;  ///< relative residual of each linear solve
};

/// Gridded solution U(k, y) with solver diagnostics.
struct ValueFunction2D {
    Grid2D grid;
    Eigen::MatrixXd u;  ///< €/MW, u(i, j) ≈ U(k_i, y_j)
    Problem2D problem;
    std::vector<double> residual_history;  ///< scaled residual before each Newton step and at the end
    int iterations = 0;
    double final_scaled_residual = 0.0;

    /// Bilinear interpolation, clamped to the rectangle.
    double operator()(double k, double y) const;
    double flow(double k, double y) const { return problem.market.lambda * ((*this)(k, y) - problem.market.alpha); }
};

/// Constant field u everywhere.
Eigen::MatrixXd constant_guess(const Grid2D& grid, double u);

/// Damped Newton iteration u ← u - θ (DF)⁻¹ F(u), θ halved up to max_halvings times while the
/// residual 2-norm does not decrease. Sparse direct solves (Eigen SparseLU) with iterative
/// refinement to linear_tol.
///
/// Throws BoundaryOutflow if the reserve drift leaves the rectangle on its top or bottom edge,
/// or if the converged installation drift points out of it; NewtonDiverged when no damped
/// step reduces the residual or the iteration budget runs out; MonotonicityViolation if the
/// solution is not strictly decreasing in k.
ValueFunction2D solve_master_2d(const Problem2D& problem, const Grid2D& grid,
                                const Eigen::MatrixXd& initial, const NewtonOptions& options = {});

/// min over cells of |∂F_ij/∂u_ij| - Σ|∂F_ij/∂u_kl|, the off-diagonals taken over the upwind
/// neighbours. Equals r+δ for fields constant in k; negative values flag cells where u
/// increases in k strongly enough to break dominance.
double check_diagonal_dominance(const ValueFunction2D& value);
double check_diagonal_dominance(const Eigen::MatrixXd& u, const Problem2D& problem,
                                const Grid2D& grid);

/// Long-format CSV with header `k_mw,y_mw,u_eur_per_mw`.
void write_csv(std::ostream& out, const ValueFunction2D& value);

}  // namespace capax
