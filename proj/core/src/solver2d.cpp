#include "capax/solver2d.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <fmt/format.h>

#include "capax/errors.hpp"

namespace capax {

namespace {

using Triplet = Eigen::Triplet<double>;

struct Assembly {
    Eigen::MatrixXd residual;
    Eigen::MatrixXd diagonal;
    Eigen::MatrixXd off_sum;
    std::vector<GridCell> outflow;
    std::vector<Triplet> jacobian;
};

double reserve_tolerance(const LinearReserve& reserve) { return 1e-10 * reserve.gamma; }

// Source minus (r+δ)α: the equation for the excess value v = u - α has this right-hand side.
Eigen::MatrixXd excess_source(const Problem2D& problem, const Grid2D& grid) {
    Eigen::MatrixXd out(grid.nk(), grid.ny());
    const double shift = problem.market.rate() * problem.market.alpha;
    for (std::size_t j = 0; j < grid.ny(); ++j) {
        for (std::size_t i = 0; i < grid.nk(); ++i) {
            out(i, j) = problem.source(grid.k[i], grid.y[j]) - shift;
        }
    }
    return out;
}

// Residual (and optionally the Jacobian) of the upwind scheme written for v = u - α.
void assemble(const Eigen::MatrixXd& v, const Eigen::MatrixXd& source, const Problem2D& problem,
              const Grid2D& grid, double drift_tol, bool with_jacobian, Assembly& out) {
    const std::size_t nk = grid.nk();
    const std::size_t ny = grid.ny();
    const double lambda = problem.market.lambda;
    const double delta = problem.market.delta;
    const double rate = problem.market.rate();
    const double f_tol = reserve_tolerance(problem.reserve);
    const bool has_k = nk > 1;
    const bool has_y = ny > 1;
    const double inv_dk = has_k ? 1.0 / grid.dk : 0.0;
    const double inv_dy = has_y ? 1.0 / grid.dy : 0.0;

    out.residual.resize(nk, ny);
    out.diagonal.resize(nk, ny);
    out.off_sum.resize(nk, ny);
    out.outflow.clear();
    out.jacobian.clear();
    if (with_jacobian) out.jacobian.reserve(5 * nk * ny);

    auto index = [nk](std::size_t i, std::size_t j) { return static_cast<int>(i + j * nk); };

    for (std::size_t j = 0; j < ny; ++j) {
        for (std::size_t i = 0; i < nk; ++i) {
            const double vij = v(i, j);
            const double a = lambda * vij - delta * grid.k[i];
            const double f = problem.reserve.drift(grid.k[i], grid.y[j]);
            double res = -rate * vij + source(i, j);
            double diag = -rate;
            double off = 0.0;
            bool out_of_grid = false;

            if (a > drift_tol) {
                if (has_k && i + 1 < nk) {
                    const double diff = v(i + 1, j) - vij;
                    res += a * diff * inv_dk;
                    diag += (lambda * diff - a) * inv_dk;
                    off += a * inv_dk;
                    if (with_jacobian) out.jacobian.emplace_back(index(i, j), index(i + 1, j), a * inv_dk);
                } else {
                    out_of_grid = true;
                }
            } else if (a < -drift_tol) {
                if (has_k && i > 0) {
                    const double diff = vij - v(i - 1, j);
                    res += a * diff * inv_dk;
                    diag += (lambda * diff + a) * inv_dk;
                    off += -a * inv_dk;
                    if (with_jacobian) out.jacobian.emplace_back(index(i, j), index(i - 1, j), -a * inv_dk);
                } else {
                    out_of_grid = true;
                }
            }

            if (f > f_tol) {
                if (has_y && j + 1 < ny) {
                    res += f * (v(i, j + 1) - vij) * inv_dy;
                    diag -= f * inv_dy;
                    off += f * inv_dy;
                    if (with_jacobian) out.jacobian.emplace_back(index(i, j), index(i, j + 1), f * inv_dy);
                } else {
                    out_of_grid = true;
                }
            } else if (f < -f_tol) {
                if (has_y && j > 0) {
                    res += f * (vij - v(i, j - 1)) * inv_dy;
                    diag += f * inv_dy;
                    off += -f * inv_dy;
                    if (with_jacobian) out.jacobian.emplace_back(index(i, j), index(i, j - 1), -f * inv_dy);
                } else {
                    out_of_grid = true;
                }
            }

            if (out_of_grid) out.outflow.push_back({i, j});
            out.residual(i, j) = res;
            out.diagonal(i, j) = diag;
            out.off_sum(i, j) = off;
            if (with_jacobian) out.jacobian.emplace_back(index(i, j), index(i, j), diag);
        }
    }
}

std::string describe_cells(const std::vector<GridCell>& cells, const Grid2D& grid) {
    std::string s;
    const std::size_t shown = std::min<std::size_t>(cells.size(), 4);
    for (std::size_t n = 0; n < shown; ++n) {
        s += fmt::format("{}(k={:.6g} MW, y={:.6g} MW)", n ? ", " : "", grid.k[cells[n].i],
                         grid.y[cells[n].j]);
    }
    if (cells.size() > shown) s += fmt::format(" and {} more", cells.size() - shown);
    return s;
}

}  // namespace

Grid2D Grid2D::uniform(double k_lo, double k_hi, std::size_t nk, double y_lo, double y_hi,
                       std::size_t ny) {
    if (nk == 0 || ny == 0) throw Error(ErrorKind::InvalidArgument, "grid needs at least one node per axis");
    if (!(k_hi >= k_lo) || !(y_hi >= y_lo)) {
        throw Error(ErrorKind::InvalidArgument, "grid bounds must be ordered");
    }
    Grid2D g;
    g.k.resize(nk);
    g.y.resize(ny);
    g.dk = nk > 1 ? (k_hi - k_lo) / static_cast<double>(nk - 1) : 0.0;
    g.dy = ny > 1 ? (y_hi - y_lo) / static_cast<double>(ny - 1) : 0.0;
    for (std::size_t i = 0; i < nk; ++i) g.k[i] = nk > 1 ? k_lo + g.dk * static_cast<double>(i) : k_lo;
    for (std::size_t j = 0; j < ny; ++j) g.y[j] = ny > 1 ? y_lo + g.dy * static_cast<double>(j) : y_lo;
    if (nk > 1) g.k.back() = k_hi;
    if (ny > 1) g.y.back() = y_hi;
    return g;
}

double Problem2D::smoothing_band() const {
    return 1e-6 * market.h * std::max(std::abs(market.c), 1.0);
}

double Problem2D::source_argument(double k, double y) const {
    const double total = k + y + market.eps;
    if (competition == Competition::Competitive) {
        return market.h * (market.p / total - market.c);
    }
    return market.h * market.p * (y + market.eps) / (total * total) - market.h * market.c;
}

double Problem2D::source(double k, double y) const {
    const double x = source_argument(k, y);
    if (competition == Competition::Monopoly) return x;
    const double w = smoothing_band();
    if (x >= w) return x;
    if (x <= -w) return 0.0;
    return (x + w) * (x + w) / (4.0 * w);
}

Problem2D make_problem_2d(const MarketParams& params, const SubsidyScheme& scheme,
                          const LinearReserve& reserve, Competition competition) {
    validate(params);
    validate(ReserveModel{reserve});
    return {effective_market(params, scheme), reserve, competition};
}

Grid2D equilibrium_rectangle(const Equilibrium& eq, double k_lo, double y_hi, std::size_t nk,
                             std::size_t ny) {
    if (!eq.y_star) throw Error(ErrorKind::InvalidArgument, "equilibrium has no reserve level");
    if (!(k_lo < eq.k_star) || !(y_hi > *eq.y_star)) {
        throw Error(ErrorKind::InvalidArgument,
                    "rectangle must satisfy k_lo < k* and y_hi > y*");
    }
    return Grid2D::uniform(k_lo, eq.k_star, nk, *eq.y_star, y_hi, ny);
}

Residual2D residual_2d(const Eigen::MatrixXd& u, const Problem2D& problem, const Grid2D& grid,
                       BoundaryPolicy policy, double drift_tol) {
    if (static_cast<std::size_t>(u.rows()) != grid.nk() ||
        static_cast<std::size_t>(u.cols()) != grid.ny()) {
        throw Error(ErrorKind::InvalidArgument, "field dimensions do not match the grid");
    }
    const Eigen::MatrixXd v = u.array() - problem.market.alpha;
    Assembly a;
    assemble(v, excess_source(problem, grid), problem, grid, drift_tol, false, a);
    if (policy == BoundaryPolicy::Strict && !a.outflow.empty()) {
        throw Error(ErrorKind::BoundaryOutflow,
                    "drift leaves the rectangle at " + describe_cells(a.outflow, grid));
    }
    return {std::move(a.residual), std::move(a.outflow)};
}

double scaled_residual(const Eigen::MatrixXd& residual, const Eigen::MatrixXd& u,
                       const Problem2D& problem) {
    const double scale = problem.market.rate() * u.cwiseAbs().maxCoeff();
    return residual.cwiseAbs().maxCoeff() / std::max(scale, 1e-300);
}

double ValueFunction2D::operator()(double kq, double yq) const {
    const auto locate = [](const std::vector<double>& axis, double step, double x, std::size_t& i,
                           double& w) {
        if (axis.size() == 1 || x <= axis.front()) {
            i = 0;
            w = 0.0;
            return;
        }
        if (x >= axis.back()) {
            i = axis.size() - 2;
            w = 1.0;
            return;
        }
        const double pos = (x - axis.front()) / step;
        i = std::min(static_cast<std::size_t>(pos), axis.size() - 2);
        w = pos - static_cast<double>(i);
    };
    std::size_t i = 0, j = 0;
    double wk = 0.0, wy = 0.0;
    locate(grid.k, grid.dk, kq, i, wk);
    locate(grid.y, grid.dy, yq, j, wy);
    const std::size_t i1 = grid.nk() > 1 ? i + 1 : i;
    const std::size_t j1 = grid.ny() > 1 ? j + 1 : j;
    return (1 - wk) * (1 - wy) * u(i, j) + wk * (1 - wy) * u(i1, j) + (1 - wk) * wy * u(i, j1) +
           wk * wy * u(i1, j1);
}

Eigen::MatrixXd constant_guess(const Grid2D& grid, double u) {
    return Eigen::MatrixXd::Constant(grid.nk(), grid.ny(), u);
}

ValueFunction2D solve_master_2d(const Problem2D& problem, const Grid2D& grid,
                                const Eigen::MatrixXd& initial, const NewtonOptions& options) {
    const std::size_t nk = grid.nk();
    const std::size_t ny = grid.ny();
    if (nk < 2 || ny < 2) throw Error(ErrorKind::InvalidArgument, "2D solve needs at least 2x2 nodes");
    if (static_cast<std::size_t>(initial.rows()) != nk ||
        static_cast<std::size_t>(initial.cols()) != ny) {
        throw Error(ErrorKind::InvalidArgument, "initial guess dimensions do not match the grid");
    }

    // The reserve drift does not depend on U, so its invariance is checked up front.
    const double f_tol = reserve_tolerance(problem.reserve);
    for (std::size_t i = 0; i < nk; ++i) {
        if (problem.reserve.drift(grid.k[i], grid.y.back()) > f_tol ||
            problem.reserve.drift(grid.k[i], grid.y.front()) < -f_tol) {
            throw Error(ErrorKind::BoundaryOutflow,
                        fmt::format("reserve drift leaves the rectangle at k = {:.6g} MW", grid.k[i]));
        }
    }

    const Eigen::MatrixXd source = excess_source(problem, grid);
    if (problem.competition == Competition::Competitive) {
        const double band = problem.smoothing_band();
        for (std::size_t j = 0; j < ny; ++j) {
            for (std::size_t i = 0; i < nk; ++i) {
                if (problem.source_argument(grid.k[i], grid.y[j]) < band) {
                    throw Error(ErrorKind::InadmissibleParams,
                                fmt::format("margin is clipped inside the rectangle at "
                                            "(k={:.6g} MW, y={:.6g} MW)",
                                            grid.k[i], grid.y[j]));
                }
            }
        }
    }

    const double alpha = problem.market.alpha;
    const auto n = static_cast<Eigen::Index>(nk * ny);
    Eigen::MatrixXd v = initial.array() - alpha;

    ValueFunction2D out;
    out.grid = grid;
    out.problem = problem;

    Assembly asmb;
    Assembly trial;
    Eigen::SparseMatrix<double> jac(n, n);
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;

    auto scaled = [&](const Assembly& a, const Eigen::MatrixXd& vv) {
        return scaled_residual(a.residual, vv.array() + alpha, problem);
    };

    assemble(v, source, problem, grid, 0.0, true, asmb);
    double current = scaled(asmb, v);
    out.residual_history.push_back(current);

    int it = 0;
    while (current >= options.tol) {
        if (it >= options.max_iterations) {
            throw Error(ErrorKind::NewtonDiverged,
                        fmt::format("no convergence after {} iterations (scaled residual {:.3e})",
                                    it, current));
        }
        jac.setFromTriplets(asmb.jacobian.begin(), asmb.jacobian.end());
        lu.compute(jac);
        if (lu.info() != Eigen::Success) {
            throw Error(ErrorKind::NewtonDiverged, "singular Jacobian");
        }
        const Eigen::Map<const Eigen::VectorXd> f_vec(asmb.residual.data(), n);
        Eigen::VectorXd step = lu.solve(-f_vec);
        const double f_norm = f_vec.norm();
        for (int refine = 0; refine < 3; ++refine) {
            const Eigen::VectorXd lin_res = -f_vec - jac * step;
            if (lin_res.norm() <= options.linear_tol * f_norm) break;
            step += lu.solve(lin_res);
        }

        double theta = 1.0;
        bool accepted = false;
        for (int h = 0; h <= options.max_halvings; ++h) {
            Eigen::MatrixXd candidate = v;
            Eigen::Map<Eigen::VectorXd>(candidate.data(), n) += theta * step;
            assemble(candidate, source, problem, grid, 0.0, true, trial);
            const double trial_norm =
                Eigen::Map<const Eigen::VectorXd>(trial.residual.data(), n).norm();
            if (trial_norm < f_norm) {
                v = std::move(candidate);
                std::swap(asmb, trial);
                accepted = true;
                break;
            }
            theta *= 0.5;
        }
        if (!accepted) {
            throw Error(ErrorKind::NewtonDiverged,
                        fmt::format("residual not reduced after {} step halvings",
                                    options.max_halvings));
        }
        ++it;
        current = scaled(asmb, v);
        out.residual_history.push_back(current);
    }

    out.u = v.array() + alpha;
    out.iterations = it;
    out.final_scaled_residual = current;

    // A converged corner may carry a drift of the order λ·tol·|u| in either direction.
    const double drift_tol = problem.market.lambda * options.tol * out.u.cwiseAbs().maxCoeff();
    Assembly final_check;
    assemble(v, source, problem, grid, drift_tol, false, final_check);
    if (!final_check.outflow.empty()) {
        throw Error(ErrorKind::BoundaryOutflow,
                    "installation drift leaves the rectangle at " +
                        describe_cells(final_check.outflow, grid));
    }

    for (std::size_t j = 0; j < ny; ++j) {
        for (std::size_t i = 0; i + 1 < nk; ++i) {
            if (!(v(i, j) > v(i + 1, j))) {
                throw Error(ErrorKind::MonotonicityViolation,
                            fmt::format("U not decreasing in k at (k={:.6g} MW, y={:.6g} MW)",
                                        grid.k[i], grid.y[j]));
            }
        }
    }
    return out;
}

double check_diagonal_dominance(const Eigen::MatrixXd& u, const Problem2D& problem,
                                const Grid2D& grid) {
    const Eigen::MatrixXd v = u.array() - problem.market.alpha;
    Assembly a;
    assemble(v, excess_source(problem, grid), problem, grid, 0.0, false, a);
    return (a.diagonal.cwiseAbs() - a.off_sum).minCoeff();
}

double check_diagonal_dominance(const ValueFunction2D& value) {
    return check_diagonal_dominance(value.u, value.problem, value.grid);
}

void write_csv(std::ostream& out, const ValueFunction2D& value) {
    out << "k_mw,y_mw,u_eur_per_mw\n";
    for (std::size_t i = 0; i < value.grid.nk(); ++i) {
        for (std::size_t j = 0; j < value.grid.ny(); ++j) {
            out << fmt::format("{:.12g},{:.12g},{:.12g}\n", value.grid.k[i], value.grid.y[j],
                               value.u(i, j));
        }
    }
}

}  // namespace capax
