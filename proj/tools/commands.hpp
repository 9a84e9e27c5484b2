#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>

#include "config.hpp"

namespace capax::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

enum class ReserveKind { Fixed, Linear };

struct EquilibriumOptions {
    std::optional<Competition> regime;
    std::optional<ReserveKind> reserve;
};

struct SimulateOptions {
    std::optional<int> dim;
    std::optional<double> horizon;
};

struct SweepOptions {
    std::string param;
    double from = 0.0;
    double to = 0.0;
    std::size_t points = 1;
    std::size_t threads = 1;
};

/// Each command prints a summary to `out`, writes its CSV files into cfg.output_dir and
/// returns an exit code. Domain failures propagate as capax::Error, configuration problems as
/// ConfigError.
int cmd_check(const RunConfig& cfg, std::ostream& out);
int cmd_equilibrium(const RunConfig& cfg, const EquilibriumOptions& options, std::ostream& out);
int cmd_solve_simulate(const RunConfig& cfg, const SimulateOptions& options, std::ostream& out);
int cmd_optimize(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_sweep(const RawConfig& raw, const SweepOptions& options, std::ostream& out);

/// Threads for sweeps: CAPAX_THREADS if set to a positive integer, else the hardware count.
std::size_t sweep_threads();

/// Full command line entry point with the exit-code contract 0/1/2.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace capax::cli
