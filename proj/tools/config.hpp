#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>

#include "capax/equilibrium.hpp"
#include "capax/params.hpp"
#include "capax/planner.hpp"

namespace capax::cli {

/// Malformed or incomplete configuration; maps to exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Sectioned `key = value` text as read, before unit conversion.
struct RawConfig {
    struct Entry {
        std::string value;
        int line = 0;
    };
    std::string source;
    std::map<std::string, std::map<std::string, Entry>> sections;

    /// Overrides `section.key` (or a key unique across known sections).
    void set(const std::string& key, const std::string& value);
};

RawConfig read_raw_config(std::istream& in, const std::string& source);

enum class PlannerMode { Constant, Affine };

struct Numerics {
    std::size_t n_grid = 4000;
    std::size_t nk = 201;
    std::size_t ny = 201;
    double dt = 0.01;        ///< years
    double horizon = 50.0;   ///< display horizon, years
    double newton_tol = 1e-8;
    int max_iterations = 100;
    std::optional<double> k_lo;     ///< MW, left edge of the 2D rectangle
    std::optional<double> y_hi;     ///< MW, top edge of the 2D rectangle
    std::optional<double> start_k;  ///< MW
    std::optional<double> start_y;  ///< MW
};

struct RunConfig {
    MarketParams market;
    Competition competition = Competition::Competitive;
    SubsidyScheme scheme = ConstantSubsidy{};
    std::optional<double> subsidy_target;  ///< MW; the subsidy was derived from this target
    ReserveModel reserve = FixedReserve{};
    std::optional<PlannerConfig> planner;
    PlannerMode planner_mode = PlannerMode::Constant;
    std::size_t line_points = 16;
    Numerics numerics;
    std::filesystem::path output_dir = ".";

    double fixed_reserve() const;
};

/// Converts units, checks required and unknown keys, validates ranges and resolves a subsidy
/// `target` into the scheme. Throws ConfigError.
RunConfig resolve(const RawConfig& raw);

RunConfig parse_config(std::istream& in, const std::string& source);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace capax::cli
