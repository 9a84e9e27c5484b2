#include "config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <vector>

#include <fmt/format.h>

#include "capax/errors.hpp"

namespace capax::cli {

namespace {

enum class Kind { Plain, Integer, Text, Capacity, CapacityRate, InstallCost };

using KeyTable = std::map<std::string, std::map<std::string, Kind>>;

const KeyTable& known_keys() {
    static const KeyTable table = {
        {"market",
         {{"r", Kind::Plain},
          {"delta", Kind::Plain},
          {"half_life", Kind::Plain},
          {"lambda", Kind::Plain},
          {"eps", Kind::Capacity},
          {"h", Kind::Plain},
          {"p", Kind::Plain},
          {"alpha", Kind::InstallCost},
          {"c", Kind::Plain},
          {"competition", Kind::Text}}},
        {"subsidy",
         {{"scheme", Kind::Text},
          {"alpha_sub", Kind::InstallCost},
          {"c_sub", Kind::Plain},
          {"cbar_sub", Kind::Plain},
          {"c1_sub", Kind::Plain},
          {"c2_sub", Kind::Plain},
          {"cbar2_sub", Kind::Plain},
          {"target", Kind::Capacity}}},
        {"reserve",
         {{"model", Kind::Text},
          {"y0", Kind::Capacity},
          {"a", Kind::Plain},
          {"b", Kind::Plain},
          {"gamma", Kind::CapacityRate}}},
        {"planner",
         {{"mu", Kind::Plain},
          {"k_bar", Kind::Capacity},
          {"k0", Kind::Capacity},
          {"horizon", Kind::Plain},
          {"dt", Kind::Plain},
          {"lower", Kind::Plain},
          {"upper", Kind::Plain},
          {"scan_points", Kind::Integer},
          {"tol", Kind::Plain},
          {"mode", Kind::Text},
          {"line_points", Kind::Integer}}},
        {"numerics",
         {{"n_grid", Kind::Integer},
          {"nk", Kind::Integer},
          {"ny", Kind::Integer},
          {"dt", Kind::Plain},
          {"horizon", Kind::Plain},
          {"newton_tol", Kind::Plain},
          {"max_iterations", Kind::Integer},
          {"k_lo", Kind::Capacity},
          {"y_hi", Kind::Capacity},
          {"start_k", Kind::Capacity},
          {"start_y", Kind::Capacity}}},
        {"output", {{"dir", Kind::Text}}},
    };
    return table;
}

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::string strip_spaces(std::string_view s) {
    std::string out;
    for (char ch : s) {
        if (ch != ' ' && ch != '\t') out += ch;
    }
    return out;
}

std::string where(const RawConfig& raw, int line) {
    return line > 0 ? fmt::format("{}:{}", raw.source, line) : raw.source;
}

double unit_factor(Kind kind, const std::string& unit) {
    if (unit.empty()) return 1.0;
    std::string u = unit;
    for (const char* euro : {"\xE2\x82\xAC", "EUR", "eur"}) {
        if (u.rfind(euro, 0) == 0) {
            u = "E" + u.substr(std::char_traits<char>::length(euro));
            break;
        }
    }
    switch (kind) {
        case Kind::Capacity:
            if (u == "MW") return units::MW;
            if (u == "GW") return units::GW;
            if (u == "kW") return units::kW;
            break;
        case Kind::CapacityRate:
            if (u == "MW" || u == "MW/yr" || u == "MW/year") return units::MW;
            if (u == "GW" || u == "GW/yr" || u == "GW/year") return units::GW;
            break;
        case Kind::InstallCost:
            if (u == "E/MW") return units::eur_per_MW;
            if (u == "E/kW") return units::eur_per_kW;
            break;
        default:
            break;
    }
    return std::nan("");
}

class Resolver {
public:
    explicit Resolver(const RawConfig& raw) : raw_(raw) {
        const KeyTable& table = known_keys();
        for (const auto& [section, entries] : raw.sections) {
            const auto sec = table.find(section);
            if (sec == table.end()) {
                const int line = entries.empty() ? 0 : entries.begin()->second.line;
                throw ConfigError(fmt::format("{}: unknown section [{}]", where(raw, line), section));
            }
            for (const auto& [key, entry] : entries) {
                if (!sec->second.count(key)) {
                    throw ConfigError(fmt::format("{}: unknown key '{}' in [{}]",
                                                  where(raw, entry.line), key, section));
                }
            }
        }
    }

    bool has_section(const std::string& section) const { return raw_.sections.count(section) > 0; }

    bool has(const std::string& section, const std::string& key) const {
        const auto sec = raw_.sections.find(section);
        return sec != raw_.sections.end() && sec->second.count(key) > 0;
    }

    const RawConfig::Entry& entry(const std::string& section, const std::string& key) const {
        const auto sec = raw_.sections.find(section);
        if (sec == raw_.sections.end() || !sec->second.count(key)) {
            throw ConfigError(fmt::format("{}: missing required key '{}' in [{}]", raw_.source, key,
                                          section));
        }
        return sec->second.at(key);
    }

    double number(const std::string& section, const std::string& key) const {
        const RawConfig::Entry& e = entry(section, key);
        const Kind kind = known_keys().at(section).at(key);
        const std::string& text = e.value;
        const char* begin = text.data();
        const char* end = text.data() + text.size();
        double value = 0.0;
        const auto [ptr, ec] = std::from_chars(begin, end, value);
        if (ec != std::errc() || ptr == begin) {
            throw ConfigError(fmt::format("{}: '{}' expects a number, got '{}'", where(raw_, e.line),
                                          key, text));
        }
        const std::string unit = strip_spaces(std::string_view(ptr, static_cast<std::size_t>(end - ptr)));
        const double factor = unit_factor(kind, unit);
        if (std::isnan(factor)) {
            throw ConfigError(fmt::format("{}: unit '{}' not accepted for '{}'", where(raw_, e.line),
                                          unit, key));
        }
        if (!std::isfinite(value)) {
            throw ConfigError(fmt::format("{}: '{}' must be finite", where(raw_, e.line), key));
        }
        return value * factor;
    }

    std::optional<double> optional_number(const std::string& section, const std::string& key) const {
        if (!has(section, key)) return std::nullopt;
        return number(section, key);
    }

    double number_or(const std::string& section, const std::string& key, double fallback) const {
        return optional_number(section, key).value_or(fallback);
    }

    std::size_t count_or(const std::string& section, const std::string& key, std::size_t fallback) const {
        if (!has(section, key)) return fallback;
        const double v = number(section, key);
        if (v < 0 || v != std::floor(v) || v > 1e9) {
            throw ConfigError(fmt::format("{}: '{}' must be a non-negative integer",
                                          where(raw_, entry(section, key).line), key));
        }
        return static_cast<std::size_t>(v);
    }

    std::string choice(const std::string& section, const std::string& key,
                       const std::vector<std::string>& allowed) const {
        if (!has(section, key)) return allowed.front();
        const RawConfig::Entry& e = entry(section, key);
        for (const std::string& a : allowed) {
            if (e.value == a) return a;
        }
        std::string list;
        for (const std::string& a : allowed) list += (list.empty() ? "" : "|") + a;
        throw ConfigError(fmt::format("{}: '{}' must be one of {}, got '{}'", where(raw_, e.line), key,
                                      list, e.value));
    }

    void forbid(const std::string& section, const std::string& key, const std::string& reason) const {
        if (has(section, key)) {
            throw ConfigError(fmt::format("{}: '{}' is not allowed {}",
                                          where(raw_, entry(section, key).line), key, reason));
        }
    }

    const RawConfig& raw() const { return raw_; }

private:
    const RawConfig& raw_;
};

MarketParams resolve_market(const Resolver& res) {
    MarketParams m;
    m.r = res.number("market", "r");
    if (res.has("market", "delta") == res.has("market", "half_life")) {
        throw ConfigError(fmt::format("{}: give exactly one of 'delta' or 'half_life' in [market]",
                                      res.raw().source));
    }
    m.delta = res.has("market", "delta") ? res.number("market", "delta")
                                         : std::log(2.0) / res.number("market", "half_life");
    m.lambda = res.number("market", "lambda");
    m.eps = res.number("market", "eps");
    m.h = res.number("market", "h");
    m.p = res.number("market", "p");
    m.alpha = res.number("market", "alpha");
    m.c = res.number("market", "c");
    return m;
}

}  // namespace

void RawConfig::set(const std::string& key, const std::string& value) {
    std::string section;
    std::string name;
    if (const auto dot = key.find('.'); dot != std::string::npos) {
        section = key.substr(0, dot);
        name = key.substr(dot + 1);
        const auto sec = known_keys().find(section);
        if (sec == known_keys().end() || !sec->second.count(name)) {
            throw ConfigError(fmt::format("unknown key '{}'", key));
        }
    } else {
        name = key;
        for (const auto& [sec, keys] : known_keys()) {
            if (!keys.count(name)) continue;
            if (!section.empty()) {
                throw ConfigError(fmt::format("key '{}' is ambiguous; write it as section.key", key));
            }
            section = sec;
        }
        if (section.empty()) throw ConfigError(fmt::format("unknown key '{}'", key));
    }
    sections[section][name] = Entry{value, 0};
}

RawConfig read_raw_config(std::istream& in, const std::string& source) {
    RawConfig raw;
    raw.source = source;
    std::string current;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string text = trim(line);
        if (text.empty()) continue;
        if (text.front() == '[') {
            if (text.back() != ']' || text.size() < 3) {
                throw ConfigError(fmt::format("{}:{}: malformed section header", source, number));
            }
            current = trim(std::string_view(text).substr(1, text.size() - 2));
            raw.sections[current];
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(fmt::format("{}:{}: expected 'key = value'", source, number));
        }
        if (current.empty()) {
            throw ConfigError(fmt::format("{}:{}: key outside of a section", source, number));
        }
        const std::string key = trim(std::string_view(text).substr(0, eq));
        const std::string value = trim(std::string_view(text).substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw ConfigError(fmt::format("{}:{}: empty key or value", source, number));
        }
        auto& section = raw.sections[current];
        if (section.count(key)) {
            throw ConfigError(fmt::format("{}:{}: duplicate key '{}'", source, number, key));
        }
        section[key] = RawConfig::Entry{value, number};
    }
    return raw;
}

double RunConfig::fixed_reserve() const {
    if (const auto* fixed = std::get_if<FixedReserve>(&reserve)) return fixed->y0;
    return 0.0;
}

RunConfig resolve(const RawConfig& raw) {
    const Resolver res(raw);
    RunConfig cfg;
    cfg.market = resolve_market(res);
    cfg.competition = res.choice("market", "competition", {"competitive", "monopoly"}) == "monopoly"
                          ? Competition::Monopoly
                          : Competition::Competitive;

    try {
        validate(cfg.market);

        if (res.choice("reserve", "model", {"fixed", "linear"}) == "linear") {
            res.forbid("reserve", "y0", "with a linear reserve (use [numerics] start_y)");
            cfg.reserve = LinearReserve{res.number("reserve", "a"), res.number("reserve", "b"),
                                        res.number("reserve", "gamma")};
        } else {
            for (const char* key : {"a", "b", "gamma"}) res.forbid("reserve", key, "with a fixed reserve");
            cfg.reserve = FixedReserve{res.number_or("reserve", "y0", 0.0)};
        }
        validate(cfg.reserve);

        const double alpha_sub = res.number_or("subsidy", "alpha_sub", 0.0);
        const double rate = cfg.market.rate();
        cfg.subsidy_target = res.optional_number("subsidy", "target");
        if (res.choice("subsidy", "scheme", {"constant", "affine"}) == "affine") {
            for (const char* key : {"c_sub", "cbar_sub"}) res.forbid("subsidy", key, "with scheme = affine");
            if (res.has("subsidy", "c2_sub") && res.has("subsidy", "cbar2_sub")) {
                throw ConfigError(raw.source + ": give at most one of 'c2_sub' or 'cbar2_sub'");
            }
            if (res.has("subsidy", "c1_sub") == cfg.subsidy_target.has_value()) {
                throw ConfigError(raw.source + ": give exactly one of 'c1_sub' or 'target' with scheme = affine");
            }
            const double c2 = res.has("subsidy", "cbar2_sub")
                                  ? (res.number("subsidy", "cbar2_sub") - rate * alpha_sub) / cfg.market.h
                                  : res.number_or("subsidy", "c2_sub", 0.0);
            double c1 = 0.0;
            if (cfg.subsidy_target) {
                if (!std::holds_alternative<FixedReserve>(cfg.reserve)) {
                    throw ConfigError(raw.source + ": an affine subsidy target needs a fixed reserve");
                }
                const double cbar2 = cfg.market.h * c2 + rate * alpha_sub;
                c1 = c1_for_target(cfg.market, *cfg.subsidy_target, cfg.fixed_reserve(), cbar2);
            } else {
                c1 = res.number("subsidy", "c1_sub");
            }
            cfg.scheme = AffineSubsidy{alpha_sub, c1, c2};
        } else {
            for (const char* key : {"c1_sub", "c2_sub", "cbar2_sub"}) {
                res.forbid("subsidy", key, "with scheme = constant");
            }
            const int given = res.has("subsidy", "c_sub") + res.has("subsidy", "cbar_sub") +
                              static_cast<int>(cfg.subsidy_target.has_value());
            if (given > 1) {
                throw ConfigError(raw.source + ": give at most one of 'c_sub', 'cbar_sub' or 'target'");
            }
            double c_sub = res.number_or("subsidy", "c_sub", 0.0);
            if (res.has("subsidy", "cbar_sub")) {
                c_sub = (res.number("subsidy", "cbar_sub") - rate * alpha_sub) / cfg.market.h;
            }
            if (cfg.subsidy_target) {
                const double cs =
                    subsidy_for_target(cfg.market, *cfg.subsidy_target, cfg.reserve, cfg.competition);
                c_sub = (cs - rate * alpha_sub) / cfg.market.h;
            }
            cfg.scheme = ConstantSubsidy{alpha_sub, c_sub};
        }

        if (res.has_section("planner")) {
            PlannerConfig pc;
            pc.mu = res.number("planner", "mu");
            pc.k_bar = res.number("planner", "k_bar");
            pc.k0 = res.number("planner", "k0");
            pc.horizon = res.number_or("planner", "horizon", 0.0);
            pc.dt = res.number_or("planner", "dt", pc.dt);
            pc.lower = res.optional_number("planner", "lower");
            pc.upper = res.optional_number("planner", "upper");
            pc.scan_points = res.count_or("planner", "scan_points", pc.scan_points);
            pc.tol = res.number_or("planner", "tol", pc.tol);
            cfg.planner_mode = res.choice("planner", "mode", {"constant", "affine"}) == "affine"
                                   ? PlannerMode::Affine
                                   : PlannerMode::Constant;
            cfg.line_points = res.count_or("planner", "line_points", cfg.line_points);
            if (cfg.line_points == 0) throw ConfigError(raw.source + ": line_points must be >= 1");
            cfg.planner = pc;
        }

        Numerics& num = cfg.numerics;
        num.n_grid = res.count_or("numerics", "n_grid", num.n_grid);
        num.nk = res.count_or("numerics", "nk", num.nk);
        num.ny = res.count_or("numerics", "ny", num.ny);
        num.dt = res.number_or("numerics", "dt", num.dt);
        num.horizon = res.number_or("numerics", "horizon", num.horizon);
        num.newton_tol = res.number_or("numerics", "newton_tol", num.newton_tol);
        num.max_iterations =
            static_cast<int>(res.count_or("numerics", "max_iterations",
                                          static_cast<std::size_t>(num.max_iterations)));
        num.k_lo = res.optional_number("numerics", "k_lo");
        num.y_hi = res.optional_number("numerics", "y_hi");
        num.start_k = res.optional_number("numerics", "start_k");
        num.start_y = res.optional_number("numerics", "start_y");
        if (num.n_grid < 2 || num.nk < 2 || num.ny < 2) {
            throw ConfigError(raw.source + ": grid sizes must be >= 2");
        }
        if (!(num.dt > 0.0) || !(num.horizon > 0.0) || !(num.newton_tol > 0.0)) {
            throw ConfigError(raw.source + ": dt, horizon and newton_tol must be > 0");
        }
        if (cfg.planner) validate(*cfg.planner);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::InvalidArgument) throw ConfigError(raw.source + ": " + e.what());
        throw;
    }

    if (res.has("output", "dir")) cfg.output_dir = res.entry("output", "dir").value;
    return cfg;
}

RunConfig parse_config(std::istream& in, const std::string& source) {
    return resolve(read_raw_config(in, source));
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("cannot open config '{}'", path.string()));
    return parse_config(in, path.string());
}

}  // namespace capax::cli
