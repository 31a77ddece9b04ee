#pragma once

// Run configuration: one JSON document naming the instance files (network,
// demand, risk) and collecting every knob a batch study needs (horizon,
// partition shape, battery and cost overrides, hedging options, parallelism).
// Field precedence across the stack is CLI flag > config file > default.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "battplan/errors.hpp"
#include "battplan/network.hpp"
#include "battplan/opf.hpp"
#include "battplan/ph.hpp"
#include "battplan/runtime.hpp"

namespace battplan {

inline std::string read_text_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open \"" + path + "\" for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad())
        throw IoError("read failed for \"" + path + "\"");
    return std::move(ss).str();
}

inline void write_text_file(const std::string& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot open \"" + path + "\" for writing");
    out << content;
    out.flush();
    if (!out)
        throw IoError("write failed for \"" + path + "\"");
}

struct RunConfig {
    std::string network_path;
    std::string demand_path;
    std::string risk_path;  // empty: nothing is ever de-energized

    // Lines whose daily risk is strictly above this go dark for that day.
    double threshold = 1.0;
    int horizon_hours = 0;  // 0: use the full demand series
    int period_hours = 72;
    int periods = 0;        // >0: derive the period length from this count

    int workers = 1;
    ExecPolicy policy = ExecPolicy::Sync;
    std::string out_dir = "out";
    int ef_hour_cap = 2000;
    double gap_target = 0.005;
    long seed = 0;  // reserved; no current code path draws random numbers

    BatteryConfig battery;
    CostConfig cost;
    PHOptions ph;

    void validate() const
    {
        if (network_path.empty())
            throw ValidationError("config: \"network\" path is required");
        if (demand_path.empty())
            throw ValidationError("config: \"demand\" path is required");
        if (threshold < 0.0)
            throw ValidationError("config: threshold must be non-negative");
        if (horizon_hours < 0)
            throw ValidationError("config: horizon_hours must be positive (or 0 for the "
                                  "full series)");
        if (period_hours < 1)
            throw ValidationError("config: period_hours must be at least 1");
        if (periods < 0)
            throw ValidationError("config: periods must be positive (or 0 to use "
                                  "period_hours)");
        if (workers < 1)
            throw ValidationError("config: workers must be at least 1");
        if (ef_hour_cap < 1)
            throw ValidationError("config: ef_hour_cap must be at least 1");
        if (!(gap_target > 0.0))
            throw ValidationError("config: gap_target must be positive");
        battery.validate();
        cost.validate();
        ph.validate();
    }
};

inline ExecPolicy parse_policy(const std::string& name)
{
    if (name == "sync")
        return ExecPolicy::Sync;
    if (name == "async-incumbent")
        return ExecPolicy::AsyncIncumbent;
    throw ValidationError("config: policy must be \"sync\" or \"async-incumbent\", got \"" +
                          name + "\"");
}

namespace detail {

// Strict field walker: every key must be known, every value the right type.
// Catches config typos instead of silently running with defaults.
class FieldReader {
public:
    FieldReader(const nlohmann::json& j, std::string where) : j_(j), where_(std::move(where))
    {
        if (!j.is_object())
            throw ValidationError("config: " + where_ + " must be a JSON object");
        for (auto it = j.begin(); it != j.end(); ++it)
            unread_.push_back(it.key());
    }

    template <typename T, typename Setter>
    void field(const char* key, const char* type_name, Setter&& set)
    {
        auto it = j_.find(key);
        if (it == j_.end())
            return;
        unread_.erase(std::remove(unread_.begin(), unread_.end(), key), unread_.end());
        T value;
        try {
            value = it->get<T>();
        } catch (const nlohmann::json::exception&) {
            throw ValidationError("config: " + where_ + "." + key + " must be " + type_name);
        }
        set(std::move(value));
    }

    void finish() const
    {
        if (!unread_.empty())
            throw ValidationError("config: unknown key \"" + unread_.front() + "\" in " +
                                  where_);
    }

private:
    const nlohmann::json& j_;
    std::string where_;
    std::vector<std::string> unread_;
};

inline void read_battery(const nlohmann::json& j, BatteryConfig& b)
{
    FieldReader r(j, "battery");
    r.field<double>("e_min", "a number", [&](double v) { b.e_min = v; });
    r.field<double>("e_max", "a number", [&](double v) { b.e_max = v; });
    r.field<double>("p_rate_min", "a number", [&](double v) { b.p_rate_min = v; });
    r.field<double>("p_rate_max", "a number", [&](double v) { b.p_rate_max = v; });
    r.field<double>("efficiency", "a number", [&](double v) { b.efficiency = v; });
    r.field<double>("carryover", "a number", [&](double v) { b.carryover = v; });
    r.field<double>("x_max", "a number", [&](double v) { b.x_max = v; });
    r.field<double>("x_total", "a number", [&](double v) { b.x_total = v; });
    r.field<double>("e_initial", "a number", [&](double v) { b.e_initial = v; });
    r.field<bool>("integer_placement", "a boolean", [&](bool v) { b.integer_placement = v; });
    r.field<bool>("terminal_at_least_initial", "a boolean",
                  [&](bool v) { b.terminal_at_least_initial = v; });
    r.field<std::map<std::string, double>>("e_initial_per_bus", "an object of numbers",
                                           [&](auto v) { b.e_initial_per_bus = std::move(v); });
    r.finish();
}

inline void read_cost(const nlohmann::json& j, CostConfig& c)
{
    FieldReader r(j, "cost");
    r.field<double>("k_loadshed", "a number", [&](double v) { c.k_loadshed = v; });
    r.field<double>("k_slack", "a number", [&](double v) { c.k_slack = v; });
    r.field<double>("slack_upper", "a number", [&](double v) { c.slack_upper = v; });
    r.finish();
}

inline void read_ph(const nlohmann::json& j, PHOptions& p)
{
    FieldReader r(j, "ph");
    r.field<double>("rho", "a number", [&](double v) { p.rho = v; });
    r.field<double>("rho_soc", "a number", [&](double v) { p.rho_soc = v; });
    r.field<int>("max_iterations", "an integer", [&](int v) { p.max_iterations = v; });
    r.field<double>("tol", "a number", [&](double v) { p.tol = v; });
    r.field<int>("breakpoints", "an integer", [&](int v) { p.breakpoints = v; });
    r.field<int>("ladder_depth", "an integer", [&](int v) { p.ladder_depth = v; });
    r.field<int>("incumbent_cadence", "an integer", [&](int v) { p.incumbent_cadence = v; });
    r.finish();
}

} // namespace detail

inline RunConfig parse_run_config(const nlohmann::json& j)
{
    RunConfig cfg;
    detail::FieldReader r(j, "config");
    r.field<std::string>("network", "a path string", [&](std::string v) {
        cfg.network_path = std::move(v);
    });
    r.field<std::string>("demand", "a path string", [&](std::string v) {
        cfg.demand_path = std::move(v);
    });
    r.field<std::string>("risk", "a path string", [&](std::string v) {
        cfg.risk_path = std::move(v);
    });
    r.field<double>("threshold", "a number", [&](double v) { cfg.threshold = v; });
    r.field<int>("horizon_hours", "an integer", [&](int v) { cfg.horizon_hours = v; });
    r.field<int>("period_hours", "an integer", [&](int v) { cfg.period_hours = v; });
    r.field<int>("periods", "an integer", [&](int v) { cfg.periods = v; });
    r.field<int>("workers", "an integer", [&](int v) { cfg.workers = v; });
    r.field<std::string>("policy", "a string", [&](const std::string& v) {
        cfg.policy = parse_policy(v);
    });
    r.field<std::string>("out_dir", "a path string", [&](std::string v) {
        cfg.out_dir = std::move(v);
    });
    r.field<int>("ef_hour_cap", "an integer", [&](int v) { cfg.ef_hour_cap = v; });
    r.field<double>("gap_target", "a number", [&](double v) { cfg.gap_target = v; });
    r.field<long>("seed", "an integer", [&](long v) { cfg.seed = v; });
    if (j.contains("battery"))
        detail::read_battery(j["battery"], cfg.battery);
    r.field<nlohmann::json>("battery", "an object", [](auto) {});
    if (j.contains("cost"))
        detail::read_cost(j["cost"], cfg.cost);
    r.field<nlohmann::json>("cost", "an object", [](auto) {});
    if (j.contains("ph"))
        detail::read_ph(j["ph"], cfg.ph);
    r.field<nlohmann::json>("ph", "an object", [](auto) {});
    r.finish();
    return cfg;
}

// Loads a config file; relative instance paths resolve against the config
// file's own directory so a config travels with its data.
inline RunConfig run_config_from_file(const std::string& path)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("config \"" + path + "\": " + e.what());
    }
    RunConfig cfg = parse_run_config(j);
    std::filesystem::path base = std::filesystem::path(path).parent_path();
    auto anchor = [&base](std::string& p) {
        if (!p.empty() && std::filesystem::path(p).is_relative())
            p = (base / p).string();
    };
    anchor(cfg.network_path);
    anchor(cfg.demand_path);
    anchor(cfg.risk_path);
    return cfg;
}

// The loaded instance an already-validated config points at.
struct Instance {
    Network net;
    std::vector<std::vector<double>> demand;  // [bus][hour]
    DeenergizationSchedule schedule;
    int horizon = 0;
};

inline Instance load_instance(const RunConfig& cfg)
{
    cfg.validate();
    Network net = parse_network(read_text_file(cfg.network_path));
    DemandSeries series = parse_demand_csv(read_text_file(cfg.demand_path));
    const int horizon = cfg.horizon_hours > 0 ? cfg.horizon_hours : series.hours;
    auto demand = bind_demand(net, series, horizon);
    DeenergizationSchedule schedule;
    if (!cfg.risk_path.empty()) {
        RiskSeries risk = parse_risk_csv(read_text_file(cfg.risk_path));
        check_risk_covers(net, risk);
        schedule = compute_off_sets(risk, cfg.threshold);
    }
    return Instance{std::move(net), std::move(demand), std::move(schedule), horizon};
}

inline ScenarioPartition partition_for(const RunConfig& cfg, int horizon)
{
    int target = cfg.period_hours;
    if (cfg.periods > 0)
        target = std::max(1, horizon / cfg.periods);
    return make_partition(horizon, target);
}

inline WorkPlan work_plan_for(const RunConfig& cfg, int periods)
{
    return WorkPlan::round_robin(periods, cfg.workers, cfg.policy);
}

} // namespace battplan
