#pragma once

// Transmission grid description plus the demand and wildfire-risk series
// that drive it. Risk is daily and is turned into per-hour line
// de-energization sets by thresholding; the schedule is an input parameter
// of every optimization built on top, never a decision.
//
// All types here are immutable after construction and safe to share across
// worker threads.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "battplan/errors.hpp"
#include "battplan/util.hpp"

namespace battplan {

struct Bus {
    std::string id;
    std::string demand_ref;       // row id in the demand table; defaults to the bus id
    bool candidate_battery = false;

    bool operator==(const Bus&) const = default;
};

struct Line {
    std::string id;
    std::string from_bus;
    std::string to_bus;
    double susceptance = 0.0;     // p.u.
    double flow_limit = 0.0;      // p.u., symmetric
    double angle_diff_min = 0.0;  // radians
    double angle_diff_max = 0.0;

    bool operator==(const Line&) const = default;
};

struct Generator {
    std::string id;
    std::string bus;
    double g_min = 0.0;           // p.u.
    double g_max = 0.0;
    std::vector<double> cost_coeffs;  // c0, c1, ... in $/p.u.^j per hour

    bool operator==(const Generator&) const = default;
};

// Per-unit base is metadata only; every quantity in the model is already
// normalized.
constexpr double kPerUnitBaseMw = 100.0;

class Network {
public:
    Network(std::vector<Bus> buses, std::vector<Line> lines, std::vector<Generator> generators,
            std::string reference_bus,
            std::optional<std::vector<std::string>> battery_candidates = std::nullopt)
        : buses_(std::move(buses)), lines_(std::move(lines)), generators_(std::move(generators)),
          reference_bus_id_(std::move(reference_bus))
    {
        build_indices(std::move(battery_candidates));
    }

    const std::vector<Bus>& buses() const { return buses_; }
    const std::vector<Line>& lines() const { return lines_; }
    const std::vector<Generator>& generators() const { return generators_; }

    int bus_count() const { return static_cast<int>(buses_.size()); }
    int line_count() const { return static_cast<int>(lines_.size()); }
    int generator_count() const { return static_cast<int>(generators_.size()); }

    int bus_index(const std::string& id) const
    {
        auto it = bus_index_.find(id);
        return it == bus_index_.end() ? -1 : it->second;
    }
    int line_index(const std::string& id) const
    {
        auto it = line_index_.find(id);
        return it == line_index_.end() ? -1 : it->second;
    }

    int reference_bus() const { return reference_bus_; }
    const std::string& reference_bus_id() const { return reference_bus_id_; }

    int line_from(int line) const { return line_from_[line]; }
    int line_to(int line) const { return line_to_[line]; }
    int generator_bus(int gen) const { return generator_bus_[gen]; }

    const std::vector<int>& lines_from(int bus) const { return lines_from_[bus]; }
    const std::vector<int>& lines_to(int bus) const { return lines_to_[bus]; }
    const std::vector<int>& generators_at(int bus) const { return generators_at_[bus]; }

    // Bus indices eligible for battery placement, ascending. Defaults to
    // every bus when the document does not restrict the set.
    const std::vector<int>& candidate_buses() const { return candidate_buses_; }
    bool is_candidate(int bus) const { return candidate_flag_[bus]; }

    const std::vector<std::string>& warnings() const { return warnings_; }

    bool operator==(const Network& other) const
    {
        return buses_ == other.buses_ && lines_ == other.lines_ &&
               generators_ == other.generators_ && reference_bus_id_ == other.reference_bus_id_ &&
               candidate_buses_ == other.candidate_buses_;
    }

private:
    void build_indices(std::optional<std::vector<std::string>> battery_candidates)
    {
        for (int i = 0; i < bus_count(); ++i) {
            if (!bus_index_.emplace(buses_[i].id, i).second)
                throw ValidationError("duplicate bus id \"" + buses_[i].id + "\"");
            if (buses_[i].demand_ref.empty())
                buses_[i].demand_ref = buses_[i].id;
        }

        auto resolve_bus = [&](const std::string& id, const std::string& where) {
            int idx = bus_index(id);
            if (idx < 0)
                throw ValidationError(where + " references missing bus \"" + id + "\"");
            return idx;
        };

        std::set<std::string> line_ids;
        line_from_.resize(lines_.size());
        line_to_.resize(lines_.size());
        for (int l = 0; l < line_count(); ++l) {
            const Line& ln = lines_[l];
            if (!line_ids.insert(ln.id).second)
                throw ValidationError("duplicate line id \"" + ln.id + "\"");
            line_index_.emplace(ln.id, l);
            line_from_[l] = resolve_bus(ln.from_bus, "line \"" + ln.id + "\"");
            line_to_[l] = resolve_bus(ln.to_bus, "line \"" + ln.id + "\"");
            if (line_from_[l] == line_to_[l])
                throw ValidationError("line \"" + ln.id + "\" connects bus \"" + ln.from_bus +
                                      "\" to itself");
            if (ln.flow_limit < 0)
                throw ValidationError("line \"" + ln.id + "\" has negative flow_limit");
            if (ln.angle_diff_min > ln.angle_diff_max)
                throw ValidationError("line \"" + ln.id + "\" has angle_diff_min > angle_diff_max");
        }

        std::set<std::string> gen_ids;
        generator_bus_.resize(generators_.size());
        for (int g = 0; g < generator_count(); ++g) {
            const Generator& gen = generators_[g];
            if (!gen_ids.insert(gen.id).second)
                throw ValidationError("duplicate generator id \"" + gen.id + "\"");
            generator_bus_[g] = resolve_bus(gen.bus, "generator \"" + gen.id + "\"");
            if (gen.g_min > gen.g_max)
                throw ValidationError("generator \"" + gen.id + "\" has g_min > g_max");
            if (gen.cost_coeffs.empty())
                throw ValidationError("generator \"" + gen.id + "\" has empty cost_coeffs");
        }

        reference_bus_ = resolve_bus(reference_bus_id_, "reference_bus");

        lines_from_.assign(buses_.size(), {});
        lines_to_.assign(buses_.size(), {});
        generators_at_.assign(buses_.size(), {});
        for (int l = 0; l < line_count(); ++l) {
            lines_from_[line_from_[l]].push_back(l);
            lines_to_[line_to_[l]].push_back(l);
        }
        for (int g = 0; g < generator_count(); ++g)
            generators_at_[generator_bus_[g]].push_back(g);

        candidate_flag_.assign(buses_.size(), false);
        if (battery_candidates.has_value()) {
            for (const auto& id : *battery_candidates)
                candidate_flag_[resolve_bus(id, "battery_candidates")] = true;
        } else {
            bool any_flagged = false;
            for (const Bus& b : buses_)
                any_flagged = any_flagged || b.candidate_battery;
            for (int i = 0; i < bus_count(); ++i)
                candidate_flag_[i] = any_flagged ? buses_[i].candidate_battery : true;
        }
        for (int i = 0; i < bus_count(); ++i) {
            buses_[i].candidate_battery = candidate_flag_[i];
            if (candidate_flag_[i])
                candidate_buses_.push_back(i);
        }

        check_connectivity();
    }

    void check_connectivity()
    {
        if (buses_.empty())
            throw ValidationError("network has no buses");
        std::vector<char> seen(buses_.size(), 0);
        std::vector<int> stack{0};
        seen[0] = 1;
        int visited = 1;
        while (!stack.empty()) {
            int n = stack.back();
            stack.pop_back();
            auto relax = [&](int other) {
                if (!seen[other]) {
                    seen[other] = 1;
                    ++visited;
                    stack.push_back(other);
                }
            };
            for (int l : lines_from_[n])
                relax(line_to_[l]);
            for (int l : lines_to_[n])
                relax(line_from_[l]);
        }
        if (visited != bus_count())
            warnings_.push_back("network is not connected even with all lines energized (" +
                                std::to_string(bus_count() - visited) +
                                " buses unreachable from \"" + buses_[0].id + "\")");
    }

    std::vector<Bus> buses_;
    std::vector<Line> lines_;
    std::vector<Generator> generators_;
    std::string reference_bus_id_;
    int reference_bus_ = 0;

    std::map<std::string, int> bus_index_;
    std::map<std::string, int> line_index_;
    std::vector<int> line_from_, line_to_, generator_bus_;
    std::vector<std::vector<int>> lines_from_, lines_to_, generators_at_;
    std::vector<char> candidate_flag_;
    std::vector<int> candidate_buses_;
    std::vector<std::string> warnings_;
};

// --- network document (JSON syntax) ---------------------------------------

namespace detail {

inline std::string json_type_name(const nlohmann::json& j)
{
    return std::string(j.type_name());
}

inline const nlohmann::json& require_key(const nlohmann::json& j, const char* key,
                                         const std::string& path)
{
    auto it = j.find(key);
    if (it == j.end())
        throw ParseError(path + ": missing required field \"" + key + "\"");
    return *it;
}

inline std::string require_string(const nlohmann::json& j, const char* key,
                                  const std::string& path)
{
    const auto& v = require_key(j, key, path);
    if (!v.is_string())
        throw ParseError(path + "." + key + ": expected string, got " + json_type_name(v));
    return v.get<std::string>();
}

inline double require_number(const nlohmann::json& j, const char* key, const std::string& path)
{
    const auto& v = require_key(j, key, path);
    if (!v.is_number())
        throw ParseError(path + "." + key + ": expected number, got " + json_type_name(v));
    return v.get<double>();
}

inline const nlohmann::json& require_array(const nlohmann::json& j, const char* key,
                                           const std::string& path)
{
    const auto& v = require_key(j, key, path);
    if (!v.is_array())
        throw ParseError(path + "." + key + ": expected array, got " + json_type_name(v));
    return v;
}

} // namespace detail

inline Network parse_network(const std::string& text)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("network document: ") + e.what());
    }
    if (!doc.is_object())
        throw ParseError("network document: top level must be an object");

    using detail::require_array;
    using detail::require_number;
    using detail::require_string;

    std::vector<Bus> buses;
    const auto& jbuses = require_array(doc, "buses", "network");
    for (std::size_t i = 0; i < jbuses.size(); ++i) {
        std::string path = "buses[" + std::to_string(i) + "]";
        const auto& jb = jbuses[i];
        if (!jb.is_object())
            throw ParseError(path + ": expected object");
        Bus b;
        b.id = require_string(jb, "id", path);
        if (jb.contains("demand_ref")) {
            if (!jb["demand_ref"].is_string())
                throw ParseError(path + ".demand_ref: expected string");
            b.demand_ref = jb["demand_ref"].get<std::string>();
        }
        if (jb.contains("candidate_battery")) {
            if (!jb["candidate_battery"].is_boolean())
                throw ParseError(path + ".candidate_battery: expected boolean");
            b.candidate_battery = jb["candidate_battery"].get<bool>();
        }
        buses.push_back(std::move(b));
    }

    std::vector<Line> lines;
    const auto& jlines = require_array(doc, "lines", "network");
    for (std::size_t i = 0; i < jlines.size(); ++i) {
        std::string path = "lines[" + std::to_string(i) + "]";
        const auto& jl = jlines[i];
        if (!jl.is_object())
            throw ParseError(path + ": expected object");
        Line l;
        l.id = require_string(jl, "id", path);
        l.from_bus = require_string(jl, "from_bus", path);
        l.to_bus = require_string(jl, "to_bus", path);
        l.susceptance = require_number(jl, "susceptance", path);
        l.flow_limit = require_number(jl, "flow_limit", path);
        l.angle_diff_min = require_number(jl, "angle_diff_min", path);
        l.angle_diff_max = require_number(jl, "angle_diff_max", path);
        lines.push_back(std::move(l));
    }

    std::vector<Generator> generators;
    const auto& jgens = require_array(doc, "generators", "network");
    for (std::size_t i = 0; i < jgens.size(); ++i) {
        std::string path = "generators[" + std::to_string(i) + "]";
        const auto& jg = jgens[i];
        if (!jg.is_object())
            throw ParseError(path + ": expected object");
        Generator g;
        g.id = require_string(jg, "id", path);
        g.bus = require_string(jg, "bus", path);
        g.g_min = require_number(jg, "g_min", path);
        g.g_max = require_number(jg, "g_max", path);
        const auto& coeffs = require_array(jg, "cost_coeffs", path);
        for (std::size_t k = 0; k < coeffs.size(); ++k) {
            if (!coeffs[k].is_number())
                throw ParseError(path + ".cost_coeffs[" + std::to_string(k) +
                                 "]: expected number");
            g.cost_coeffs.push_back(coeffs[k].get<double>());
        }
        generators.push_back(std::move(g));
    }

    std::string reference = require_string(doc, "reference_bus", "network");

    std::optional<std::vector<std::string>> candidates;
    if (doc.contains("battery_candidates")) {
        const auto& jc = doc["battery_candidates"];
        if (!jc.is_array())
            throw ParseError("network.battery_candidates: expected array");
        std::vector<std::string> ids;
        for (std::size_t i = 0; i < jc.size(); ++i) {
            if (!jc[i].is_string())
                throw ParseError("battery_candidates[" + std::to_string(i) +
                                 "]: expected string");
            ids.push_back(jc[i].get<std::string>());
        }
        candidates = std::move(ids);
    }

    return Network(std::move(buses), std::move(lines), std::move(generators),
                   std::move(reference), std::move(candidates));
}

inline std::string emit_network(const Network& net)
{
    nlohmann::ordered_json doc;
    doc["buses"] = nlohmann::ordered_json::array();
    for (const Bus& b : net.buses()) {
        nlohmann::ordered_json jb;
        jb["id"] = b.id;
        if (b.demand_ref != b.id)
            jb["demand_ref"] = b.demand_ref;
        doc["buses"].push_back(std::move(jb));
    }
    doc["lines"] = nlohmann::ordered_json::array();
    for (const Line& l : net.lines()) {
        nlohmann::ordered_json jl;
        jl["id"] = l.id;
        jl["from_bus"] = l.from_bus;
        jl["to_bus"] = l.to_bus;
        jl["susceptance"] = l.susceptance;
        jl["flow_limit"] = l.flow_limit;
        jl["angle_diff_min"] = l.angle_diff_min;
        jl["angle_diff_max"] = l.angle_diff_max;
        doc["lines"].push_back(std::move(jl));
    }
    doc["generators"] = nlohmann::ordered_json::array();
    for (const Generator& g : net.generators()) {
        nlohmann::ordered_json jg;
        jg["id"] = g.id;
        jg["bus"] = g.bus;
        jg["g_min"] = g.g_min;
        jg["g_max"] = g.g_max;
        jg["cost_coeffs"] = g.cost_coeffs;
        doc["generators"].push_back(std::move(jg));
    }
    doc["reference_bus"] = net.reference_bus_id();
    std::vector<std::string> candidates;
    for (int n : net.candidate_buses())
        candidates.push_back(net.buses()[n].id);
    doc["battery_candidates"] = candidates;
    return doc.dump(2) + "\n";
}

// --- demand / risk tables (CSV) --------------------------------------------
//
// First column is the entity id, remaining columns are hours (demand) or
// days (risk). Header row required, '.' decimal separator.

struct DemandSeries {
    std::vector<std::string> ids;
    std::vector<std::vector<double>> values;  // [row][hour]
    int hours = 0;

    int row_of(const std::string& id) const
    {
        for (std::size_t i = 0; i < ids.size(); ++i)
            if (ids[i] == id)
                return static_cast<int>(i);
        return -1;
    }
};

struct RiskSeries {
    std::vector<std::string> ids;
    std::vector<std::vector<double>> values;  // [row][day]
    int days = 0;

    int row_of(const std::string& id) const
    {
        for (std::size_t i = 0; i < ids.size(); ++i)
            if (ids[i] == id)
                return static_cast<int>(i);
        return -1;
    }
};

namespace detail {

struct CsvTable {
    std::vector<std::string> ids;
    std::vector<std::vector<double>> values;
    int columns = 0;
};

inline CsvTable parse_series_csv(const std::string& text, const char* what)
{
    CsvTable out;
    std::size_t pos = 0;
    int line_no = 0;
    bool header_seen = false;
    std::set<std::string> seen_ids;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string_view line(text.data() + pos,
                              (eol == std::string::npos ? text.size() : eol) - pos);
        pos = (eol == std::string::npos) ? text.size() + 1 : eol + 1;
        ++line_no;
        line = trim(line);
        if (line.empty())
            continue;
        auto cells = split(line, ',');
        if (!header_seen) {
            header_seen = true;
            out.columns = static_cast<int>(cells.size()) - 1;
            if (out.columns < 1)
                throw ParseError(std::string(what) + " line " + std::to_string(line_no) +
                                 ": header must name at least one value column");
            continue;
        }
        if (static_cast<int>(cells.size()) != out.columns + 1)
            throw ParseError(std::string(what) + " line " + std::to_string(line_no) + ": expected " +
                             std::to_string(out.columns + 1) + " cells, got " +
                             std::to_string(cells.size()));
        std::string id(trim(cells[0]));
        if (id.empty())
            throw ParseError(std::string(what) + " line " + std::to_string(line_no) +
                             ": empty id cell");
        if (!seen_ids.insert(id).second)
            throw ParseError(std::string(what) + " line " + std::to_string(line_no) +
                             ": duplicate id \"" + id + "\"");
        std::vector<double> row(out.columns);
        for (int c = 0; c < out.columns; ++c) {
            double v;
            if (!parse_double(trim(cells[c + 1]), v))
                throw ParseError(std::string(what) + " line " + std::to_string(line_no) +
                                 ": cell " + std::to_string(c + 2) + " is not a number");
            if (v < 0)
                throw ParseError(std::string(what) + " line " + std::to_string(line_no) +
                                 ": negative value for \"" + id + "\"");
            row[c] = v;
        }
        out.ids.push_back(std::move(id));
        out.values.push_back(std::move(row));
    }
    if (!header_seen)
        throw ParseError(std::string(what) + ": empty file (header row required)");
    return out;
}

} // namespace detail

inline DemandSeries parse_demand_csv(const std::string& text)
{
    auto t = detail::parse_series_csv(text, "demand csv");
    return DemandSeries{std::move(t.ids), std::move(t.values), t.columns};
}

inline RiskSeries parse_risk_csv(const std::string& text)
{
    auto t = detail::parse_series_csv(text, "risk csv");
    return RiskSeries{std::move(t.ids), std::move(t.values), t.columns};
}

// Bus-major demand matrix over [0, horizon_hours). A bus whose demand_ref
// was defaulted (to its own id) and is absent from the table is treated as
// zero load; an explicit demand_ref must resolve.
inline std::vector<std::vector<double>> bind_demand(const Network& net, const DemandSeries& demand,
                                                    int horizon_hours)
{
    if (horizon_hours < 1)
        throw ValidationError("horizon must be at least one hour");
    if (horizon_hours > demand.hours)
        throw ValidationError("horizon of " + std::to_string(horizon_hours) +
                              " hours exceeds demand series length of " +
                              std::to_string(demand.hours));
    std::vector<std::vector<double>> out(net.bus_count(),
                                         std::vector<double>(horizon_hours, 0.0));
    for (int n = 0; n < net.bus_count(); ++n) {
        const Bus& b = net.buses()[n];
        int row = demand.row_of(b.demand_ref);
        if (row < 0) {
            if (b.demand_ref != b.id)
                throw ValidationError("bus \"" + b.id + "\" demand_ref \"" + b.demand_ref +
                                      "\" not present in demand table");
            continue;
        }
        for (int t = 0; t < horizon_hours; ++t)
            out[n][t] = demand.values[row][t];
    }
    return out;
}

inline void check_risk_covers(const Network& net, const RiskSeries& risk)
{
    for (const Line& l : net.lines())
        if (risk.row_of(l.id) < 0)
            throw ValidationError("risk table has no row for line \"" + l.id + "\"");
}

// --- de-energization schedule ----------------------------------------------

// Hour -> set of de-energized line ids. Daily risk is expanded to hours, so
// the set is constant within each day. Days beyond the risk data use a
// fill risk (default 0, everything stays energized).
class DeenergizationSchedule {
public:
    DeenergizationSchedule() = default;
    DeenergizationSchedule(int hours_per_day, std::vector<std::vector<std::string>> day_off,
                           std::vector<std::string> fill_off = {})
        : hours_per_day_(hours_per_day), day_off_(std::move(day_off)),
          fill_off_(std::move(fill_off))
    {
    }

    int hours_per_day() const { return hours_per_day_; }
    int days() const { return static_cast<int>(day_off_.size()); }

    const std::vector<std::string>& off_lines(int hour) const
    {
        int day = hour / hours_per_day_;
        if (day < 0 || day >= days())
            return fill_off_;
        return day_off_[day];
    }

    bool is_off(const std::string& line_id, int hour) const
    {
        const auto& off = off_lines(hour);
        return std::binary_search(off.begin(), off.end(), line_id);
    }

private:
    int hours_per_day_ = 24;
    std::vector<std::vector<std::string>> day_off_;
    std::vector<std::string> fill_off_;
};

// Line l is de-energized on day d iff risk[l,d] > threshold, strictly:
// risk exactly at the threshold keeps the line energized.
inline DeenergizationSchedule compute_off_sets(const RiskSeries& risk, double threshold,
                                               int hours_per_day = 24, double fill_risk = 0.0)
{
    if (threshold < 0)
        throw ValidationError("risk threshold must be non-negative");
    if (hours_per_day < 1)
        throw ValidationError("hours_per_day must be positive");
    std::vector<std::vector<std::string>> day_off(risk.days);
    for (int d = 0; d < risk.days; ++d) {
        for (std::size_t r = 0; r < risk.ids.size(); ++r)
            if (risk.values[r][d] > threshold)
                day_off[d].push_back(risk.ids[r]);
        std::sort(day_off[d].begin(), day_off[d].end());
    }
    std::vector<std::string> fill_off;
    if (fill_risk > threshold) {
        fill_off = risk.ids;
        std::sort(fill_off.begin(), fill_off.end());
    }
    return DeenergizationSchedule(hours_per_day, std::move(day_off), std::move(fill_off));
}

// Connected components of the energized subgraph. Components are listed by
// their smallest contained bus index; bus ids within a component are in
// network order.
inline std::vector<std::vector<std::string>> energized_components(
    const Network& net, const std::vector<std::string>& off_lines)
{
    std::vector<char> off(net.line_count(), 0);
    for (const auto& id : off_lines) {
        int l = net.line_index(id);
        if (l < 0)
            throw ValidationError("off set references unknown line \"" + id + "\"");
        off[l] = 1;
    }
    std::vector<int> comp(net.bus_count(), -1);
    int n_comp = 0;
    for (int seed = 0; seed < net.bus_count(); ++seed) {
        if (comp[seed] >= 0)
            continue;
        int c = n_comp++;
        std::vector<int> stack{seed};
        comp[seed] = c;
        while (!stack.empty()) {
            int n = stack.back();
            stack.pop_back();
            auto relax = [&](int l, int other) {
                if (!off[l] && comp[other] < 0) {
                    comp[other] = c;
                    stack.push_back(other);
                }
            };
            for (int l : net.lines_from(n))
                relax(l, net.line_to(l));
            for (int l : net.lines_to(n))
                relax(l, net.line_from(l));
        }
    }
    std::vector<std::vector<std::string>> out(n_comp);
    for (int n = 0; n < net.bus_count(); ++n)
        out[comp[n]].push_back(net.buses()[n].id);
    return out;
}

} // namespace battplan
