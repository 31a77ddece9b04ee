#pragma once

// Planning solution artifacts. Three renderings of one solution: a JSON
// document that round-trips exactly (the validate command re-reads it), a
// wide per-hour CSV with every time series, and the compact per-hour
// shed/discharge summary used in study reports. All series are keyed by
// entity id; the network is the authority for entity order.

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "battplan/errors.hpp"
#include "battplan/network.hpp"
#include "battplan/opf.hpp"
#include "battplan/util.hpp"

namespace battplan {

namespace detail {

// [hour][entity] -> {"id": [per-hour values], ...} in the given id order.
inline nlohmann::ordered_json series_by_id(const std::vector<std::vector<double>>& rows,
                                           const std::vector<std::string>& ids)
{
    nlohmann::ordered_json out = nlohmann::ordered_json::object();
    for (std::size_t e = 0; e < ids.size(); ++e) {
        std::vector<double> column;
        column.reserve(rows.size());
        for (const auto& row : rows)
            column.push_back(row[e]);
        out[ids[e]] = std::move(column);
    }
    return out;
}

inline std::vector<std::vector<double>> series_from_id(const nlohmann::json& j,
                                                       const std::vector<std::string>& ids,
                                                       int hours, const char* what)
{
    if (!j.is_object())
        throw ParseError(std::string("solution: series \"") + what + "\" must be an object");
    if (j.size() != ids.size())
        throw ParseError(std::string("solution: series \"") + what + "\" has " +
                         std::to_string(j.size()) + " entries, expected " +
                         std::to_string(ids.size()));
    std::vector<std::vector<double>> rows(hours, std::vector<double>(ids.size(), 0.0));
    for (std::size_t e = 0; e < ids.size(); ++e) {
        auto it = j.find(ids[e]);
        if (it == j.end())
            throw ParseError(std::string("solution: series \"") + what + "\" is missing \"" +
                             ids[e] + "\"");
        if (!it->is_array() || static_cast<int>(it->size()) != hours)
            throw ParseError(std::string("solution: series \"") + what + "\" entry \"" +
                             ids[e] + "\" must be an array of " + std::to_string(hours) +
                             " numbers");
        for (int t = 0; t < hours; ++t) {
            const auto& cell = (*it)[t];
            if (!cell.is_number())
                throw ParseError(std::string("solution: series \"") + what + "\" entry \"" +
                                 ids[e] + "\" hour " + std::to_string(t) + " is not a number");
            rows[t][e] = cell.get<double>();
        }
    }
    return rows;
}

inline std::vector<std::string> bus_ids(const Network& net)
{
    std::vector<std::string> ids;
    ids.reserve(net.bus_count());
    for (const Bus& b : net.buses())
        ids.push_back(b.id);
    return ids;
}

inline std::vector<std::string> generator_ids(const Network& net)
{
    std::vector<std::string> ids;
    ids.reserve(net.generator_count());
    for (const Generator& g : net.generators())
        ids.push_back(g.id);
    return ids;
}

inline std::vector<std::string> line_ids(const Network& net)
{
    std::vector<std::string> ids;
    ids.reserve(net.line_count());
    for (const Line& l : net.lines())
        ids.push_back(l.id);
    return ids;
}

inline std::vector<std::string> candidate_ids(const Network& net,
                                              const std::vector<int>& candidates)
{
    std::vector<std::string> ids;
    ids.reserve(candidates.size());
    for (int n : candidates)
        ids.push_back(net.buses()[n].id);
    return ids;
}

} // namespace detail

inline nlohmann::ordered_json cost_to_json(const CostBreakdown& c)
{
    nlohmann::ordered_json j;
    j["generation"] = c.generation;
    j["loadshed"] = c.loadshed;
    j["slack"] = c.slack;
    j["total"] = c.total;
    return j;
}

inline nlohmann::ordered_json solution_to_json(const PlanningSolution& sol, const Network& net)
{
    const auto cand = detail::candidate_ids(net, sol.candidates);
    nlohmann::ordered_json j;
    j["first_hour"] = sol.first_hour;
    j["hours"] = sol.hours();
    j["candidates"] = cand;
    j["placement"] = sol.placement;
    j["initial_soc"] = sol.initial_soc;
    j["cost"] = cost_to_json(sol.cost);
    nlohmann::ordered_json series;
    series["gen"] = detail::series_by_id(sol.gen, detail::generator_ids(net));
    series["slack"] = detail::series_by_id(sol.slack, detail::bus_ids(net));
    series["theta"] = detail::series_by_id(sol.theta, detail::bus_ids(net));
    series["shed"] = detail::series_by_id(sol.shed, detail::bus_ids(net));
    series["flow"] = detail::series_by_id(sol.flow, detail::line_ids(net));
    series["charge"] = detail::series_by_id(sol.charge, cand);
    series["discharge"] = detail::series_by_id(sol.discharge, cand);
    series["soc"] = detail::series_by_id(sol.soc, cand);
    j["series"] = std::move(series);
    return j;
}

// Inverse of solution_to_json against the same network. The stored cost
// block is taken verbatim (not recomputed) so a written file reads back
// equal; the validate path re-derives costs itself when it needs them.
inline PlanningSolution solution_from_json(const nlohmann::json& j, const Network& net)
{
    try {
        PlanningSolution sol;
        sol.first_hour = j.at("first_hour").get<int>();
        const int hours = j.at("hours").get<int>();
        if (hours < 0)
            throw ParseError("solution: negative hour count");

        const auto stored = j.at("candidates").get<std::vector<std::string>>();
        for (const std::string& id : stored) {
            int n = net.bus_index(id);
            if (n < 0)
                throw ParseError("solution: candidate \"" + id + "\" is not a bus");
            sol.candidates.push_back(n);
        }
        const auto expect = detail::candidate_ids(net, sol.candidates);
        sol.placement = j.at("placement").get<std::vector<double>>();
        sol.initial_soc = j.at("initial_soc").get<std::vector<double>>();
        if (sol.placement.size() != stored.size() || sol.initial_soc.size() != stored.size())
            throw ParseError("solution: placement and initial_soc must match the candidate "
                             "list");

        const auto& series = j.at("series");
        sol.gen = detail::series_from_id(series.at("gen"), detail::generator_ids(net), hours,
                                         "gen");
        sol.slack = detail::series_from_id(series.at("slack"), detail::bus_ids(net), hours,
                                           "slack");
        sol.theta = detail::series_from_id(series.at("theta"), detail::bus_ids(net), hours,
                                           "theta");
        sol.shed = detail::series_from_id(series.at("shed"), detail::bus_ids(net), hours,
                                          "shed");
        sol.flow = detail::series_from_id(series.at("flow"), detail::line_ids(net), hours,
                                          "flow");
        sol.charge = detail::series_from_id(series.at("charge"), expect, hours, "charge");
        sol.discharge = detail::series_from_id(series.at("discharge"), expect, hours,
                                               "discharge");
        sol.soc = detail::series_from_id(series.at("soc"), expect, hours, "soc");

        const auto& cost = j.at("cost");
        sol.cost.generation = cost.at("generation").get<double>();
        sol.cost.loadshed = cost.at("loadshed").get<double>();
        sol.cost.slack = cost.at("slack").get<double>();
        sol.cost.total = cost.at("total").get<double>();
        return sol;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("solution: ") + e.what());
    }
}

// One row per hour, every series as id-suffixed columns. Absolute hours.
inline std::string solution_to_csv(const PlanningSolution& sol, const Network& net)
{
    const auto cand = detail::candidate_ids(net, sol.candidates);
    std::string out = "hour";
    auto head = [&out](const char* prefix, const std::vector<std::string>& ids) {
        for (const std::string& id : ids) {
            out += ',';
            out += prefix;
            out += '.';
            out += id;
        }
    };
    head("gen", detail::generator_ids(net));
    head("shed", detail::bus_ids(net));
    head("slack", detail::bus_ids(net));
    head("charge", cand);
    head("discharge", cand);
    head("soc", cand);
    head("flow", detail::line_ids(net));
    head("theta", detail::bus_ids(net));
    out += '\n';
    for (int t = 0; t < sol.hours(); ++t) {
        out += std::to_string(sol.first_hour + t);
        auto row = [&out, t](const std::vector<std::vector<double>>& series) {
            for (double v : series[t]) {
                out += ',';
                out += format_double(v);
            }
        };
        row(sol.gen);
        row(sol.shed);
        row(sol.slack);
        row(sol.charge);
        row(sol.discharge);
        row(sol.soc);
        row(sol.flow);
        row(sol.theta);
        out += '\n';
    }
    return out;
}

// Per-hour network totals of load shed and battery discharge (plus the
// generation and slack context): the aggregation a siting study plots.
inline std::string shed_discharge_csv(const PlanningSolution& sol)
{
    std::string out = "hour,loadshed,discharge,generation,slack\n";
    auto sum = [](const std::vector<double>& row) {
        double s = 0.0;
        for (double v : row)
            s += v;
        return s;
    };
    for (int t = 0; t < sol.hours(); ++t) {
        out += std::to_string(sol.first_hour + t);
        out += ',';
        out += format_double(sum(sol.shed[t]));
        out += ',';
        out += format_double(sum(sol.discharge[t]));
        out += ',';
        out += format_double(sum(sol.gen[t]));
        out += ',';
        out += format_double(sum(sol.slack[t]));
        out += '\n';
    }
    return out;
}

} // namespace battplan
