#pragma once

// Fixed-format MPS writer and reader. Names longer than eight characters
// (or containing whitespace) are mangled to R####### / C####### and the
// originals are preserved in "* NAMEMAP mangled original" comment lines,
// which the reader applies on the way back in. Values are printed with
// shortest round-trip precision; a value that needs more than its twelve
// character field overflows to the right with the token structure intact,
// trading strict column alignment for exact round-trips.

#include <map>
#include <set>
#include <string>
#include <vector>

#include "battplan/lp.hpp"
#include "battplan/util.hpp"

namespace battplan {
namespace detail {

inline bool needs_mangle(const std::string& name)
{
    if (name.empty() || name.size() > 8)
        return true;
    for (char c : name)
        if (c == ' ' || c == '\t' || c == '*' || c == '$')
            return true;
    return false;
}

inline std::string mangled(char prefix, int index)
{
    std::string s = std::to_string(index + 1);
    return prefix + std::string(7 - s.size(), '0') + s;
}

inline void pad_to(std::string& line, std::size_t col)
{
    if (line.size() >= col)
        line.push_back(' ');
    while (line.size() < col)
        line.push_back(' ');
}

// Field start columns of the fixed layout (0-based).
constexpr std::size_t kField1 = 1, kField2 = 4, kField3 = 14, kField4 = 24, kField5 = 39,
                      kField6 = 49;

} // namespace detail

inline std::string write_mps(const StandardFormLP& lp)
{
    lp.validate();
    using namespace detail;

    std::vector<std::string> row_out(lp.rows()), col_out(lp.cols());
    std::string obj_out = lp.objective_name;
    std::string text;
    auto line = [&](const std::string& s) {
        text += s;
        text += '\n';
    };

    {
        std::set<std::string> used;
        bool any_mangled = false;
        for (int i = 0; i < lp.rows(); ++i) {
            row_out[i] = needs_mangle(lp.row_names[i]) || used.count(lp.row_names[i])
                             ? mangled('R', i)
                             : lp.row_names[i];
            any_mangled = any_mangled || row_out[i] != lp.row_names[i];
            used.insert(row_out[i]);
        }
        if (needs_mangle(obj_out) || used.count(obj_out))
            obj_out = "R0000000";
        used.insert(obj_out);
        for (int j = 0; j < lp.cols(); ++j) {
            col_out[j] = needs_mangle(lp.col_names[j]) || used.count(lp.col_names[j])
                             ? mangled('C', j)
                             : lp.col_names[j];
            any_mangled = any_mangled || col_out[j] != lp.col_names[j];
            used.insert(col_out[j]);
        }
        (void)any_mangled;
    }

    line("NAME          BATTPLAN");
    if (obj_out != lp.objective_name)
        line("* NAMEMAP " + obj_out + " " + lp.objective_name);
    for (int i = 0; i < lp.rows(); ++i)
        if (row_out[i] != lp.row_names[i])
            line("* NAMEMAP " + row_out[i] + " " + lp.row_names[i]);
    for (int j = 0; j < lp.cols(); ++j)
        if (col_out[j] != lp.col_names[j])
            line("* NAMEMAP " + col_out[j] + " " + lp.col_names[j]);

    line("ROWS");
    {
        std::string s;
        pad_to(s, kField1);
        s += 'N';
        pad_to(s, kField2);
        s += obj_out;
        line(s);
    }
    for (int i = 0; i < lp.rows(); ++i) {
        std::string s;
        pad_to(s, kField1);
        s += static_cast<char>(lp.senses[i]);
        pad_to(s, kField2);
        s += row_out[i];
        line(s);
    }

    // COLUMNS is column-major; gather entries per column in row order.
    std::vector<std::vector<std::pair<int, double>>> by_col(lp.cols());
    for (const Triplet& t : lp.matrix)
        by_col[t.col].emplace_back(t.row, t.value);
    for (auto& entries : by_col)
        std::sort(entries.begin(), entries.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });

    line("COLUMNS");
    for (int j = 0; j < lp.cols(); ++j) {
        std::vector<std::pair<std::string, double>> cells;
        if (lp.objective[j] != 0.0 || by_col[j].empty())
            cells.emplace_back(obj_out, lp.objective[j]);
        for (const auto& [row, value] : by_col[j])
            cells.emplace_back(row_out[row], value);
        for (std::size_t k = 0; k < cells.size(); k += 2) {
            std::string s;
            pad_to(s, kField2);
            s += col_out[j];
            pad_to(s, kField3);
            s += cells[k].first;
            pad_to(s, kField4);
            s += format_double(cells[k].second);
            if (k + 1 < cells.size()) {
                pad_to(s, kField5);
                s += cells[k + 1].first;
                pad_to(s, kField6);
                s += format_double(cells[k + 1].second);
            }
            line(s);
        }
    }

    line("RHS");
    for (int i = 0; i < lp.rows(); ++i) {
        if (lp.rhs[i] == 0.0)
            continue;
        std::string s;
        pad_to(s, kField2);
        s += "RHS";
        pad_to(s, kField3);
        s += row_out[i];
        pad_to(s, kField4);
        s += format_double(lp.rhs[i]);
        line(s);
    }

    bool any_bounds = false;
    for (int j = 0; j < lp.cols(); ++j)
        if (lp.col_lower[j] != 0.0 || lp.col_upper[j] < kInf)
            any_bounds = true;
    if (any_bounds) {
        line("BOUNDS");
        auto bound_line = [&](const char* type, int j, const char* value) {
            std::string s;
            pad_to(s, kField1);
            s += type;
            pad_to(s, kField2);
            s += "BND";
            pad_to(s, kField3);
            s += col_out[j];
            if (value) {
                pad_to(s, kField4);
                s += value;
            }
            line(s);
        };
        for (int j = 0; j < lp.cols(); ++j) {
            double lo = lp.col_lower[j], up = lp.col_upper[j];
            if (lo == 0.0 && up >= kInf)
                continue;
            if (lo == up) {
                bound_line("FX", j, format_double(lo).c_str());
                continue;
            }
            if (lo <= -kInf && up >= kInf) {
                bound_line("FR", j, nullptr);
                continue;
            }
            if (lo <= -kInf)
                bound_line("MI", j, nullptr);
            else if (lo != 0.0)
                bound_line("LO", j, format_double(lo).c_str());
            if (up < kInf)
                bound_line("UP", j, format_double(up).c_str());
        }
    }
    line("ENDATA");
    return text;
}

inline StandardFormLP read_mps(const std::string& text)
{
    using namespace detail;
    StandardFormLP lp;
    lp.objective_name.clear();

    std::map<std::string, std::string> name_map;
    std::map<std::string, int> row_of, col_of;
    enum class Section { None, Rows, Columns, Rhs, Ranges, Bounds, Done };
    Section section = Section::None;

    auto fail = [](int line_no, const std::string& msg) {
        throw ParseError("mps line " + std::to_string(line_no) + ": " + msg);
    };
    auto number = [&](std::string_view tok, int line_no) {
        double v;
        if (!parse_double(tok, v))
            fail(line_no, "expected a number, got \"" + std::string(tok) + "\"");
        return v;
    };
    auto row_id = [&](const std::string& name, int line_no) {
        auto it = row_of.find(name);
        if (it == row_of.end())
            fail(line_no, "unknown row \"" + name + "\"");
        return it->second;
    };
    auto col_id = [&](const std::string& name, int line_no) {
        auto it = col_of.find(name);
        if (it == col_of.end())
            fail(line_no, "unknown column \"" + name + "\"");
        return it->second;
    };

    std::map<int, double> ranges;

    std::size_t pos = 0;
    int line_no = 0;
    while (pos <= text.size() && section != Section::Done) {
        std::size_t eol = text.find('\n', pos);
        std::string_view raw(text.data() + pos,
                             (eol == std::string::npos ? text.size() : eol) - pos);
        pos = (eol == std::string::npos) ? text.size() + 1 : eol + 1;
        ++line_no;
        if (raw.empty())
            continue;
        if (raw[0] == '*') {
            auto toks = tokens(raw.substr(1));
            if (toks.size() == 3 && toks[0] == "NAMEMAP")
                name_map[std::string(toks[1])] = std::string(toks[2]);
            continue;
        }
        auto toks = tokens(raw);
        if (toks.empty())
            continue;

        if (raw[0] != ' ' && raw[0] != '\t') {
            std::string head(toks[0]);
            if (head == "NAME")
                continue;
            if (head == "ROWS")
                section = Section::Rows;
            else if (head == "COLUMNS")
                section = Section::Columns;
            else if (head == "RHS")
                section = Section::Rhs;
            else if (head == "RANGES")
                section = Section::Ranges;
            else if (head == "BOUNDS")
                section = Section::Bounds;
            else if (head == "ENDATA")
                section = Section::Done;
            else if (head == "OBJSENSE" || head == "MARKER")
                fail(line_no, "unsupported section \"" + head + "\"");
            else
                fail(line_no, "unknown section \"" + head + "\"");
            continue;
        }

        switch (section) {
        case Section::Rows: {
            if (toks.size() != 2 || toks[0].size() != 1)
                fail(line_no, "row line needs a sense and a name");
            char sense = toks[0][0];
            std::string name(toks[1]);
            if (sense == 'N') {
                if (!lp.objective_name.empty())
                    fail(line_no, "second objective row \"" + name + "\"");
                lp.objective_name = name;
                break;
            }
            if (sense != 'L' && sense != 'G' && sense != 'E')
                fail(line_no, std::string("unknown row sense \"") + sense + "\"");
            if (row_of.count(name))
                fail(line_no, "duplicate row \"" + name + "\"");
            row_of[name] = lp.add_row(name, static_cast<RowSense>(sense), 0.0);
            break;
        }
        case Section::Columns: {
            if (toks.size() != 3 && toks.size() != 5)
                fail(line_no, "column line needs name/row/value groups");
            if (toks[1] == "'MARKER'" || toks[0] == "'MARKER'")
                fail(line_no, "integer markers are not supported");
            std::string col(toks[0]);
            auto it = col_of.find(col);
            int j;
            if (it == col_of.end()) {
                j = lp.add_column(col, 0.0, kInf, 0.0);
                col_of[col] = j;
            } else {
                j = it->second;
            }
            for (std::size_t k = 1; k + 1 < toks.size(); k += 2) {
                std::string row(toks[k]);
                double v = number(toks[k + 1], line_no);
                if (row == lp.objective_name)
                    lp.objective[j] += v;
                else
                    lp.add_entry(row_id(row, line_no), j, v);
            }
            break;
        }
        case Section::Rhs: {
            if (toks.size() != 3 && toks.size() != 5)
                fail(line_no, "rhs line needs name/row/value groups");
            for (std::size_t k = 1; k + 1 < toks.size(); k += 2) {
                std::string row(toks[k]);
                if (row == lp.objective_name)
                    fail(line_no, "objective offsets are not supported");
                lp.rhs[row_id(row, line_no)] = number(toks[k + 1], line_no);
            }
            break;
        }
        case Section::Ranges: {
            if (toks.size() != 3 && toks.size() != 5)
                fail(line_no, "ranges line needs name/row/value groups");
            for (std::size_t k = 1; k + 1 < toks.size(); k += 2)
                ranges[row_id(std::string(toks[k]), line_no)] = number(toks[k + 1], line_no);
            break;
        }
        case Section::Bounds: {
            std::string type(toks[0]);
            bool has_value = type == "UP" || type == "LO" || type == "FX";
            if (toks.size() != (has_value ? 4u : 3u)) {
                if (type == "FR" || type == "MI" || type == "PL" || has_value)
                    fail(line_no, "bound line has the wrong number of fields");
                fail(line_no, "unsupported bound type \"" + type + "\"");
            }
            int j = col_id(std::string(toks[2]), line_no);
            if (type == "UP") {
                lp.col_upper[j] = number(toks[3], line_no);
            } else if (type == "LO") {
                lp.col_lower[j] = number(toks[3], line_no);
            } else if (type == "FX") {
                lp.col_lower[j] = lp.col_upper[j] = number(toks[3], line_no);
            } else if (type == "FR") {
                lp.col_lower[j] = -kInf;
                lp.col_upper[j] = kInf;
            } else if (type == "MI") {
                lp.col_lower[j] = -kInf;
            } else if (type == "PL") {
                lp.col_upper[j] = kInf;
            } else {
                fail(line_no, "unsupported bound type \"" + type + "\"");
            }
            break;
        }
        case Section::None:
            fail(line_no, "data before any section header");
            break;
        case Section::Done:
            break;
        }
    }

    if (lp.objective_name.empty())
        fail(line_no, "no objective (N) row found");

    // A ranged row becomes a second row bounding the same activity from the
    // other side; entries are duplicated.
    if (!ranges.empty()) {
        std::vector<std::vector<Triplet>> per_row(lp.rows());
        for (const Triplet& t : lp.matrix)
            per_row[t.row].push_back(t);
        for (const auto& [i, r] : ranges) {
            double b = lp.rhs[i];
            RowSense opposite;
            double other;
            switch (lp.senses[i]) {
            case RowSense::LessEqual:
                opposite = RowSense::GreaterEqual;
                other = b - std::abs(r);
                break;
            case RowSense::GreaterEqual:
                opposite = RowSense::LessEqual;
                other = b + std::abs(r);
                break;
            case RowSense::Equal:
            default:
                lp.senses[i] = RowSense::GreaterEqual;
                if (r >= 0) {
                    opposite = RowSense::LessEqual;
                    other = b + r;
                } else {
                    opposite = RowSense::LessEqual;
                    lp.rhs[i] = b + r;
                    other = b;
                }
                break;
            }
            int extra = lp.add_row(lp.row_names[i] + ".range", opposite, other);
            for (const Triplet& t : per_row[i])
                lp.add_entry(extra, t.col, t.value);
        }
    }

    auto restore = [&](std::string& name) {
        auto it = name_map.find(name);
        if (it != name_map.end())
            name = it->second;
    };
    restore(lp.objective_name);
    for (auto& n : lp.row_names)
        restore(n);
    for (auto& n : lp.col_names)
        restore(n);

    lp.validate();
    return lp;
}

} // namespace battplan
