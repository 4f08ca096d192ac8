#pragma once
// Newsvendor recourse model: buy x_j copies of each newspaper type, sell y_j
// of them on the realized day and return the rest.
//   objective 1 (loss):  (c - r) x + E[(r - q) y]
//   objective 2 (time):  E[t(omega) y],  t_j(omega) = 200 / demand_j(omega) by default
//   sum_j x_j <= capacity,  0 <= y <= x  (optionally also y <= demand)

#include "flexrec/recourse.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace flexrec {

struct NewspaperType
{
    std::string name;
    Rational purchase; ///< c
    Rational sell;     ///< q
    Rational ret;      ///< r, refund per returned copy
};

struct DemandTable
{
    std::vector<std::string> types;
    std::vector<std::string> days;
    std::vector<std::vector<Rational>> demand; ///< day x type, positive integers
};

struct NewsvendorSpec
{
    std::vector<NewspaperType> types;
    DemandTable demand;
    Rational capacity;
    std::optional<std::vector<std::vector<Rational>>> time; ///< day x type minutes; default 200 / demand
    bool demand_cap = false;
};

/** Input error in a newsvendor data file, with row/column or key location. */
class NewsvendorFormatError : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ','))
        cells.push_back(cell);
    if (!line.empty() && line.back() == ',')
        cells.emplace_back();
    for (auto& c : cells) {
        auto b = c.find_first_not_of(" \t\r");
        auto e = c.find_last_not_of(" \t\r");
        c = b == std::string::npos ? std::string{} : c.substr(b, e - b + 1);
    }
    return cells;
}

} // namespace detail

/**
 * Demand CSV: a header "day,<type>,<type>,..." and one "label,<int>,<int>,..."
 * row per day. Blank lines are ignored.
 */
inline DemandTable parse_demand_csv(const std::string& text)
{
    DemandTable t;
    std::istringstream is(text);
    std::string line;
    std::size_t lineno = 0;
    bool header = true;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        auto cells = detail::split_csv_line(line);
        if (header) {
            if (cells.size() < 2)
                throw NewsvendorFormatError("demand CSV row 1: header needs a label column and at least one type");
            t.types.assign(cells.begin() + 1, cells.end());
            header = false;
            continue;
        }
        if (cells.size() != t.types.size() + 1)
            throw NewsvendorFormatError("demand CSV row " + std::to_string(lineno) + ": " +
                                        std::to_string(cells.size()) + " cells, expected " +
                                        std::to_string(t.types.size() + 1));
        t.days.push_back(cells[0]);
        std::vector<Rational> row;
        for (std::size_t j = 1; j < cells.size(); ++j) {
            const std::string& c = cells[j];
            bool digits = !c.empty() && c.find_first_not_of("0123456789") == std::string::npos;
            if (!digits || Rational::parse(c).sign() <= 0)
                throw NewsvendorFormatError("demand CSV row " + std::to_string(lineno) + ", column " +
                                            std::to_string(j + 1) + ": '" + c + "' is not a positive integer");
            row.push_back(Rational::parse(c));
        }
        t.demand.push_back(std::move(row));
    }
    if (header)
        throw NewsvendorFormatError("demand CSV is empty");
    if (t.days.empty())
        throw NewsvendorFormatError("demand CSV has no days");
    return t;
}

/** {"types":[{"name":"JP","purchase":"3","sell":"11/2","return":"1"}, ...]} */
inline std::vector<NewspaperType> parse_prices_json(const std::string& text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw NewsvendorFormatError(std::string("prices: ") + e.what());
    }
    if (!j.is_object() || !j.contains("types") || !j["types"].is_array())
        throw NewsvendorFormatError("prices: missing key /types");
    auto rational = [](const nlohmann::json& v, const std::string& path) {
        if (v.is_number_integer())
            return Rational::parse(v.dump());
        if (v.is_string()) {
            try {
                return Rational::parse(v.get<std::string>());
            } catch (const std::invalid_argument& e) {
                throw NewsvendorFormatError("prices " + path + ": " + e.what());
            }
        }
        throw NewsvendorFormatError("prices " + path + ": expected a rational (\"num/den\" string or integer); use num/den form");
    };
    std::vector<NewspaperType> out;
    for (std::size_t i = 0; i < j["types"].size(); ++i) {
        const auto& t = j["types"][i];
        const std::string base = "/types/" + std::to_string(i);
        for (const char* key : {"name", "purchase", "sell", "return"})
            if (!t.contains(key))
                throw NewsvendorFormatError("prices: missing key " + base + "/" + key);
        if (!t["name"].is_string())
            throw NewsvendorFormatError("prices " + base + "/name: expected a string");
        out.push_back({t["name"].get<std::string>(), rational(t["purchase"], base + "/purchase"),
                       rational(t["sell"], base + "/sell"), rational(t["return"], base + "/return")});
    }
    if (out.empty())
        throw NewsvendorFormatError("prices: no newspaper types");
    return out;
}

/** Price orderings that usually hold (r <= c < q); violations are reported, not rejected. */
inline std::vector<std::string> newsvendor_warnings(const NewsvendorSpec& spec)
{
    std::vector<std::string> w;
    for (const auto& t : spec.types) {
        if (t.ret > t.purchase)
            w.push_back("type '" + t.name + "': return price exceeds purchase price");
        if (t.purchase >= t.sell)
            w.push_back("type '" + t.name + "': purchase price is not below selling price");
    }
    return w;
}

inline RecourseProblem build_newsvendor(const NewsvendorSpec& spec)
{
    const std::size_t n = spec.types.size();
    const std::size_t N = spec.demand.days.size();
    if (n == 0)
        throw PreconditionError("newsvendor model needs at least one newspaper type");
    if (N == 0)
        throw PreconditionError("newsvendor model needs at least one day");
    if (spec.demand.types.size() != n)
        throw DimensionError("demand table has " + std::to_string(spec.demand.types.size()) + " types, prices have " +
                             std::to_string(n));
    for (std::size_t j = 0; j < n; ++j)
        if (spec.demand.types[j] != spec.types[j].name)
            throw PreconditionError("demand column " + std::to_string(j + 1) + " is '" + spec.demand.types[j] +
                                    "' but price entry " + std::to_string(j + 1) + " is '" + spec.types[j].name + "'");
    for (const auto& row : spec.demand.demand)
        for (const auto& x : row)
            if (x.sign() <= 0)
                throw PreconditionError("demands must be positive");
    if (spec.capacity.sign() <= 0)
        throw PreconditionError("capacity must be positive");

    RecourseProblem rp;
    rp.name = "newsvendor";
    rp.C = RatMatrix(2, n);
    for (std::size_t j = 0; j < n; ++j)
        rp.C(0, j) = spec.types[j].purchase - spec.types[j].ret;
    rp.A = RatMatrix(1, n);
    for (std::size_t j = 0; j < n; ++j)
        rp.A(0, j) = 1;
    rp.b = {spec.capacity};
    rp.first_stage_senses = {Sense::Le};

    const std::size_t l = spec.demand_cap ? 2 * n : n;
    for (std::size_t i = 0; i < N; ++i) {
        Scenario s;
        s.label = spec.demand.days[i];
        s.p = Rational(1, static_cast<long long>(N));
        s.Q = RatMatrix(2, n);
        for (std::size_t j = 0; j < n; ++j) {
            s.Q(0, j) = spec.types[j].ret - spec.types[j].sell;
            s.Q(1, j) = spec.time ? spec.time->at(i).at(j) : Rational(200) / spec.demand.demand[i][j];
        }
        s.T = RatMatrix(l, n);
        s.W = RatMatrix(l, n);
        s.u.assign(l, Rational{});
        s.senses.assign(l, Sense::Le);
        for (std::size_t j = 0; j < n; ++j) {
            s.T(j, j) = -1; // y_j - x_j <= 0
            s.W(j, j) = 1;
            if (spec.demand_cap) {
                s.W(n + j, j) = 1; // y_j <= demand_j
                s.u[n + j] = spec.demand.demand[i][j];
            }
        }
        rp.scenarios.push_back(std::move(s));
    }
    return rp;
}

} // namespace flexrec
