#pragma once
// JSON problem documents and JSON views of results. Rationals are written as
// canonical "num/den" strings (or "num" for integers) and read from strings or
// JSON integers.

#include "flexrec/surrogates.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <string_view>
#include <vector>

namespace flexrec {

using Json = nlohmann::json;

/** Structural problem in a document; what() is "<path>: <message>". */
class ProblemFormatError : public std::invalid_argument
{
public:
    ProblemFormatError(std::string path, const std::string& message)
        : std::invalid_argument((path.empty() ? std::string("/") : path) + ": " + message), path_(std::move(path)),
          message_(message)
    {}
    const std::string& path() const { return path_; }
    const std::string& message() const { return message_; }

private:
    std::string path_;
    std::string message_;
};

/** Well-formed document whose problem fails validate(). */
class ProblemValidationError : public std::invalid_argument
{
public:
    explicit ProblemValidationError(std::vector<std::string> failures)
        : std::invalid_argument(failures.empty() ? "invalid problem" : failures.front()), failures_(std::move(failures))
    {}
    const std::vector<std::string>& failures() const { return failures_; }

private:
    std::vector<std::string> failures_;
};

namespace detail {

inline const Json& require_key(const Json& obj, const std::string& key, const std::string& path)
{
    if (!obj.is_object())
        throw ProblemFormatError(path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end())
        throw ProblemFormatError(path + "/" + key, "missing key");
    return *it;
}

inline Rational rational_from_json(const Json& v, const std::string& path)
{
    if (v.is_number_integer())
        return Rational::parse(v.dump());
    if (v.is_number_float())
        throw ProblemFormatError(path, "malformed rational '" + v.dump() + "': use num/den form");
    if (!v.is_string())
        throw ProblemFormatError(path, "expected a rational as a \"num/den\" string or an integer");
    try {
        return Rational::parse(v.get<std::string>());
    } catch (const std::invalid_argument& e) {
        throw ProblemFormatError(path, e.what());
    }
}

inline std::size_t size_from_json(const Json& obj, const std::string& key, const std::string& path)
{
    const Json& v = require_key(obj, key, path);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
        throw ProblemFormatError(path + "/" + key, "expected a nonnegative integer");
    return v.get<std::size_t>();
}

inline RatVector vector_from_json(const Json& v, std::size_t len, const std::string& path, const char* len_name)
{
    if (!v.is_array())
        throw ProblemFormatError(path, "expected an array");
    if (v.size() != len)
        throw ProblemFormatError(path, "dimension mismatch: length " + std::to_string(v.size()) + ", expected " +
                                           len_name + " = " + std::to_string(len));
    RatVector out;
    for (std::size_t i = 0; i < v.size(); ++i)
        out.push_back(rational_from_json(v[i], path + "/" + std::to_string(i)));
    return out;
}

inline RatMatrix matrix_from_json(const Json& v, std::size_t rows, std::size_t cols, const std::string& path,
                                  const char* row_name, const char* col_name)
{
    if (!v.is_array())
        throw ProblemFormatError(path, "expected an array of rows");
    if (v.size() != rows)
        throw ProblemFormatError(path, "dimension mismatch: " + std::to_string(v.size()) + " rows, expected " +
                                           row_name + " = " + std::to_string(rows));
    RatMatrix M(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        RatVector r = vector_from_json(v[i], cols, path + "/" + std::to_string(i), col_name);
        for (std::size_t j = 0; j < cols; ++j)
            M(i, j) = r[j];
    }
    return M;
}

inline std::vector<Sense> senses_from_json(const Json& v, std::size_t len, const std::string& path, const char* len_name)
{
    if (!v.is_array())
        throw ProblemFormatError(path, "expected an array");
    if (v.size() != len)
        throw ProblemFormatError(path, "dimension mismatch: length " + std::to_string(v.size()) + ", expected " +
                                           len_name + " = " + std::to_string(len));
    std::vector<Sense> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const std::string p = path + "/" + std::to_string(i);
        if (!v[i].is_string())
            throw ProblemFormatError(p, "expected one of \"<=\", \"=\", \">=\"");
        const std::string s = v[i].get<std::string>();
        if (s == "<=")
            out.push_back(Sense::Le);
        else if (s == "=")
            out.push_back(Sense::Eq);
        else if (s == ">=")
            out.push_back(Sense::Ge);
        else
            throw ProblemFormatError(p, "unknown sense '" + s + "', expected one of \"<=\", \"=\", \">=\"");
    }
    return out;
}

} // namespace detail

inline Json to_json(const Rational& r) { return r.str(); }

inline Json to_json(std::span<const Rational> v)
{
    Json a = Json::array();
    for (const auto& x : v)
        a.push_back(x.str());
    return a;
}

inline Json to_json(const std::vector<RatVector>& vs)
{
    Json a = Json::array();
    for (const auto& v : vs)
        a.push_back(to_json(v));
    return a;
}

inline Json to_json(const RatMatrix& M)
{
    Json a = Json::array();
    for (std::size_t i = 0; i < M.rows(); ++i)
        a.push_back(to_json(M.row(i)));
    return a;
}

inline Json to_json(const std::vector<Sense>& senses)
{
    Json a = Json::array();
    for (Sense s : senses)
        a.push_back(to_string(s));
    return a;
}

/** Structural parse: every key present, every shape consistent with d, n, m, k, l. No validate(). */
inline RecourseProblem problem_from_json(const Json& doc)
{
    using namespace detail;
    if (!doc.is_object())
        throw ProblemFormatError("", "expected an object");
    RecourseProblem rp;
    if (doc.contains("name")) {
        if (!doc["name"].is_string())
            throw ProblemFormatError("/name", "expected a string");
        rp.name = doc["name"].get<std::string>();
    }
    const std::size_t d = size_from_json(doc, "d", ""), n = size_from_json(doc, "n", ""),
                      m = size_from_json(doc, "m", ""), k = size_from_json(doc, "k", ""),
                      l = size_from_json(doc, "l", "");
    rp.C = matrix_from_json(require_key(doc, "C", ""), d, n, "/C", "d", "n");
    rp.A = matrix_from_json(require_key(doc, "A", ""), k, n, "/A", "k", "n");
    rp.b = vector_from_json(require_key(doc, "b", ""), k, "/b", "k");
    rp.first_stage_senses = senses_from_json(require_key(doc, "first_stage_senses", ""), k, "/first_stage_senses", "k");
    const Json& scen = require_key(doc, "scenarios", "");
    if (!scen.is_array())
        throw ProblemFormatError("/scenarios", "expected an array");
    for (std::size_t i = 0; i < scen.size(); ++i) {
        const std::string p = "/scenarios/" + std::to_string(i);
        const Json& s = scen[i];
        Scenario sc;
        const Json& label = require_key(s, "label", p);
        if (!label.is_string())
            throw ProblemFormatError(p + "/label", "expected a string");
        sc.label = label.get<std::string>();
        sc.p = rational_from_json(require_key(s, "p", p), p + "/p");
        sc.Q = matrix_from_json(require_key(s, "Q", p), d, m, p + "/Q", "d", "m");
        sc.T = matrix_from_json(require_key(s, "T", p), l, n, p + "/T", "l", "n");
        sc.W = matrix_from_json(require_key(s, "W", p), l, m, p + "/W", "l", "m");
        sc.u = vector_from_json(require_key(s, "u", p), l, p + "/u", "l");
        sc.senses = senses_from_json(require_key(s, "senses", p), l, p + "/senses", "l");
        rp.scenarios.push_back(std::move(sc));
    }
    // Zero-row blocks carry no column count of their own.
    if (k == 0)
        rp.A = RatMatrix(0, n);
    for (auto& sc : rp.scenarios)
        if (l == 0) {
            sc.T = RatMatrix(0, n);
            sc.W = RatMatrix(0, m);
        }
    return rp;
}

/** Parses and validates a problem document. */
inline RecourseProblem parse_problem(std::string_view text)
{
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ProblemFormatError("", std::string("malformed JSON: ") + e.what());
    }
    RecourseProblem rp = problem_from_json(doc);
    auto report = validate(rp);
    if (!report.ok())
        throw ProblemValidationError(report.failures);
    return rp;
}

inline Json to_json(const RecourseProblem& rp)
{
    Json doc;
    doc["name"] = rp.name;
    doc["d"] = rp.d();
    doc["n"] = rp.n();
    doc["m"] = rp.m();
    doc["k"] = rp.k();
    doc["l"] = rp.l();
    doc["C"] = to_json(rp.C);
    doc["A"] = to_json(rp.A);
    doc["b"] = to_json(rp.b);
    doc["first_stage_senses"] = to_json(rp.first_stage_senses);
    doc["scenarios"] = Json::array();
    for (const auto& s : rp.scenarios)
        doc["scenarios"].push_back({{"label", s.label},
                                    {"p", to_json(s.p)},
                                    {"Q", to_json(s.Q)},
                                    {"T", to_json(s.T)},
                                    {"W", to_json(s.W)},
                                    {"u", to_json(s.u)},
                                    {"senses", to_json(s.senses)}});
    return doc;
}

inline std::string serialize(const RecourseProblem& rp) { return to_json(rp).dump(2) + "\n"; }

inline Json to_json(const HRep& h)
{
    Json rows = Json::array();
    for (std::size_t i = 0; i < h.size(); ++i)
        rows.push_back({{"a", to_json(h.A.row(i))}, {"b", to_json(h.b[i])}, {"sense", h.equality[i] ? "=" : ">="}});
    return rows;
}

inline Json to_json(const Polyhedron& p)
{
    Json j{{"dim", p.dim()}, {"empty", p.is_empty()}};
    j["vertices"] = p.is_empty() ? Json::array() : to_json(p.vertices());
    j["rays"] = p.is_empty() ? Json::array() : to_json(p.rays());
    j["inequalities"] = p.is_empty() ? Json::array() : to_json(p.hrep());
    return j;
}

/** With gain_mirror, adds the vertices with the first coordinate negated (loss shown as gain). */
inline Json to_json(const UpperSet& u, bool gain_mirror = false)
{
    Json j = to_json(u.polyhedron());
    if (gain_mirror) {
        Json g = Json::array();
        if (!u.is_empty())
            for (auto v : u.vertices()) {
                v[0] = -v[0];
                g.push_back(to_json(v));
            }
        j["gain_vertices"] = g;
    }
    return j;
}

inline Json to_json(const UpperImage& u, bool gain_mirror = false)
{
    Json j = to_json(u.set, gain_mirror);
    j["witnesses"] = to_json(u.witnesses);
    return j;
}

inline Json to_json(const SetSolution& sol, bool gain_mirror = false)
{
    Json entries = Json::array();
    for (const auto& e : sol.entries)
        entries.push_back({{"x", to_json(e.x)},
                           {"F", to_json(e.F, gain_mirror)},
                           {"certificate", to_json(e.certificate)},
                           {"anchors", to_json(e.anchors)},
                           {"improvements", e.improvements}});
    return {{"upper_image", to_json(sol.upper_image, gain_mirror)},
            {"entries", entries},
            {"vertex_cover", sol.vertex_cover},
            {"infimum_attained", sol.infimum_attained}};
}

inline Json to_json(const SetValidation& v)
{
    Json ds = Json::array();
    for (const auto& d : v.decisions)
        ds.push_back({{"x", to_json(d.x)},
                      {"feasible", d.feasible},
                      {"minimal", d.minimal},
                      {"improving_x", d.improving_x ? to_json(*d.improving_x) : Json(nullptr)}});
    return {{"decisions", ds},
            {"minimality", v.minimality},
            {"infimum_attained", v.infimum_attained},
            {"uncovered", v.uncovered ? to_json(*v.uncovered) : Json(nullptr)},
            {"valid", v.valid()}};
}

inline Json to_json(const RecourseProblem& rp, const WsDecomposition& ws)
{
    Json scen = Json::array();
    for (std::size_t i = 0; i < ws.scenarios.size(); ++i)
        scen.push_back({{"label", rp.scenarios[i].label},
                        {"p", to_json(rp.scenarios[i].p)},
                        {"upper_image", to_json(ws.scenarios[i])}});
    return {{"scenarios", scen}, {"combined", to_json(ws.combined)}};
}

inline Json to_json(const EvpiRegion& e) { return {{"v", to_json(e.v)}, {"region", to_json(e.region)}}; }

inline Json to_json(std::span<const Rational> x, const EevResult& e)
{
    Json j{{"x", to_json(x)}, {"upper_image", to_json(e.set)}, {"infeasible", e.infeasible}};
    if (e.infeasible)
        j["message"] = EevResult::infeasible_message;
    return j;
}

inline Json to_json(const InclusionReport& rep)
{
    auto opt = [](const std::optional<RatVector>& v) { return v ? to_json(*v) : Json(nullptr); };
    Json rels = Json::array();
    for (const auto& r : rep.relations) {
        Json j{{"name", r.name},
               {"holds", r.holds},
               {"status", r.holds ? "holds" : "violated"},
               {"asserted", r.asserted},
               {"witness", opt(r.witness)},
               {"reverse_witness", opt(r.reverse)}};
        if (r.x)
            j["x"] = to_json(*r.x);
        if (!r.note.empty())
            j["note"] = r.note;
        rels.push_back(std::move(j));
    }
    return {{"hypotheses", {{"Q_constant", rep.q_constant}, {"W_constant", rep.w_constant}}},
            {"relations", rels},
            {"eev_decisions", to_json(rep.eev_decisions)},
            {"max_gain",
             {{"recourse", to_json(rep.max_gain.recourse)},
              {"eev", rep.max_gain.eev ? to_json(*rep.max_gain.eev) : Json(nullptr)},
              {"agree", rep.max_gain.agree}}}};
}

/** A decision or outcome given as a JSON array of rationals. */
inline RatVector vector_from_json(const Json& v, const std::string& path)
{
    if (!v.is_array())
        throw ProblemFormatError(path, "expected an array of rationals");
    RatVector out;
    for (std::size_t i = 0; i < v.size(); ++i)
        out.push_back(detail::rational_from_json(v[i], path + "/" + std::to_string(i)));
    return out;
}

} // namespace flexrec
