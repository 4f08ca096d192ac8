#include "catch_amalgamated.hpp"

#include "flexrec/io/json.hpp"
#include "flexrec/io/newsvendor.hpp"
#include "flexrec/io/svg.hpp"
#include "support/instances.hpp"

#include <fstream>
#include <sstream>

using namespace flexrec;

namespace {

std::string read_file(const std::string& path)
{
    std::ifstream in(path);
    REQUIRE(in);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const std::string data_dir = FLEXREC_DATA_DIR;

Json minimal_document()
{
    return Json::parse(R"({
      "name": "tiny", "d": 2, "n": 1, "m": 1, "k": 1, "l": 1,
      "C": [["1"], [0]], "A": [[1]], "b": ["5"], "first_stage_senses": ["<="],
      "scenarios": [{"label": "only", "p": "1", "Q": [["-2"], ["1/2"]], "T": [[-1]], "W": [[1]],
                     "u": [0], "senses": ["<="]}]
    })");
}

std::string error_of(const std::string& text)
{
    try {
        parse_problem(text);
    } catch (const std::exception& e) {
        return e.what();
    }
    return "";
}

std::size_t count(const std::string& s, const std::string& needle)
{
    std::size_t n = 0;
    for (auto pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos + 1))
        ++n;
    return n;
}

} // namespace

TEST_CASE("demand CSV")
{
    auto t2 = parse_demand_csv(read_file(data_dir + "/demand2.csv"));
    CHECK(t2.types == std::vector<std::string>{"JP", "BT"});
    CHECK(t2.days == std::vector<std::string>{"Mon", "Tue"});
    CHECK(t2.demand == std::vector<std::vector<Rational>>{{200, 150}, {200, 100}});
    auto t3 = parse_demand_csv(read_file(data_dir + "/demand3.csv"));
    REQUIRE(t3.demand.size() == 3);
    CHECK(t3.demand[2] == std::vector<Rational>{50, 220});

    CHECK_THROWS_WITH(parse_demand_csv("day,JP,BT\nMon,200,abc\n"),
                      "demand CSV row 2, column 3: 'abc' is not a positive integer");
    CHECK_THROWS_WITH(parse_demand_csv("day,JP,BT\nMon,200\n"), "demand CSV row 2: 2 cells, expected 3");
    CHECK_THROWS_AS(parse_demand_csv("day,JP\nMon,0\n"), NewsvendorFormatError);
    CHECK_THROWS_AS(parse_demand_csv("day,JP\nMon,3.5\n"), NewsvendorFormatError);
    CHECK_THROWS_AS(parse_demand_csv(""), NewsvendorFormatError);
}

TEST_CASE("prices JSON and the newsvendor generator")
{
    auto types = parse_prices_json(read_file(data_dir + "/prices.json"));
    REQUIRE(types.size() == 2);
    CHECK(types[0].sell == Rational(11, 2));
    CHECK_THROWS_WITH(parse_prices_json(R"({"types":[{"name":"JP","purchase":"3","sell":"5.5","return":"1"}]})"),
                      "prices /types/0/sell: malformed rational '5.5': use num/den form");
    CHECK_THROWS_WITH(parse_prices_json(R"({"types":[{"name":"JP","purchase":"3","sell":"5"}]})"),
                      "prices: missing key /types/0/return");

    NewsvendorSpec spec{types, parse_demand_csv(read_file(data_dir + "/demand2.csv")), 200, std::nullopt, false};
    auto rp = build_newsvendor(spec);
    CHECK(rp == instances::newsvendor2());
    CHECK(build_newsvendor(spec) == rp);
    CHECK(newsvendor_warnings(spec).empty());

    spec.demand = parse_demand_csv(read_file(data_dir + "/demand3.csv"));
    CHECK(build_newsvendor(spec).scenarios[2].Q.row_vector(1) == RatVector{4, Rational(10, 11)});

    NewsvendorSpec single{{types[0]}, DemandTable{{"JP"}, {"Mon"}, {{200}}}, 200, std::nullopt, false};
    auto s = build_newsvendor(single);
    CHECK(s.n() == 1);
    CHECK(s.m() == 1);
    CHECK(s.N() == 1);
    CHECK(validate(s).ok());

    NewsvendorSpec odd = spec;
    odd.types[1].ret = 3;
    CHECK(newsvendor_warnings(odd) == std::vector<std::string>{"type 'BT': return price exceeds purchase price"});

    NewsvendorSpec empty = spec;
    empty.demand.days.clear();
    empty.demand.demand.clear();
    CHECK_THROWS_AS(build_newsvendor(empty), PreconditionError);

    spec.demand_cap = true;
    auto capped = build_newsvendor(spec);
    CHECK(capped.l() == 4);
    CHECK(capped.scenarios[2].u == RatVector{0, 0, 50, 220});
    CHECK(validate(capped).ok());
}

TEST_CASE("problem documents")
{
    auto rp = parse_problem(minimal_document().dump());
    CHECK(rp.N() == 1);
    CHECK(rp.C == RatMatrix{{1}, {0}});

    Json doc = minimal_document();
    doc["scenarios"][0]["p"] = "1/2";
    doc["scenarios"].push_back(doc["scenarios"][0]);
    doc["scenarios"][1]["label"] = "other";
    doc["scenarios"][1]["p"] = "1/3";
    CHECK(error_of(doc.dump()) == "probabilities sum to 5/6 ≠ 1");

    doc = minimal_document();
    doc["b"][0] = "3.5";
    CHECK(error_of(doc.dump()) == "/b/0: malformed rational '3.5': use num/den form");
    doc["b"][0] = 3.5;
    CHECK(error_of(doc.dump()) == "/b/0: malformed rational '3.5': use num/den form");

    doc = minimal_document();
    doc.erase("C");
    CHECK(error_of(doc.dump()) == "/C: missing key");
    doc = minimal_document();
    doc["scenarios"][0].erase("W");
    CHECK(error_of(doc.dump()) == "/scenarios/0/W: missing key");

    doc = minimal_document();
    doc["scenarios"][0]["u"] = Json::array({0, 1});
    CHECK(error_of(doc.dump()) == "/scenarios/0/u: dimension mismatch: length 2, expected l = 1");
    doc = minimal_document();
    doc["C"][1] = Json::array({1, 2});
    CHECK(error_of(doc.dump()) == "/C/1: dimension mismatch: length 2, expected n = 1");

    doc = minimal_document();
    doc["scenarios"][0]["senses"][0] = "<";
    CHECK(error_of(doc.dump()).find("/scenarios/0/senses/0: unknown sense") == 0);
    CHECK(error_of("{") .find("/: malformed JSON") == 0);

    try {
        doc = minimal_document();
        doc["A"] = Json::array({Json::array({1, 1})});
        parse_problem(doc.dump());
        FAIL("expected an error");
    } catch (const ProblemFormatError& e) {
        CHECK(e.path() == "/A/0");
    }
}

TEST_CASE("problem documents round-trip")
{
    std::vector<RecourseProblem> problems{instances::newsvendor2(), instances::newsvendor3(),
                                          instances::newsvendor(3, true), parse_problem(minimal_document().dump())};
    std::mt19937 rng(99);
    for (int i = 0; i < 10; ++i)
        problems.push_back(instances::random_instance(rng));
    for (const auto& rp : problems) {
        std::string text = serialize(rp);
        RecourseProblem back = parse_problem(text);
        CHECK(back == rp);
        CHECK(serialize(back) == text);
    }
    CHECK(parse_problem(read_file(data_dir + "/newsvendor2.json")) == instances::newsvendor2());
    CHECK(parse_problem(read_file(data_dir + "/newsvendor3.json")) == instances::newsvendor3());
}

TEST_CASE("result JSON")
{
    auto rp = instances::newsvendor2();
    auto u = recourse_upper_image(rp);
    Json j = to_json(u.set, true);
    CHECK(j["vertices"] == Json::parse(R"([["-600","1000/3"],["-500","200"],["0","0"]])"));
    CHECK(j["gain_vertices"] == Json::parse(R"([["600","1000/3"],["500","200"],["0","0"]])"));
    CHECK(j["rays"] == Json::parse(R"([["0","1"],["1","0"]])"));
    CHECK(j["empty"] == false);
    CHECK(to_json(UpperSet::empty_set(2))["empty"] == true);

    auto rep = inclusion_report(instances::newsvendor3());
    Json r = to_json(rep);
    std::vector<std::string> names;
    for (const auto& rel : r["relations"])
        names.push_back(rel["name"]);
    CHECK(names[0] == "WS⊇RP");
    CHECK(names[1] == "EV⊇RP");
    CHECK(names[2] == "RP⊇EEV(x)");
    CHECK(r["relations"][1]["status"] == "violated");
    CHECK(r["relations"][1]["witness"].is_array());
}

TEST_CASE("SVG export")
{
    auto rp = instances::newsvendor2();
    UpperSet P = recourse_upper_image(rp).set;
    std::string a = export_svg({{"P", P}});
    CHECK(a == export_svg({{"P", P}}));
    CHECK(count(a, "<polygon") == 1);
    CHECK(count(a, "<circle") == 3);
    CHECK(count(a, "#b0b0b0") >= 1);
    CHECK(a.find("gain (€)") != std::string::npos);
    CHECK(a.find("work time (minutes)") != std::string::npos);

    std::string b = export_svg({{"P", P}, {"F((100,0))", evaluate_F(rp, RatVector{100, 0})}});
    CHECK(count(b, "<polygon") == 2);
    CHECK(count(b, "<circle") == 5);
    CHECK(b.find("<g id=\"set-0\">") < b.find("<g id=\"set-1\">"));

    SvgView plain;
    plain.negate_axis_1 = false;
    CHECK(export_svg({{"P", P}}, plain).find("gain (€)") == std::string::npos);

    std::string e = export_svg({{"P", P}, {"F((300,0))", evaluate_F(rp, RatVector{300, 0})}});
    CHECK(e.find("F((300,0)) (empty)") != std::string::npos);

    CHECK_THROWS_WITH(export_svg({}), "SVG export needs at least one set");
    auto three = UpperSet(Polyhedron::from_v(VRep{3, {{0, 0, 0}}, {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}));
    CHECK_THROWS_WITH(export_svg({{"3d", three}}), "SVG export requires two objectives");
}
