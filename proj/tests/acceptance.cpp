// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Every comparison is exact.

#include "flexrec/surrogates.hpp"
#include "support/instances.hpp"
#include "support/newsvendor_fixture.hpp"
#include "support/oracles.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include <unistd.h>

using namespace flexrec;

namespace {

const Rational third(1, 3);

/** Collects the first failed expectation of a criterion. */
class Tally
{
public:
    void expect(bool ok, const std::string& what)
    {
        ++checks_;
        if (!ok && failure_.empty())
            failure_ = what;
    }
    bool passed() const { return failure_.empty(); }
    const std::string& failure() const { return failure_; }
    std::size_t checks() const { return checks_; }

private:
    std::string failure_;
    std::size_t checks_ = 0;
};

struct Corpus
{
    std::vector<RecourseProblem> random;      // 50 general instances
    std::vector<RecourseProblem> constant_qw; // 25 instances with scenario-constant Q and W
    std::vector<SetSolution> random_solutions;
};

Corpus make_corpus()
{
    Corpus c;
    std::mt19937 rng(20240611);
    for (int i = 0; i < 50; ++i)
        c.random.push_back(instances::random_instance(rng));
    instances::GeneratorOptions opt;
    opt.constant_QW = true;
    for (int i = 0; i < 25; ++i)
        c.constant_qw.push_back(instances::random_instance(rng, opt));
    return c;
}

std::string tag(const RecourseProblem& rp, std::size_t i) { return rp.name + " #" + std::to_string(i); }

std::vector<RecourseProblem> newsvendors()
{
    std::vector<RecourseProblem> out{instances::newsvendor2(), instances::newsvendor3()};
    out[0].name = "2-day";
    out[1].name = "3-day";
    return out;
}

/** Rational weights (k, 25 - k) / 25 for k = 1..24. */
std::vector<RatVector> weight_sweep()
{
    std::vector<RatVector> w;
    for (int k = 1; k < 25; ++k)
        w.push_back({Rational(k, 25), Rational(25 - k, 25)});
    return w;
}

Rational min_dot(const RatVector& w, const std::vector<RatVector>& pts)
{
    Rational best = dot(w, pts.front());
    for (const auto& p : pts)
        best = std::min(best, dot(w, p));
    return best;
}

std::string vertices_text(const std::vector<RatVector>& vs)
{
    std::string s = "{";
    for (std::size_t i = 0; i < vs.size(); ++i)
        s += (i ? ", " : "") + to_string(vs[i]);
    return s + "}";
}

void upper_image_two_day(Tally& t)
{
    const std::vector<RatVector> expected{{-600, 1000 * third}, {-500, 200}, {0, 0}};
    auto images = fixture::newsvendor2_vertex_images();
    t.expect(oracle::frontier_2d(images) == expected, "basis enumeration frontier");

    auto rp = instances::newsvendor2();
    Molp de = deterministic_equivalent(rp);
    auto sweep = weight_sweep();
    t.expect(sweep.size() >= 20, "sweep size");
    for (const auto& w : sweep) {
        Rational oracle_min = min_dot(w, images);
        t.expect(oracle_min == min_dot(w, expected), "enumeration vs vertex set at weight " + to_string(w));
        auto r = solve_lp(de.scalarization(w));
        t.expect(r.status == LpStatus::Optimal && r.value == oracle_min, "scalarization at weight " + to_string(w));
    }
    if (!t.passed())
        return;

    UpperSet P = recourse_upper_image(rp).set;
    t.expect(P.vertices() == expected, "vertices " + vertices_text(P.vertices()));
    t.expect(P.rays() == std::vector<RatVector>{{0, 1}, {1, 0}}, "rays");
}

void efficient_outcome(Tally& t)
{
    auto rp = instances::newsvendor2();
    const RatVector v{-250, 100};
    UpperSet P = recourse_upper_image(rp).set;
    UpperSet f0 = evaluate_F(rp, RatVector{100, 0}), f1 = evaluate_F(rp, RatVector{100, 100});
    t.expect(contains_point(P, v), "(-250, 100) in the upper image");
    t.expect(is_minimal_point(P, v), "(-250, 100) minimal");
    t.expect(contains_point(f0, v), "(-250, 100) in F((100, 0))");
    t.expect(contains_point(f1, v), "(-250, 100) in F((100, 100))");
    t.expect(contains_set(f1, f0), "F((100, 100)) contains F((100, 0))");
    t.expect(!contains_set(f0, f1), "F((100, 0)) does not contain F((100, 100))");
}

void three_decision_solution(Tally& t)
{
    auto rp = instances::newsvendor2();
    const std::vector<RatVector> xs{{0, 200}, {100, 100}, {200, 0}};
    auto check = validate_set_solution(rp, xs);
    for (const auto& d : check.decisions)
        t.expect(d.feasible && d.minimal, "decision " + to_string(d.x) + " certified minimal");
    t.expect(check.infimum_attained, "infimum attained");
    std::vector<UpperSet> parts;
    for (const auto& x : xs)
        parts.push_back(evaluate_F(rp, x));
    t.expect(convex_union(parts, 2) == recourse_upper_image(rp).set, "convex hull of the union equals the upper image");
}

void solution_certificates(Tally& t, Corpus& c)
{
    auto certify = [&](const RecourseProblem& rp, const SetSolution& sol, const std::string& name) {
        std::vector<RatVector> xs;
        for (const auto& e : sol.entries) {
            xs.push_back(e.x);
            for (const auto& v : e.certificate)
                t.expect(v.sign() <= 0, name + ": minimality certificate of " + to_string(e.x));
        }
        t.expect(!sol.entries.empty(), name + ": no entries");
        t.expect(sol.infimum_attained, name + ": infimum attainment");
        t.expect(validate_set_solution(rp, xs).valid(), name + ": independent re-validation");
    };
    for (const auto& rp : newsvendors())
        certify(rp, solve_set_problem(rp), rp.name);
    for (std::size_t i = 0; i < c.random.size(); ++i) {
        c.random_solutions.push_back(solve_set_problem(c.random[i]));
        certify(c.random[i], c.random_solutions.back(), tag(c.random[i], i));
    }
}

void property_suites(Tally& t, const Corpus& c)
{
    std::mt19937 rng(77);
    auto run = [&](const RecourseProblem& rp, const SetSolution& sol, const std::string& name) {
        for (const auto& e : solve_molp(deterministic_equivalent(rp)).entries)
            t.expect(prop31_check(rp, e.z), name + ": scenario-wise minimality of " + to_string(e.z));

        std::vector<RatVector> xs;
        for (const auto& e : sol.entries)
            xs.push_back(e.x);
        for (int k = 0; k < 3; ++k)
            xs.push_back(instances::random_first_stage(rng, rp));
        for (const auto& x : xs)
            t.expect(expectation_identity_check(rp, x), name + ": expectation identity at " + to_string(x));

        t.expect(upper_image_star_check(rp, sol), name + ": upper image of the set problem");

        UpperSet P = sol.upper_image;
        t.expect(contains_set(wait_and_see(rp).combined, P), name + ": wait-and-see contains recourse");

        // arbitrary x >= 0, feasible or not
        std::vector<RatVector> any = xs;
        for (int k = 0; k < 3; ++k) {
            RatVector x(rp.n());
            for (auto& xj : x)
                xj = Rational(std::uniform_int_distribution<int>(0, 400)(rng), 2);
            any.push_back(x);
        }
        for (const auto& x : any)
            t.expect(contains_set(P, eev_upper_image(rp, x).set), name + ": recourse contains EEV at " + to_string(x));
    };
    for (const auto& rp : newsvendors())
        run(rp, solve_set_problem(rp), rp.name);
    for (std::size_t i = 0; i < c.random.size(); ++i)
        run(c.random[i], c.random_solutions[i], tag(c.random[i], i));
}

void ev_hypotheses(Tally& t, const Corpus& c)
{
    for (std::size_t i = 0; i < c.constant_qw.size(); ++i) {
        const auto& rp = c.constant_qw[i];
        t.expect(contains_set(upper_image(expected_value_problem(rp)).set, recourse_upper_image(rp).set),
                 tag(rp, i) + ": EV contains RP");
    }
    auto rp3 = instances::newsvendor3();
    UpperSet ev = upper_image(expected_value_problem(rp3)).set, P = recourse_upper_image(rp3).set;
    t.expect(!contains_set(ev, P), "three-day: EV contains RP");
    auto w = containment_witness(ev.polyhedron(), P.polyhedron());
    t.expect(w.has_value(), "three-day: no witness");
    if (w) {
        t.expect(contains_point(P, *w) && !contains_point(ev, *w), "three-day: witness " + to_string(*w));
        bool is_vertex = std::find(P.vertices().begin(), P.vertices().end(), *w) != P.vertices().end();
        t.expect(is_vertex, "three-day: witness is not a vertex of the recourse upper image");
    }
}

void wait_and_see_checks(Tally& t, const Corpus& c)
{
    auto rp = instances::newsvendor2();
    auto ws = wait_and_see(rp);
    const std::vector<RatVector> expected{{-600, 1000 * third}, {-550, 700 * third}, {-500, 200}, {0, 0}};

    // oracle: enumerate each day's (x, y) polyhedron, then merge the halves by slope
    std::vector<std::vector<RatVector>> days;
    for (const auto& s : rp.scenarios) {
        std::vector<oracle::Row> rows{{{1, 1, 0, 0}, -1, 200}, {{-1, 0, 1, 0}, -1, 0}, {{0, -1, 0, 1}, -1, 0}};
        std::vector<RatVector> Pm{{2, 0, s.Q(0, 0), s.Q(0, 1)}, {0, 0, s.Q(1, 0), s.Q(1, 1)}};
        std::vector<RatVector> outs;
        for (const auto& z : oracle::enumerate_vertices(rows, 4))
            outs.push_back(oracle::multiply(Pm, z));
        days.push_back(oracle::scaled(oracle::frontier_2d(outs), s.p));
    }
    t.expect(oracle::slope_merge(days[0], days[1]) == expected, "slope-merge oracle");
    t.expect(ws.combined.vertices() == expected, "vertices " + vertices_text(ws.combined.vertices()));

    UpperSet P = recourse_upper_image(rp).set;
    const RatVector strict{-550, 700 * third};
    t.expect(contains_set(ws.combined, P) && !contains_set(P, ws.combined), "strict containment");
    t.expect(contains_point(ws.combined, strict) && !contains_point(P, strict), "strictness witness");

    std::vector<std::pair<std::string, const RecourseProblem*>> all;
    auto nv = newsvendors();
    for (const auto& r : nv)
        all.emplace_back(r.name, &r);
    for (std::size_t i = 0; i < c.random.size(); ++i)
        all.emplace_back(tag(c.random[i], i), &c.random[i]);
    for (std::size_t i = 0; i < c.constant_qw.size(); ++i)
        all.emplace_back(tag(c.constant_qw[i], i) + " (constant Q, W)", &c.constant_qw[i]);
    for (const auto& [name, r] : all)
        t.expect(wait_and_see_monolithic(*r) == wait_and_see(*r).combined, name + ": monolithic vs decomposed");
}

void evpi_checks(Tally& t, const Corpus& c)
{
    auto rp = instances::newsvendor2();
    UpperSet P = recourse_upper_image(rp).set;
    UpperSet ws = wait_and_see(rp).combined;
    auto a = evpi(P, ws, RatVector{-250, 100});
    t.expect(a.region.vertices() == std::vector<RatVector>{{0, 0}} && a.region.rays().empty(),
             "EVPI((-250, 100)) = {(0, 0)}");
    t.expect(contains_point(evpi(P, ws, RatVector{-550, 800 * third}).region, RatVector{0, 100 * third}),
             "(0, 100/3) in EVPI((-550, 800/3))");

    auto zero_in_region = [&](const RecourseProblem& r, const std::string& name) {
        UpperSet Pr = recourse_upper_image(r).set, wr = wait_and_see(r).combined;
        Polyhedron both = intersect(Pr.polyhedron(), wr.polyhedron());
        std::vector<RatVector> tested = both.vertices();
        for (const auto& v : both.vertices())
            for (const auto& ray : both.rays())
                tested.push_back(v + ray);
        for (const auto& v : tested)
            t.expect(contains_point(evpi(Pr, wr, v).region, RatVector(r.d())), name + ": 0 in EVPI(" + to_string(v) + ")");
    };
    for (const auto& r : newsvendors())
        zero_in_region(r, r.name);
    for (std::size_t i = 0; i < c.random.size(); ++i)
        zero_in_region(c.random[i], tag(c.random[i], i));
}

void expected_value_checks(Tally& t, std::string& info)
{
    auto rp = instances::newsvendor2();
    auto ev = expected_value_recourse(rp);
    t.expect(validate_set_solution(ev, {{200, 0}, {0, 200}, {75, 125}}).valid(), "EV* set {(200,0), (0,200), (75,125)}");

    for (const auto& r : newsvendors()) {
        auto rep = inclusion_report(r);
        Rational rp_gain = -min_dot(RatVector{1, 0}, recourse_upper_image(r).set.vertices());
        t.expect(rep.max_gain.recourse == rp_gain, r.name + ": recourse max gain");
        std::optional<Rational> eev_gain;
        for (const auto& x : rep.eev_decisions) {
            auto e = eev_upper_image(r, x);
            if (e.set.is_empty())
                continue;
            Rational g = -min_dot(RatVector{1, 0}, e.set.vertices());
            eev_gain = eev_gain ? std::max(*eev_gain, g) : g;
        }
        t.expect(rep.max_gain.eev == eev_gain, r.name + ": EEV max gain");
        info += (info.empty() ? "" : "; ") + r.name + " max gain: RP " + rep.max_gain.recourse.str() + ", EEV " +
                (rep.max_gain.eev ? rep.max_gain.eev->str() : "none");
    }
}

std::string run_capture(const std::string& cmd, int& status)
{
    std::string out;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) {
        status = -1;
        return out;
    }
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, p)) > 0)
        out.append(buf, n);
    status = pclose(p);
    return out;
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void determinism(Tally& t)
{
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / ("flexrec-acceptance-" + std::to_string(::getpid()));
    fs::create_directories(dir);
    const std::string cli = FLEXREC_CLI, data = FLEXREC_DATA_DIR;
    struct Run
    {
        std::string args;
        bool svg;
    };
    const std::vector<Run> runs{{"solve " + data + "/newsvendor2.json", true},
                                {"solve " + data + "/newsvendor3.json", true},
                                {"ws " + data + "/newsvendor2.json", true},
                                {"ws " + data + "/newsvendor3.json", true},
                                {"report " + data + "/newsvendor2.json", false},
                                {"report " + data + "/newsvendor3.json", false}};
    for (const auto& r : runs) {
        std::string out[2], svg[2];
        for (int k = 0; k < 2; ++k) {
            fs::path svg_file = dir / ("run" + std::to_string(k) + ".svg");
            int status = 0;
            out[k] = run_capture(cli + " " + r.args + (r.svg ? " --svg " + svg_file.string() : ""), status);
            t.expect(status == 0, r.args + ": exit status " + std::to_string(status));
            if (r.svg)
                svg[k] = slurp(svg_file);
        }
        t.expect(!out[0].empty() && out[0] == out[1], r.args + ": stdout differs");
        if (r.svg)
            t.expect(!svg[0].empty() && svg[0] == svg[1], r.args + ": SVG differs");
    }
    fs::remove_all(dir);
}

} // namespace

int main()
{
    Corpus corpus = make_corpus();
    std::string gains;
    struct Criterion
    {
        std::string title;
        std::function<void(Tally&)> run;
    };
    const std::vector<Criterion> criteria{
        {"two-day upper image vertices and rays, two oracles agree", upper_image_two_day},
        {"(-250, 100) efficient, in both F, flexibility ordering", efficient_outcome},
        {"{(0,200), (100,100), (200,0)} validates as a solution", three_decision_solution},
        {"solver output certified on 2-day, 3-day and 50 random instances",
         [&](Tally& t) { solution_certificates(t, corpus); }},
        {"property suites on newsvendor and 50 random instances", [&](Tally& t) { property_suites(t, corpus); }},
        {"EV contains RP on 25 constant Q, W instances; three-day violation witnessed",
         [&](Tally& t) { ev_hypotheses(t, corpus); }},
        {"wait-and-see vertices, strictness, monolithic equals decomposed",
         [&](Tally& t) { wait_and_see_checks(t, corpus); }},
        {"EVPI regions", [&](Tally& t) { evpi_checks(t, corpus); }},
        {"expected value solution validates; max gains computed", [&](Tally& t) { expected_value_checks(t, gains); }},
        {"solve, ws, report stdout and SVG byte-identical across runs", determinism},
    };

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Tally t;
        auto start = std::chrono::steady_clock::now();
        try {
            criteria[i].run(t);
        } catch (const std::exception& e) {
            t.expect(false, std::string("exception: ") + e.what());
        }
        std::cout << (t.passed() ? "PASS" : "FAIL") << "  " << (i + 1 < 10 ? " " : "") << i + 1 << "  "
                  << criteria[i].title << " (" << t.checks() << " checks, "
                  << std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count()
                  << " ms)";
        if (!t.passed())
            std::cout << ": " << t.failure();
        if (i == 8 && !gains.empty())
            std::cout << ": " << gains;
        std::cout << std::endl;
        failed += !t.passed();
    }
    std::cout << (failed ? std::to_string(failed) + " criteria failed" : "all criteria passed") << "\n";
    return failed ? 1 : 0;
}
