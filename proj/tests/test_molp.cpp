#include "catch_amalgamated.hpp"

#include "flexrec/molp.hpp"
#include "support/newsvendor_fixture.hpp"

#include <random>

using namespace flexrec;

namespace {

const Rational third(1, 3);

Molp newsvendor_de()
{
    auto P = fixture::newsvendor2_objective();
    Molp m = Molp::nonnegative(RatMatrix::from_rows(P, 6));
    for (const auto& r : fixture::newsvendor2_rows())
        m.add_row(r.a, Sense::Le, r.rhs);
    return m;
}

std::vector<RatVector> weight_grid(std::size_t d)
{
    std::vector<RatVector> out;
    if (d == 2) {
        for (int a = 1; a <= 5; ++a)
            for (int b = 1; b <= 5; ++b)
                out.push_back({Rational(a), Rational(b, 3)});
    } else {
        for (int a = 1; a <= 3; ++a)
            for (int b = 1; b <= 3; ++b)
                for (int c = 1; c <= 3; ++c)
                    out.push_back({Rational(a), Rational(b, 2), Rational(c)});
    }
    return out;
}

Molp random_molp(std::mt19937& rng)
{
    std::uniform_int_distribution<int> dim(2, 3), vars(2, 4), rows(0, 3), obj(-3, 3), coef(0, 3), rhs(2, 9);
    const std::size_t d = dim(rng), q = vars(rng);
    RatMatrix P(d, q);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < q; ++j)
            P(i, j) = obj(rng);
    Molp m = Molp::nonnegative(P);
    for (std::size_t j = 0; j < q; ++j)
        m.upper[j] = Rational(5);
    const int k = rows(rng);
    for (int i = 0; i < k; ++i) {
        RatVector a(q);
        for (auto& x : a)
            x = coef(rng);
        m.add_row(a, Sense::Le, rhs(rng));
    }
    return m;
}

} // namespace

TEST_CASE("single objective reduces to a scalar LP")
{
    Molp m = Molp::nonnegative(RatMatrix{{1}});
    m.lower[0] = Rational(2);
    m.upper[0] = Rational(5);
    auto u = upper_image(m);
    CHECK(u.set.vertices() == std::vector<RatVector>{{2}});
    CHECK(u.set.rays() == std::vector<RatVector>{{1}});
    auto sol = solve_molp(m);
    REQUIRE(sol.entries.size() == 1);
    CHECK(sol.entries[0].z == RatVector{2});
}

TEST_CASE("identity objective over the unit square")
{
    Molp m = Molp::nonnegative(RatMatrix::identity(2));
    m.upper = {Rational(1), Rational(1)};
    auto u = upper_image(m);
    CHECK(u.set.vertices() == std::vector<RatVector>{{0, 0}});
    CHECK(u.set.rays() == std::vector<RatVector>{{0, 1}, {1, 0}});
}

TEST_CASE("newsvendor deterministic equivalent")
{
    Molp m = newsvendor_de();
    const std::vector<RatVector> expected{{-600, 1000 * third}, {-500, 200}, {0, 0}};

    // Oracle 1: basis enumeration of the 6-variable polyhedron.
    REQUIRE(oracle::frontier_2d(fixture::newsvendor2_vertex_images()) == expected);
    // Oracle 2: weighted-sum sweep; each optimum is attained at one of the expected vertices.
    auto grid = weight_grid(2);
    REQUIRE(grid.size() >= 20);
    for (const auto& w : grid) {
        auto r = solve_lp(m.scalarization(w));
        REQUIRE(r.status == LpStatus::Optimal);
        Rational best = dot(w, expected[0]);
        for (const auto& v : expected)
            best = std::min(best, dot(w, v));
        CHECK(r.value == best);
    }

    auto u = upper_image(m);
    CHECK(u.set.vertices() == expected);
    CHECK(u.set.rays() == std::vector<RatVector>{{0, 1}, {1, 0}});
    CHECK(check_A2(u.set));
    REQUIRE(u.witnesses.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(m.is_feasible(u.witnesses[i]));
        CHECK(m.objective * u.witnesses[i] == u.set.vertices()[i]);
    }
    CHECK(upper_image_by_projection(m).set == u.set);
}

TEST_CASE("is_minimal_point")
{
    Molp m = newsvendor_de();
    auto u = upper_image(m);
    for (const auto& v : u.set.vertices())
        CHECK(is_minimal_point(u, v));
    CHECK(is_minimal_point(u, RatVector{-250, 100}));
    CHECK_FALSE(is_minimal_point(u, RatVector{0, 50}));
    CHECK_THROWS_AS(is_minimal_point(u, RatVector{-1000, 0}), PreconditionError);
}

TEST_CASE("minimizer_for_vertex")
{
    Molp m = newsvendor_de();
    auto u = upper_image(m);
    CHECK(minimizer_for_vertex(m, u, RatVector{-500, 200}) == RatVector{200, 0, 200, 0, 200, 0});
    CHECK(minimizer_for_vertex(m, u, RatVector{0, 0}) == RatVector(6));
    CHECK(minimizer_for_vertex(m, u, RatVector{-600, 1000 * third}) == RatVector{0, 200, 0, 200, 0, 200});
}

TEST_CASE("solve_molp on the newsvendor")
{
    Molp m = newsvendor_de();
    auto sol = solve_molp(m);
    REQUIRE(sol.entries.size() == 3);
    Rational best = dot(RatVector{1, 1}, sol.entries[0].value);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(sol.entries[i].value == sol.image.set.vertices()[i]);
        best = std::min(best, dot(RatVector{1, 1}, sol.entries[i].value));
    }
    CHECK(best == -300);
}

TEST_CASE("infeasible and unbounded problems")
{
    Molp infeasible = Molp::nonnegative(RatMatrix::identity(2));
    infeasible.add_row({1, 1}, Sense::Le, -1);
    CHECK_THROWS_AS(upper_image(infeasible), InfeasibleError);
    CHECK_THROWS_AS(upper_image_by_projection(infeasible), InfeasibleError);

    Molp unbounded = Molp::nonnegative(RatMatrix{{1, 0}, {-1, 1}});
    unbounded.add_row({0, 1}, Sense::Le, 1);
    try {
        upper_image(unbounded);
        FAIL("expected UnboundedError");
    } catch (const UnboundedError& e) {
        CHECK(e.code() == "unbounded");
        bool outside = false;
        for (const auto& x : e.direction())
            outside = outside || x.sign() < 0;
        CHECK(outside);
    }
    CHECK_THROWS_AS(upper_image_by_projection(unbounded), UnboundedError);

    Molp bad = Molp::nonnegative(RatMatrix::identity(2));
    bad.add_row({1}, Sense::Le, 1);
    CHECK_THROWS_AS(upper_image(bad), DimensionError);
}

TEST_CASE("random MOLPs: upper image properties")
{
    std::mt19937 rng(8128);
    for (int trial = 0; trial < 40; ++trial) {
        Molp m = random_molp(rng);
        const std::size_t d = m.dim();
        auto u = upper_image(m);

        CHECK(upper_image_by_projection(m).set == u.set);
        CHECK(check_A2(u.set));
        for (std::size_t i = 0; i < d; ++i)
            CHECK(contains_direction(u.set.polyhedron(), unit_vector(d, i)));

        VRep hull;
        hull.dim = d;
        hull.vertices = u.set.vertices();
        UpperSet rebuilt = hat(hull);
        CHECK(contains_set(rebuilt, u.set));
        CHECK(contains_set(u.set, rebuilt));

        for (std::size_t k = 0; k < u.set.vertices().size(); ++k) {
            const auto& v = u.set.vertices()[k];
            CHECK(is_minimal_point(u, v));
            CHECK(m.is_feasible(u.witnesses[k]));
            CHECK(m.objective * u.witnesses[k] == v);
        }

        for (const auto& w : weight_grid(d)) {
            auto r = solve_lp(m.scalarization(w));
            REQUIRE(r.status == LpStatus::Optimal);
            Rational best = dot(w, u.set.vertices()[0]);
            for (const auto& v : u.set.vertices())
                best = std::min(best, dot(w, v));
            CHECK(r.value == best);
        }

        auto sol = solve_molp(m);
        REQUIRE(sol.entries.size() == u.set.vertices().size());
        for (std::size_t k = 0; k < sol.entries.size(); ++k) {
            CHECK(m.is_feasible(sol.entries[k].z));
            CHECK(m.objective * sol.entries[k].z == sol.entries[k].value);
            CHECK(sol.entries[k].value == u.set.vertices()[k]);
        }
    }
}
