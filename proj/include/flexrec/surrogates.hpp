#pragma once
// Wait-and-see, perfect-information and expected-value surrogates of a recourse problem.

#include "flexrec/recourse.hpp"

#include <future>
#include <optional>
#include <string>
#include <vector>

namespace flexrec {

struct WsDecomposition
{
    std::vector<UpperImage> scenarios; ///< upper image of each single-scenario problem over (x, y)
    UpperSet combined;                 ///< sum_i p_i * scenarios[i]
};

/** Both stages decided after observing scenario i: variables (x, y), objective (C, Q_i). */
inline Molp wait_and_see_molp(const RecourseProblem& rp, std::size_t i)
{
    RecourseProblem single = rp;
    single.scenarios = {rp.scenarios.at(i)};
    single.scenarios[0].p = 1;
    return deterministic_equivalent(single);
}

inline WsDecomposition wait_and_see(const RecourseProblem& rp)
{
    rp.check_dimensions();
    std::vector<std::future<UpperImage>> jobs;
    for (std::size_t i = 0; i < rp.N(); ++i)
        jobs.push_back(std::async(std::launch::async, [&rp, i] { return upper_image(wait_and_see_molp(rp, i)); }));
    WsDecomposition ws;
    std::optional<UpperSet> sum;
    for (std::size_t i = 0; i < rp.N(); ++i) {
        const std::string& label = rp.scenarios[i].label;
        try {
            ws.scenarios.push_back(jobs[i].get());
        } catch (const UnboundedError& e) {
            throw SolverError("unbounded", "scenario '" + label + "': " + e.what());
        } catch (const InfeasibleError&) {
            throw InfeasibleError("scenario '" + label + "': infeasible");
        }
        UpperSet term = scale(ws.scenarios.back().set, rp.scenarios[i].p);
        sum = sum ? minkowski_sum(*sum, term) : term;
    }
    ws.combined = *sum;
    return ws;
}

/** The wait-and-see problem as one MOLP over (x^1, y^1, ..., x^N, y^N). */
inline Molp wait_and_see_monolithic_molp(const RecourseProblem& rp)
{
    rp.check_dimensions();
    const std::size_t block = rp.n() + rp.m(), vars = rp.N() * block;
    RatMatrix P(rp.d(), vars);
    std::vector<LpRow> rows;
    for (std::size_t i = 0; i < rp.N(); ++i) {
        Molp single = wait_and_see_molp(rp, i);
        const Rational& p = rp.scenarios[i].p;
        for (std::size_t r = 0; r < rp.d(); ++r)
            for (std::size_t j = 0; j < block; ++j)
                P(r, i * block + j) = p * single.objective(r, j);
        for (const auto& row : single.rows) {
            RatVector c(vars);
            detail::append_block(c, i * block, row.coeffs);
            rows.push_back(LpRow{std::move(c), row.sense, row.rhs});
        }
    }
    Molp mo = Molp::nonnegative(std::move(P));
    mo.rows = std::move(rows);
    return mo;
}

inline UpperSet wait_and_see_monolithic(const RecourseProblem& rp)
{
    return upper_image(wait_and_see_monolithic_molp(rp)).set;
}

struct EvpiRegion
{
    RatVector v;
    Polyhedron region; ///< { e >= 0 : v - e in the wait-and-see upper image }
};

/** Improvements of outcome v available under perfect information; v must lie in the upper image. */
inline EvpiRegion evpi(const UpperSet& rp_image, const UpperSet& ws, std::span<const Rational> v)
{
    if (v.size() != rp_image.dim())
        throw DimensionError("outcome " + to_string(v) + " in dimension " + std::to_string(rp_image.dim()));
    if (!contains_point(rp_image, v))
        throw PreconditionError("decision not in upper image");
    const std::size_t d = ws.dim();
    const HRep& h = ws.hrep();
    HRep region;
    region.dim = d;
    region.A = RatMatrix(0, d);
    for (std::size_t i = 0; i < d; ++i)
        region.add(unit_vector(d, i), Rational{});
    // H (v - e) >= h  <=>  -H e >= h - H v
    for (std::size_t i = 0; i < h.size(); ++i) {
        RatVector a = Rational(-1) * h.A.row_vector(i);
        region.add(a, h.b[i] - dot(h.A.row(i), v), h.equality[i]);
    }
    EvpiRegion out{RatVector(v.begin(), v.end()), Polyhedron::from_h(region)};
    if (out.region.is_empty())
        throw SolverError("internal", "perfect-information region of " + to_string(v) + " is empty");
    return out;
}

inline EvpiRegion evpi(const RecourseProblem& rp, std::span<const Rational> v)
{
    return evpi(recourse_upper_image(rp).set, wait_and_see(rp).combined, v);
}

/** Random data replaced by expectations: a one-scenario problem with E[Q], E[T], E[W], E[u]. */
inline RecourseProblem expected_value_recourse(const RecourseProblem& rp)
{
    rp.check_dimensions();
    const Scenario& first = rp.scenarios.front();
    Scenario ev{"EV", Rational{1}, RatMatrix(rp.d(), rp.m()), RatMatrix(rp.l(), rp.n()), RatMatrix(rp.l(), rp.m()),
                RatVector(rp.l()), first.senses};
    for (const auto& s : rp.scenarios) {
        if (s.senses != first.senses)
            throw PreconditionError("scenario '" + s.label +
                                    "' has different row senses; expectations of its rows are undefined");
        for (std::size_t r = 0; r < rp.d(); ++r)
            for (std::size_t j = 0; j < rp.m(); ++j)
                ev.Q(r, j) += s.p * s.Q(r, j);
        for (std::size_t r = 0; r < rp.l(); ++r) {
            for (std::size_t j = 0; j < rp.n(); ++j)
                ev.T(r, j) += s.p * s.T(r, j);
            for (std::size_t j = 0; j < rp.m(); ++j)
                ev.W(r, j) += s.p * s.W(r, j);
            ev.u[r] += s.p * s.u[r];
        }
    }
    RecourseProblem out = rp;
    out.name = rp.name + " (expected value)";
    out.scenarios = {std::move(ev)};
    return out;
}

/** The expected value problem as an MOLP over (x, y). */
inline Molp expected_value_problem(const RecourseProblem& rp)
{
    return deterministic_equivalent(expected_value_recourse(rp));
}

inline SetSolution solve_ev_star(const RecourseProblem& rp, const SetSolveOptions& options = {})
{
    return solve_set_problem(expected_value_recourse(rp), options);
}

struct EevResult
{
    UpperSet set;
    bool infeasible = false;
    static constexpr const char* infeasible_message = "EEV infeasible for this first-stage choice";
};

/** Outcomes of the true recourse problem with the first stage fixed at x. */
inline EevResult eev_upper_image(const RecourseProblem& rp, std::span<const Rational> x)
{
    EevResult r{evaluate_F(rp, x), false};
    r.infeasible = r.set.is_empty();
    return r;
}

struct Relation
{
    std::string name;
    bool holds = false;
    bool asserted = false;                 ///< holds is guaranteed; a violation is a defect
    std::optional<RatVector> witness;      ///< vertex of the right-hand set outside the left-hand set
    std::optional<RatVector> reverse;      ///< vertex of the left-hand set outside the right-hand set
    std::optional<RatVector> x;            ///< first-stage decision, for relations indexed by x
    std::string note;
};

struct MaxGain
{
    Rational recourse;         ///< largest gain (minus loss, objective 1) over the upper image
    std::optional<Rational> eev; ///< same over the union of EEV(x) for the expected-value solution
    bool agree = false;
};

struct InclusionReport
{
    bool q_constant = false;
    bool w_constant = false;
    std::vector<Relation> relations;
    MaxGain max_gain;
    std::vector<RatVector> eev_decisions;
};

namespace detail {

inline Relation relation(std::string name, const UpperSet& outer, const UpperSet& inner, bool asserted)
{
    Relation r;
    r.name = std::move(name);
    r.asserted = asserted;
    r.holds = contains_set(outer, inner);
    r.witness = containment_witness(outer.polyhedron(), inner.polyhedron());
    r.reverse = containment_witness(inner.polyhedron(), outer.polyhedron());
    return r;
}

inline Rational max_gain(const std::vector<RatVector>& vertices)
{
    Rational best = -vertices.front()[0];
    for (const auto& v : vertices)
        best = std::max(best, -v[0]);
    return best;
}

} // namespace detail

/**
 * Inclusions between the recourse upper image and its surrogates:
 * WS ⊇ RP always, EV ⊇ RP when Q and W do not depend on the scenario,
 * RP ⊇ EEV(x) for every x. EEV decisions default to the expected-value
 * set solution.
 */
inline InclusionReport inclusion_report(const RecourseProblem& rp, std::optional<SetSolution> ev_solution = std::nullopt,
                                        std::optional<std::vector<RatVector>> xs = std::nullopt)
{
    InclusionReport rep;
    rep.q_constant = rep.w_constant = true;
    for (const auto& s : rp.scenarios) {
        rep.q_constant = rep.q_constant && s.Q == rp.scenarios.front().Q;
        rep.w_constant = rep.w_constant && s.W == rp.scenarios.front().W;
    }
    UpperSet rp_image = recourse_upper_image(rp).set;
    UpperSet ws = wait_and_see(rp).combined;
    UpperSet ev = upper_image(expected_value_problem(rp)).set;

    rep.relations.push_back(detail::relation("WS⊇RP", ws, rp_image, true));
    Relation b = detail::relation("EV⊇RP", ev, rp_image, rep.q_constant && rep.w_constant);
    if (!b.asserted)
        b.note = "not guaranteed: Q or W depends on the scenario";
    rep.relations.push_back(std::move(b));

    if (xs) {
        rep.eev_decisions = *xs;
    } else {
        if (!ev_solution)
            ev_solution = solve_ev_star(rp);
        for (const auto& e : ev_solution->entries)
            rep.eev_decisions.push_back(e.x);
    }
    std::vector<UpperSet> eevs;
    for (const auto& x : rep.eev_decisions) {
        EevResult eev = eev_upper_image(rp, x);
        Relation c = detail::relation("RP⊇EEV(x)", rp_image, eev.set, true);
        c.x = x;
        if (eev.infeasible)
            c.note = EevResult::infeasible_message;
        else
            eevs.push_back(eev.set);
        rep.relations.push_back(std::move(c));
    }

    rep.max_gain.recourse = detail::max_gain(rp_image.vertices());
    if (!eevs.empty()) {
        rep.max_gain.eev = detail::max_gain(convex_union(eevs, rp.d()).vertices());
        rep.max_gain.agree = *rep.max_gain.eev == rep.max_gain.recourse;
    }
    return rep;
}

} // namespace flexrec
