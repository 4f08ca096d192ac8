#pragma once
// Two-stage multi-objective recourse problems:
//   minimize  C x + sum_i p_i Q_i y^i
//   s.t.      A x (senses) b,  T_i x + W_i y^i (senses_i) u_i,  x, y^i >= 0.

#include "flexrec/molp.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace flexrec {

struct Scenario
{
    std::string label;
    Rational p;
    RatMatrix Q; ///< d x m
    RatMatrix T; ///< l x n
    RatMatrix W; ///< l x m
    RatVector u; ///< l
    std::vector<Sense> senses;

    friend bool operator==(const Scenario&, const Scenario&) = default;
};

struct RecourseProblem
{
    std::string name;
    RatMatrix C; ///< d x n
    RatMatrix A; ///< k x n
    RatVector b;
    std::vector<Sense> first_stage_senses;
    std::vector<Scenario> scenarios;

    std::size_t d() const { return C.rows(); }
    std::size_t n() const { return C.cols(); }
    std::size_t m() const { return scenarios.empty() ? 0 : scenarios.front().Q.cols(); }
    std::size_t k() const { return b.size(); }
    std::size_t l() const { return scenarios.empty() ? 0 : scenarios.front().u.size(); }
    std::size_t N() const { return scenarios.size(); }

    /** Index of the scenario with this label; throws PreconditionError if unknown. */
    std::size_t scenario_index(const std::string& label) const
    {
        for (std::size_t i = 0; i < scenarios.size(); ++i)
            if (scenarios[i].label == label)
                return i;
        throw PreconditionError("unknown scenario '" + label + "'");
    }

    /** Throws DimensionError describing the first inconsistency. */
    void check_dimensions() const
    {
        auto shape = [](const RatMatrix& M) {
            return std::to_string(M.rows()) + "x" + std::to_string(M.cols());
        };
        if (d() == 0 || n() == 0)
            throw DimensionError("C must have at least one row and one column, got " + shape(C));
        if (scenarios.empty())
            throw DimensionError("at least one scenario is required");
        if (m() == 0)
            throw DimensionError("second stage needs at least one variable");
        if (A.rows() != k() || (k() > 0 && A.cols() != n()))
            throw DimensionError("A is " + shape(A) + ", expected " + std::to_string(k()) + "x" + std::to_string(n()));
        if (first_stage_senses.size() != k())
            throw DimensionError("first_stage_senses has " + std::to_string(first_stage_senses.size()) +
                                 " entries, expected " + std::to_string(k()));
        for (const auto& s : scenarios) {
            const std::string where = "scenario '" + s.label + "': ";
            if (s.Q.rows() != d() || s.Q.cols() != m())
                throw DimensionError(where + "Q is " + shape(s.Q) + ", expected " + std::to_string(d()) + "x" +
                                     std::to_string(m()));
            if (s.u.size() != l())
                throw DimensionError(where + "u has length " + std::to_string(s.u.size()) + ", expected " +
                                     std::to_string(l()));
            if (s.T.rows() != l() || (l() > 0 && s.T.cols() != n()))
                throw DimensionError(where + "T is " + shape(s.T) + ", expected " + std::to_string(l()) + "x" +
                                     std::to_string(n()));
            if (s.W.rows() != l() || (l() > 0 && s.W.cols() != m()))
                throw DimensionError(where + "W is " + shape(s.W) + ", expected " + std::to_string(l()) + "x" +
                                     std::to_string(m()));
            if (s.senses.size() != l())
                throw DimensionError(where + "senses has " + std::to_string(s.senses.size()) + " entries, expected " +
                                     std::to_string(l()));
        }
    }

    bool first_stage_feasible(std::span<const Rational> x) const
    {
        if (x.size() != n())
            throw DimensionError("first-stage decision " + to_string(x) + " has length " + std::to_string(x.size()) +
                                 ", expected " + std::to_string(n()));
        for (const auto& xj : x)
            if (xj.sign() < 0)
                return false;
        for (std::size_t i = 0; i < k(); ++i)
            if (!satisfies(dot(A.row(i), x), first_stage_senses[i], b[i]))
                return false;
        return true;
    }

    friend bool operator==(const RecourseProblem&, const RecourseProblem&) = default;
};

struct ValidationReport
{
    std::vector<std::string> failures;
    bool ok() const { return failures.empty(); }
};

namespace detail {

/** Column offset of y^i inside z = (x, y^1, ..., y^N). */
inline std::size_t y_offset(const RecourseProblem& rp, std::size_t i) { return rp.n() + i * rp.m(); }

inline void append_block(RatVector& row, std::size_t offset, std::span<const Rational> coeffs,
                         const Rational& factor = Rational{1})
{
    for (std::size_t j = 0; j < coeffs.size(); ++j)
        if (!coeffs[j].is_zero())
            row[offset + j] += factor * coeffs[j];
}

} // namespace detail

/**
 * Deterministic equivalent over z = (x, y^1, ..., y^N): objective
 * (C, p_1 Q_1, ..., p_N Q_N), rows A x (s) b and T_i x + W_i y^i (s) u_i, z >= 0.
 */
inline Molp deterministic_equivalent(const RecourseProblem& rp)
{
    rp.check_dimensions();
    const std::size_t n = rp.n(), m = rp.m(), N = rp.N(), vars = n + N * m;
    RatMatrix P(rp.d(), vars);
    for (std::size_t r = 0; r < rp.d(); ++r) {
        for (std::size_t j = 0; j < n; ++j)
            P(r, j) = rp.C(r, j);
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t j = 0; j < m; ++j)
                P(r, detail::y_offset(rp, i) + j) = rp.scenarios[i].p * rp.scenarios[i].Q(r, j);
    }
    Molp mo = Molp::nonnegative(std::move(P));
    for (std::size_t r = 0; r < rp.k(); ++r) {
        RatVector row(vars);
        detail::append_block(row, 0, rp.A.row(r));
        mo.add_row(std::move(row), rp.first_stage_senses[r], rp.b[r]);
    }
    for (std::size_t i = 0; i < N; ++i) {
        const Scenario& s = rp.scenarios[i];
        for (std::size_t r = 0; r < rp.l(); ++r) {
            RatVector row(vars);
            detail::append_block(row, 0, s.T.row(r));
            detail::append_block(row, detail::y_offset(rp, i), s.W.row(r));
            mo.add_row(std::move(row), s.senses[r], s.u[r]);
        }
    }
    return mo;
}

/** Probability axioms, dimensions, feasibility of the deterministic equivalent and boundedness. */
inline ValidationReport validate(const RecourseProblem& rp)
{
    ValidationReport rep;
    try {
        rp.check_dimensions();
    } catch (const DimensionError& e) {
        rep.failures.emplace_back(e.what());
        return rep;
    }
    Rational total;
    for (const auto& s : rp.scenarios) {
        if (s.p.sign() <= 0)
            rep.failures.push_back("probability of scenario '" + s.label + "' must be positive, got " + s.p.str());
        total += s.p;
    }
    if (total != 1)
        rep.failures.push_back("probabilities sum to " + total.str() + " ≠ 1");
    for (std::size_t i = 0; i < rp.N(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (rp.scenarios[i].label == rp.scenarios[j].label)
                rep.failures.push_back("duplicate scenario label '" + rp.scenarios[i].label + "'");

    Molp de = deterministic_equivalent(rp);
    try {
        detail::require_feasible(de);
        detail::ideal_point(de);
    } catch (const InfeasibleError&) {
        rep.failures.emplace_back("deterministic equivalent is infeasible");
    } catch (const UnboundedError& e) {
        rep.failures.push_back("upper image is unbounded: objective direction " + to_string(e.direction()) +
                               " lies outside the nonnegative orthant");
    }
    return rep;
}

/** The recourse problem's upper image, that of its deterministic equivalent. */
inline UpperImage recourse_upper_image(const RecourseProblem& rp) { return upper_image(deterministic_equivalent(rp)); }

/**
 * Second-stage part with x fixed: variables (y^1, ..., y^N), objective
 * sum_i p_i Q_i y^i (or Q_i y^i for one scenario), rows W_i y^i (s) u_i - T_i x.
 */
inline Molp fixed_first_stage(const RecourseProblem& rp, std::span<const Rational> x,
                              std::optional<std::size_t> only = std::nullopt)
{
    const std::size_t m = rp.m();
    std::vector<std::size_t> blocks;
    if (only)
        blocks.push_back(*only);
    else
        for (std::size_t i = 0; i < rp.N(); ++i)
            blocks.push_back(i);
    const std::size_t vars = blocks.size() * m;
    RatMatrix P(rp.d(), vars);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        const Scenario& s = rp.scenarios[blocks[b]];
        const Rational weight = only ? Rational{1} : s.p;
        for (std::size_t r = 0; r < rp.d(); ++r)
            for (std::size_t j = 0; j < m; ++j)
                P(r, b * m + j) = weight * s.Q(r, j);
    }
    Molp mo = Molp::nonnegative(std::move(P));
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        const Scenario& s = rp.scenarios[blocks[b]];
        for (std::size_t r = 0; r < rp.l(); ++r) {
            RatVector row(vars);
            detail::append_block(row, b * m, s.W.row(r));
            mo.add_row(std::move(row), s.senses[r], s.u[r] - dot(s.T.row(r), x));
        }
    }
    return mo;
}

namespace detail {

inline bool lp_feasible(const Molp& mo) { return solve_lp(mo.scalarization(RatVector(mo.dim()))).status == LpStatus::Optimal; }

} // namespace detail

/**
 * F(x) = E[Z](x) + R^d_+: the expected outcomes reachable by the second stage
 * after committing to x. Empty if x or any scenario's second stage is infeasible.
 */
inline UpperSet evaluate_F(const RecourseProblem& rp, std::span<const Rational> x)
{
    rp.check_dimensions();
    if (!rp.first_stage_feasible(x))
        return UpperSet::empty_set(rp.d());
    Molp mo = fixed_first_stage(rp, x);
    if (!detail::lp_feasible(mo))
        return UpperSet::empty_set(rp.d());
    return translate(upper_image(mo).set, rp.C * x);
}

/** Upper image of the scenario's second-stage problem (objective C x + Q y), with witnesses y. */
inline UpperImage second_stage_image(const RecourseProblem& rp, std::span<const Rational> x, std::size_t scenario)
{
    rp.check_dimensions();
    if (!rp.first_stage_feasible(x))
        throw PreconditionError("first-stage decision " + to_string(x) + " is infeasible");
    Molp mo = fixed_first_stage(rp, x, scenario);
    if (!detail::lp_feasible(mo))
        return UpperImage{UpperSet::empty_set(rp.d()), {}};
    UpperImage img = upper_image(mo);
    img.set = translate(img.set, rp.C * x);
    return img;
}

inline UpperSet second_stage_upper_image(const RecourseProblem& rp, std::span<const Rational> x,
                                         const std::string& label)
{
    return second_stage_image(rp, x, rp.scenario_index(label)).set;
}

/** F(x) equals the probability-weighted Minkowski sum of the scenario upper images. */
inline bool expectation_identity_check(const RecourseProblem& rp, std::span<const Rational> x)
{
    UpperSet f = evaluate_F(rp, x);
    std::optional<UpperSet> sum;
    for (std::size_t i = 0; i < rp.N(); ++i) {
        UpperSet s = second_stage_image(rp, x, i).set;
        if (s.is_empty())
            return f.is_empty();
        UpperSet term = scale(s, rp.scenarios[i].p);
        sum = sum ? minkowski_sum(*sum, term) : term;
    }
    return sum && f == *sum;
}

/** Memo of F by first-stage decision. */
class FlexCache
{
public:
    explicit FlexCache(const RecourseProblem& rp) : rp_(rp) {}

    const UpperSet& get(const RatVector& x)
    {
        auto it = cache_.find(x);
        if (it == cache_.end())
            it = cache_.emplace(x, evaluate_F(rp_, x)).first;
        return it->second;
    }

private:
    const RecourseProblem& rp_;
    std::map<RatVector, UpperSet> cache_;
};

struct ImproveResult
{
    bool improved = false;
    RatVector x;                        ///< improving decision (improved only)
    std::vector<Rational> facet_values; ///< optimum of the improvement LP per inequality of F(x_bar)
    std::size_t facet = 0;              ///< facet that produced x (improved only)
};

namespace detail {

/**
 * Improvement LP for F(x_bar): variables x, one y block per vertex of F(x_bar)
 * plus a witness y block, and w. Requires every vertex to lie in F(x) and
 * w in F(x). The objective is filled in per facet.
 */
inline LpProblem improvement_lp(const RecourseProblem& rp, const std::vector<RatVector>& vertices)
{
    const std::size_t n = rp.n(), m = rp.m(), N = rp.N(), d = rp.d();
    const std::size_t K = vertices.size();
    const std::size_t y_start = n, w_start = n + (K + 1) * N * m, vars = w_start + d;
    auto y_col = [&](std::size_t block, std::size_t i) { return y_start + (block * N + i) * m; };

    LpProblem lp = LpProblem::nonnegative(vars);
    for (std::size_t j = w_start; j < vars; ++j)
        lp.lower[j] = std::nullopt;
    for (std::size_t r = 0; r < rp.k(); ++r) {
        RatVector row(vars);
        append_block(row, 0, rp.A.row(r));
        lp.add_row(std::move(row), rp.first_stage_senses[r], rp.b[r]);
    }
    for (std::size_t block = 0; block <= K; ++block) {
        for (std::size_t i = 0; i < N; ++i) {
            const Scenario& s = rp.scenarios[i];
            for (std::size_t r = 0; r < rp.l(); ++r) {
                RatVector row(vars);
                append_block(row, 0, s.T.row(r));
                append_block(row, y_col(block, i), s.W.row(r));
                lp.add_row(std::move(row), s.senses[r], s.u[r]);
            }
        }
        for (std::size_t r = 0; r < d; ++r) {
            RatVector row(vars);
            append_block(row, 0, rp.C.row(r));
            for (std::size_t i = 0; i < N; ++i)
                append_block(row, y_col(block, i), rp.scenarios[i].Q.row(r), rp.scenarios[i].p);
            if (block < K) {
                lp.add_row(std::move(row), Sense::Le, vertices[block][r]);
            } else {
                row[w_start + r] = -1;
                lp.add_row(std::move(row), Sense::Le, Rational{});
            }
        }
    }
    return lp;
}

} // namespace detail

/**
 * Decide whether some feasible x has F(x) strictly larger than F(x_bar).
 * For each inequality H_j w >= h_j of F(x_bar) maximize h_j - H_j w over
 * x feasible, F(x) containing every vertex of F(x_bar), w in F(x). All optima
 * <= 0 certify minimality; otherwise the x part of the largest one improves.
 */
inline ImproveResult improve(const RecourseProblem& rp, const RatVector& x_bar, FlexCache& cache)
{
    const UpperSet& f_bar = cache.get(x_bar);
    if (f_bar.is_empty())
        throw PreconditionError("first-stage decision " + to_string(x_bar) + " is infeasible");
    const std::size_t d = rp.d();
    LpProblem lp = detail::improvement_lp(rp, f_bar.vertices());
    const std::size_t w_start = lp.num_vars() - d;
    const HRep& h = f_bar.hrep();

    const PreparedLp prepared(lp);

    ImproveResult res;
    std::optional<std::size_t> best;
    RatVector best_x;
    for (std::size_t j = 0; j < h.size(); ++j) {
        std::fill(lp.objective.begin(), lp.objective.end(), Rational{});
        for (std::size_t r = 0; r < d; ++r)
            lp.objective[w_start + r] = h.A(j, r);
        auto r = prepared.solve(lp.objective);
        if (r.status == LpStatus::Unbounded)
            throw UnboundedError(RatVector(r.ray.begin() + static_cast<std::ptrdiff_t>(w_start), r.ray.end()));
        if (r.status != LpStatus::Optimal)
            throw SolverError("internal", "improvement LP for " + to_string(x_bar) + " is infeasible");
        Rational value = h.b[j] - r.value;
        if (value.sign() > 0 && (!best || value > res.facet_values[*best])) {
            best = j;
            best_x.assign(r.x.begin(), r.x.begin() + static_cast<std::ptrdiff_t>(rp.n()));
        }
        res.facet_values.push_back(std::move(value));
    }
    if (!best)
        return res;
    const UpperSet& f_new = cache.get(best_x);
    if (!contains_set(f_new, f_bar) || contains_set(f_bar, f_new))
        throw SolverError("internal", "improvement step from " + to_string(x_bar) + " to " + to_string(best_x) +
                                          " does not enlarge F");
    res.improved = true;
    res.x = std::move(best_x);
    res.facet = *best;
    return res;
}

inline ImproveResult improve(const RecourseProblem& rp, const RatVector& x_bar)
{
    FlexCache cache(rp);
    return improve(rp, x_bar, cache);
}

struct SetEntry
{
    RatVector x;
    UpperSet F;
    std::vector<Rational> certificate; ///< improvement LP optima, all <= 0
    std::vector<RatVector> anchors;    ///< vertices of the upper image this entry was started from
    std::size_t improvements = 0;
};

struct SetSolution
{
    UpperSet upper_image;
    std::vector<SetEntry> entries;
    std::vector<std::size_t> vertex_cover; ///< per vertex of upper_image, an entry whose F contains it
    bool infimum_attained = false;         ///< conv of the union of all F equals upper_image
};

/** Improvement loop exceeded its budget; carries the entries finished so far. */
class BudgetExhausted : public SolverError
{
public:
    BudgetExhausted(const std::string& what, SetSolution partial)
        : SolverError("budget", what), partial_(std::move(partial))
    {}
    const SetSolution& partial() const { return partial_; }

private:
    SetSolution partial_;
};

struct SetSolveOptions
{
    std::size_t improvement_budget = 100; ///< per vertex
};

namespace detail {

inline void finish_certificates(SetSolution& sol)
{
    sol.vertex_cover.clear();
    for (const auto& v : sol.upper_image.vertices()) {
        std::size_t idx = sol.entries.size();
        for (std::size_t e = 0; e < sol.entries.size() && idx == sol.entries.size(); ++e)
            if (contains_point(sol.entries[e].F, v))
                idx = e;
        sol.vertex_cover.push_back(idx);
    }
    std::vector<UpperSet> parts;
    for (const auto& e : sol.entries)
        parts.push_back(e.F);
    sol.infimum_attained = convex_union(parts, sol.upper_image.dim()) == sol.upper_image;
}

} // namespace detail

/**
 * Set-valued solution: for each vertex of the upper image (skipping vertices
 * already inside an earlier entry's F) start at a minimizer's x and apply
 * improve until certified minimal. Entries with equal F are merged.
 */
inline SetSolution solve_set_problem(const RecourseProblem& rp, const SetSolveOptions& options = {})
{
    rp.check_dimensions();
    Molp de = deterministic_equivalent(rp);
    SetSolution sol;
    sol.upper_image = upper_image(de).set;
    FlexCache cache(rp);
    for (const auto& v : sol.upper_image.vertices()) {
        bool covered = false;
        for (auto& e : sol.entries) {
            if (contains_point(e.F, v)) {
                covered = true;
                break;
            }
        }
        if (covered)
            continue;
        RatVector z = minimizer_for_vertex(de, v);
        RatVector x(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(rp.n()));
        std::size_t steps = 0;
        ImproveResult r;
        for (;;) {
            r = improve(rp, x, cache);
            if (!r.improved)
                break;
            if (++steps > options.improvement_budget) {
                detail::finish_certificates(sol);
                throw BudgetExhausted("improvement budget of " + std::to_string(options.improvement_budget) +
                                          " steps exhausted starting from vertex " + to_string(v),
                                      sol);
            }
            x = r.x;
        }
        const UpperSet& f = cache.get(x);
        auto same = std::find_if(sol.entries.begin(), sol.entries.end(), [&](const SetEntry& e) { return e.F == f; });
        if (same != sol.entries.end()) {
            same->anchors.push_back(v);
            continue;
        }
        sol.entries.push_back(SetEntry{x, f, r.facet_values, {v}, steps});
    }
    detail::finish_certificates(sol);
    return sol;
}

struct DecisionCheck
{
    RatVector x;
    bool feasible = false;
    bool minimal = false;
    std::optional<RatVector> improving_x;
};

struct SetValidation
{
    std::vector<DecisionCheck> decisions;
    bool minimality = false;              ///< every decision feasible and certified minimal
    bool infimum_attained = false;        ///< conv of the union of F equals the upper image
    std::optional<RatVector> uncovered;   ///< a vertex of the upper image outside the union
    bool valid() const { return minimality && infimum_attained; }
};

/** Checks a proposed family of first-stage decisions against both solution conditions. */
inline SetValidation validate_set_solution(const RecourseProblem& rp, const std::vector<RatVector>& xs)
{
    SetValidation out;
    FlexCache cache(rp);
    out.minimality = !xs.empty();
    std::vector<UpperSet> parts;
    for (const auto& x : xs) {
        DecisionCheck c;
        c.x = x;
        c.feasible = !cache.get(x).is_empty();
        if (c.feasible) {
            auto r = improve(rp, x, cache);
            c.minimal = !r.improved;
            if (r.improved)
                c.improving_x = r.x;
            parts.push_back(cache.get(x));
        }
        out.minimality = out.minimality && c.feasible && c.minimal;
        out.decisions.push_back(std::move(c));
    }
    UpperSet p = recourse_upper_image(rp).set;
    UpperSet u = convex_union(parts, rp.d());
    out.infimum_attained = u == p;
    for (const auto& v : p.vertices()) {
        if (!contains_point(u, v)) {
            out.uncovered = v;
            break;
        }
    }
    return out;
}

/**
 * For a solution z = (x, y^1, ..., y^N) of the deterministic equivalent:
 * each C x + Q_i y^i is a minimal point of the scenario's second-stage upper image.
 */
inline bool prop31_check(const RecourseProblem& rp, const RatVector& z)
{
    Molp de = deterministic_equivalent(rp);
    if (z.size() != de.num_vars())
        throw DimensionError("point of length " + std::to_string(z.size()) + ", expected " +
                             std::to_string(de.num_vars()));
    if (!de.is_feasible(z))
        throw PreconditionError("point " + to_string(z) + " is infeasible");
    RatVector x(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(rp.n()));
    RatVector cx = rp.C * x;
    for (std::size_t i = 0; i < rp.N(); ++i) {
        auto first = z.begin() + static_cast<std::ptrdiff_t>(detail::y_offset(rp, i));
        RatVector y(first, first + static_cast<std::ptrdiff_t>(rp.m()));
        UpperSet s = second_stage_image(rp, x, i).set;
        if (!is_minimal_point(s, cx + rp.scenarios[i].Q * y))
            return false;
    }
    return true;
}

/** The union of the F sets of a set solution reconstructs the upper image. */
inline bool upper_image_star_check(const RecourseProblem& rp, const SetSolution& sol)
{
    std::vector<UpperSet> parts;
    for (const auto& e : sol.entries)
        parts.push_back(e.F);
    return convex_union(parts, rp.d()) == recourse_upper_image(rp).set;
}

inline bool upper_image_star_check(const RecourseProblem& rp)
{
    return upper_image_star_check(rp, solve_set_problem(rp));
}

} // namespace flexrec
