#pragma once

#include "flexrec/lp.hpp"
#include "flexrec/polyhedron.hpp"

#include <map>
#include <string>
#include <vector>

namespace flexrec {

/** minimize P z subject to z in S, S given by rows and variable bounds. */
struct Molp
{
    RatMatrix objective;
    std::vector<LpRow> rows;
    std::vector<Bound> lower;
    std::vector<Bound> upper;

    /** Objective P with S = {z >= 0} and no rows yet. */
    static Molp nonnegative(RatMatrix P)
    {
        Molp m;
        m.lower.assign(P.cols(), Rational{});
        m.upper.assign(P.cols(), std::nullopt);
        m.objective = std::move(P);
        return m;
    }

    std::size_t dim() const { return objective.rows(); }
    std::size_t num_vars() const { return objective.cols(); }

    void add_row(RatVector coeffs, Sense sense, Rational rhs)
    {
        rows.push_back(LpRow{std::move(coeffs), sense, std::move(rhs)});
    }

    /** The feasible set as an LP with objective w^T P. */
    LpProblem scalarization(std::span<const Rational> w) const
    {
        if (w.size() != dim())
            throw DimensionError("weight of length " + std::to_string(w.size()) + " for " + std::to_string(dim()) +
                                 " objectives");
        LpProblem lp;
        lp.objective.assign(num_vars(), Rational{});
        for (std::size_t i = 0; i < dim(); ++i)
            if (!w[i].is_zero())
                for (std::size_t j = 0; j < num_vars(); ++j)
                    lp.objective[j].add_product(w[i], objective(i, j));
        lp.rows = rows;
        lp.lower = lower;
        lp.upper = upper;
        return lp;
    }

    bool is_feasible(std::span<const Rational> z) const
    {
        return scalarization(RatVector(dim())).is_feasible(z);
    }

    void check() const
    {
        if (dim() == 0 || num_vars() == 0)
            throw DimensionError("MOLP needs at least one objective and one variable");
        if (lower.size() != num_vars() || upper.size() != num_vars())
            throw DimensionError("MOLP bounds do not match " + std::to_string(num_vars()) + " variables");
        for (std::size_t i = 0; i < rows.size(); ++i)
            if (rows[i].coeffs.size() != num_vars())
                throw DimensionError("MOLP row " + std::to_string(i) + " has " +
                                     std::to_string(rows[i].coeffs.size()) + " coefficients, expected " +
                                     std::to_string(num_vars()));
    }
};

/** The upper image violates boundedness; `direction` is an outcome-space recession direction outside R^d_+. */
class UnboundedError : public SolverError
{
public:
    explicit UnboundedError(RatVector direction)
        : SolverError("unbounded", "unbounded: recession direction " + to_string(direction) +
                                       " of the upper image is not in the nonnegative orthant"),
          direction_(std::move(direction))
    {}
    const RatVector& direction() const { return direction_; }

private:
    RatVector direction_;
};

/** Upper image together with one feasible z per vertex, aligned with set.vertices(). */
struct UpperImage
{
    UpperSet set;
    std::vector<RatVector> witnesses;
};

struct MolpEntry
{
    RatVector z;
    RatVector value;
};

struct MolpSolution
{
    UpperImage image;
    std::vector<MolpEntry> entries;
};

namespace detail {

inline void require_feasible(const Molp& m)
{
    auto r = solve_lp(m.scalarization(RatVector(m.dim())));
    if (r.status == LpStatus::Infeasible)
        throw InfeasibleError("infeasible");
}

/** Lower bounds of the d objectives; throws UnboundedError if one is unbounded below. */
inline RatVector ideal_point(const Molp& m)
{
    RatVector ideal(m.dim());
    for (std::size_t i = 0; i < m.dim(); ++i) {
        auto r = solve_lp(m.scalarization(unit_vector(m.dim(), i)));
        if (r.status == LpStatus::Infeasible)
            throw InfeasibleError("infeasible");
        if (r.status == LpStatus::Unbounded)
            throw UnboundedError(m.objective * r.ray);
        ideal[i] = r.value;
    }
    return ideal;
}

} // namespace detail

/**
 * Upper image {Pz : z in S} + R^d_+ by outer approximation in outcome space.
 *
 * Starts from the orthant at the ideal point. Each vertex t of the current
 * outer set is tested with  min s  s.t.  z in S, P z - s 1 <= t. A zero
 * optimum places t in the upper image (and gives its witness); otherwise the
 * row multipliers mu define the supporting cut mu.v >= mu.t + s.
 */
inline UpperImage upper_image(const Molp& m)
{
    m.check();
    detail::require_feasible(m);
    const std::size_t d = m.dim();
    const std::size_t q = m.num_vars();

    HRep outer;
    outer.dim = d;
    outer.A = RatMatrix(0, d);
    RatVector ideal = detail::ideal_point(m);
    for (std::size_t i = 0; i < d; ++i)
        outer.add(unit_vector(d, i), ideal[i]);

    LpProblem probe;
    probe.objective.assign(q + 1, Rational{});
    probe.objective[q] = 1;
    probe.rows.reserve(m.rows.size() + d);
    for (const auto& r : m.rows) {
        RatVector c = r.coeffs;
        c.emplace_back();
        probe.rows.push_back(LpRow{std::move(c), r.sense, r.rhs});
    }
    const std::size_t first = probe.rows.size();
    for (std::size_t i = 0; i < d; ++i) {
        RatVector c(m.objective.row(i).begin(), m.objective.row(i).end());
        c.emplace_back(-1);
        probe.rows.push_back(LpRow{std::move(c), Sense::Le, Rational{}});
    }
    probe.lower = m.lower;
    probe.lower.emplace_back(std::nullopt);
    probe.upper = m.upper;
    probe.upper.emplace_back(std::nullopt);

    std::map<RatVector, RatVector> confirmed;
    for (;;) {
        auto v = h_to_v(outer);
        bool cut = false;
        for (const auto& t : v->vertices) {
            if (confirmed.count(t))
                continue;
            for (std::size_t i = 0; i < d; ++i)
                probe.rows[first + i].rhs = t[i];
            auto r = solve_lp(probe);
            if (r.status != LpStatus::Optimal)
                throw SolverError("internal", "outer approximation probe LP is " + std::string(to_string(r.status)));
            if (r.value.is_zero()) {
                confirmed.emplace(t, RatVector(r.x.begin(), r.x.begin() + static_cast<std::ptrdiff_t>(q)));
                continue;
            }
            // Cut mu.v >= mu.t + s with mu = -duals (they sum to one).
            RatVector row(d + 1);
            for (std::size_t i = 0; i < d; ++i) {
                row[i] = -r.duals[first + i];
                row[d].add_product(row[i], t[i]);
            }
            row[d] += r.value;
            make_primitive(row);
            outer.add(std::span<const Rational>(row.data(), d), row[d]);
            cut = true;
        }
        if (!cut)
            break;
    }

    VRep gens;
    gens.dim = d;
    for (const auto& [t, z] : confirmed)
        gens.vertices.push_back(t);
    UpperImage out{hat(gens), {}};
    for (const auto& t : out.set.vertices())
        out.witnesses.push_back(confirmed.at(t));
    return out;
}

/**
 * Reference construction: generators of the lifted polyhedron
 * {(z, v) : z in S, v >= P z}, projected to v. Exponential in the number of
 * variables; meant for cross-checking upper_image on small instances.
 */
inline UpperImage upper_image_by_projection(const Molp& m)
{
    m.check();
    const std::size_t d = m.dim();
    const std::size_t q = m.num_vars();
    HRep lifted;
    lifted.dim = q + d;
    lifted.A = RatMatrix(0, q + d);
    auto add = [&](const RatVector& zpart, const RatVector& vpart, const Rational& rhs, bool eq) {
        RatVector row = zpart;
        row.insert(row.end(), vpart.begin(), vpart.end());
        lifted.add(row, rhs, eq);
    };
    const RatVector no_v(d);
    for (const auto& r : m.rows) {
        if (r.sense == Sense::Le)
            add(Rational(-1) * r.coeffs, no_v, -r.rhs, false);
        else
            add(r.coeffs, no_v, r.rhs, r.sense == Sense::Eq);
    }
    for (std::size_t j = 0; j < q; ++j) {
        if (m.lower[j])
            add(unit_vector(q, j), no_v, *m.lower[j], false);
        if (m.upper[j])
            add(Rational(-1) * unit_vector(q, j), no_v, -*m.upper[j], false);
    }
    for (std::size_t i = 0; i < d; ++i) {
        RatVector zpart(q);
        for (std::size_t j = 0; j < q; ++j)
            zpart[j] = -m.objective(i, j);
        add(zpart, unit_vector(d, i), Rational{}, false);
    }
    auto gens = h_to_v(lifted);
    if (!gens)
        throw InfeasibleError("infeasible");

    VRep projected;
    projected.dim = d;
    for (const auto& g : gens->vertices)
        projected.vertices.emplace_back(g.begin() + static_cast<std::ptrdiff_t>(q), g.end());
    for (const auto& g : gens->rays) {
        RatVector dir(g.begin() + static_cast<std::ptrdiff_t>(q), g.end());
        for (const auto& x : dir)
            if (x.sign() < 0)
                throw UnboundedError(dir);
        if (!is_zero(dir))
            projected.rays.push_back(std::move(dir));
    }
    UpperImage out{hat(projected), {}};
    for (const auto& t : out.set.vertices()) {
        for (const auto& g : gens->vertices) {
            if (std::equal(t.begin(), t.end(), g.begin() + static_cast<std::ptrdiff_t>(q))) {
                out.witnesses.emplace_back(g.begin(), g.begin() + static_cast<std::ptrdiff_t>(q));
                break;
            }
        }
    }
    return out;
}

/** No point of the upper set lies componentwise below v other than v itself. */
inline bool is_minimal_point(const UpperSet& u, std::span<const Rational> v)
{
    if (!contains_point(u, v))
        throw PreconditionError("point " + to_string(v) + " is not in the upper image");
    const std::size_t d = u.dim();
    const HRep& h = u.hrep();
    LpProblem lp;
    lp.objective.assign(d, Rational{1});
    lp.lower.assign(d, std::nullopt);
    lp.upper.assign(v.begin(), v.end());
    for (std::size_t i = 0; i < h.size(); ++i)
        lp.add_row(h.A.row_vector(i), h.equality[i] ? Sense::Eq : Sense::Ge, h.b[i]);
    auto r = solve_lp(lp);
    Rational total;
    for (const auto& x : v)
        total += x;
    return r.status == LpStatus::Optimal && r.value == total;
}

inline bool is_minimal_point(const UpperImage& u, std::span<const Rational> v) { return is_minimal_point(u.set, v); }

/**
 * A feasible z with P z <= v, chosen by minimizing 1^T P z; for a minimal v
 * this gives P z = v.
 */
inline RatVector minimizer_for_vertex(const Molp& m, std::span<const Rational> v)
{
    if (v.size() != m.dim())
        throw DimensionError("outcome " + to_string(v) + " for " + std::to_string(m.dim()) + " objectives");
    LpProblem lp = m.scalarization(RatVector(m.dim(), Rational{1}));
    for (std::size_t i = 0; i < m.dim(); ++i)
        lp.add_row(m.objective.row_vector(i), Sense::Le, v[i]);
    auto r = solve_lp(lp);
    if (r.status != LpStatus::Optimal)
        throw PreconditionError("outcome " + to_string(v) + " is not attained by a feasible point");
    return r.x;
}

inline RatVector minimizer_for_vertex(const Molp& m, const UpperImage&, std::span<const Rational> v)
{
    return minimizer_for_vertex(m, v);
}

/** One minimizer per vertex of the upper image, in lexicographic vertex order. */
inline MolpSolution solve_molp(const Molp& m)
{
    MolpSolution sol{upper_image(m), {}};
    for (const auto& v : sol.image.set.vertices()) {
        RatVector z = minimizer_for_vertex(m, v);
        sol.entries.push_back(MolpEntry{z, m.objective * z});
    }
    return sol;
}

} // namespace flexrec
