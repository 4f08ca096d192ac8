#pragma once

#include "flexrec/errors.hpp"
#include "flexrec/matrix.hpp"

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace flexrec {

enum class Sense { Le, Eq, Ge };

inline const char* to_string(Sense s)
{
    switch (s) {
    case Sense::Le: return "<=";
    case Sense::Eq: return "=";
    case Sense::Ge: return ">=";
    }
    return "?";
}

inline bool satisfies(const Rational& lhs, Sense s, const Rational& rhs)
{
    switch (s) {
    case Sense::Le: return lhs <= rhs;
    case Sense::Eq: return lhs == rhs;
    case Sense::Ge: return lhs >= rhs;
    }
    return false;
}

/** Missing bound = infinite (-inf for lower, +inf for upper). */
using Bound = std::optional<Rational>;

struct LpRow
{
    RatVector coeffs;
    Sense sense = Sense::Le;
    Rational rhs;

    friend bool operator==(const LpRow&, const LpRow&) = default;
};

/**
 * minimize objective . z  subject to rows and  lower <= z <= upper.
 *
 * Slack variables and sign splits are added internally; callers state rows
 * in whatever sense is natural.
 */
struct LpProblem
{
    RatVector objective;
    std::vector<LpRow> rows;
    std::vector<Bound> lower;
    std::vector<Bound> upper;

    /** n variables, zero objective, z >= 0. */
    static LpProblem nonnegative(std::size_t n)
    {
        LpProblem p;
        p.objective.assign(n, Rational{});
        p.lower.assign(n, Rational{});
        p.upper.assign(n, std::nullopt);
        return p;
    }

    std::size_t num_vars() const { return objective.size(); }

    void add_row(RatVector coeffs, Sense sense, Rational rhs)
    {
        rows.push_back(LpRow{std::move(coeffs), sense, std::move(rhs)});
    }

    /** Exact feasibility test of a candidate point. */
    bool is_feasible(std::span<const Rational> z) const
    {
        if (z.size() != num_vars())
            return false;
        for (std::size_t j = 0; j < z.size(); ++j) {
            if (lower[j] && z[j] < *lower[j])
                return false;
            if (upper[j] && z[j] > *upper[j])
                return false;
        }
        for (const auto& r : rows)
            if (!satisfies(dot(r.coeffs, z), r.sense, r.rhs))
                return false;
        return true;
    }
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

inline const char* to_string(LpStatus s)
{
    switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    }
    return "?";
}

struct LpResult
{
    LpStatus status = LpStatus::Infeasible;
    Rational value;          ///< optimal objective value (Optimal only)
    RatVector x;             ///< primal solution (Optimal only)
    RatVector ray;           ///< improving recession direction (Unbounded only)
    /**
     * Row multipliers (Optimal only): objective = sum_i duals[i] * rows[i] + (bound terms),
     * with duals >= 0 on >= rows, <= 0 on <= rows, free on = rows.
     */
    RatVector duals;
    std::size_t pivots = 0;
};

struct SimplexOptions
{
    std::size_t pivot_budget = 1'000'000;
};

/** Pivot budget exceeded; with Bland's rule this indicates a bug, not cycling. */
class PivotBudgetError : public SolverError
{
public:
    explicit PivotBudgetError(std::size_t budget)
        : SolverError("budget", "simplex pivot budget of " + std::to_string(budget) + " exhausted")
    {}
};

namespace detail {

class Tableau
{
public:
    Tableau(std::size_t m, std::size_t n) : m_(m), n_(n), t_((m + 1) * (n + 1)), basis_(m) {}

    Rational& at(std::size_t i, std::size_t j) { return t_[i * (n_ + 1) + j]; }
    const Rational& at(std::size_t i, std::size_t j) const { return t_[i * (n_ + 1) + j]; }
    Rational& rhs(std::size_t i) { return at(i, n_); }
    Rational& cost(std::size_t j) { return at(m_, j); }
    Rational& neg_objective() { return at(m_, n_); }

    std::size_t rows() const { return m_; }
    std::size_t cols() const { return n_; }
    std::vector<std::size_t>& basis() { return basis_; }

    void pivot(std::size_t p, std::size_t q)
    {
        Rational inv = at(p, q).inverse();
        nz_.clear();
        for (std::size_t j = 0; j <= n_; ++j) {
            if (!at(p, j).is_zero()) {
                at(p, j) *= inv;
                nz_.push_back(j);
            }
        }
        for (std::size_t i = 0; i <= m_; ++i) {
            if (i == p || at(i, q).is_zero())
                continue;
            Rational f = at(i, q);
            for (std::size_t j : nz_)
                at(i, j).sub_product(f, at(p, j));
        }
        basis_[p] = q;
    }

    enum class Outcome { Optimal, Unbounded };

    /** Bland's rule: lowest-index entering column, lowest-index leaving basic variable on ties. */
    Outcome run(std::size_t enter_limit, std::size_t& pivots, std::size_t budget, std::size_t& unbounded_col)
    {
        for (;;) {
            std::size_t q = enter_limit;
            for (std::size_t j = 0; j < enter_limit; ++j) {
                if (cost(j).sign() < 0) {
                    q = j;
                    break;
                }
            }
            if (q == enter_limit)
                return Outcome::Optimal;
            std::size_t p = m_;
            Rational best;
            for (std::size_t i = 0; i < m_; ++i) {
                const Rational& a = at(i, q);
                if (a.sign() <= 0)
                    continue;
                Rational ratio = rhs(i) / a;
                if (p == m_ || ratio < best || (ratio == best && basis_[i] < basis_[p])) {
                    p = i;
                    best = std::move(ratio);
                }
            }
            if (p == m_) {
                unbounded_col = q;
                return Outcome::Unbounded;
            }
            if (++pivots > budget)
                throw PivotBudgetError(budget);
            pivot(p, q);
        }
    }

private:
    std::size_t m_, n_;
    std::vector<Rational> t_;
    std::vector<std::size_t> basis_;
    std::vector<std::size_t> nz_;
};

enum class VarKind { Shifted, Mirrored, Split };

struct VarMap
{
    VarKind kind = VarKind::Shifted;
    Rational offset;
    std::size_t col = 0;
    std::size_t col2 = 0;
};

struct StdRow
{
    std::vector<std::pair<std::size_t, Rational>> coeffs;
    Sense sense;
    Rational rhs;
};

inline void check_dimensions(const LpProblem& p)
{
    const std::size_t n = p.num_vars();
    if (p.lower.size() != n || p.upper.size() != n)
        throw DimensionError("LP has " + std::to_string(n) + " objective coefficients but " +
                             std::to_string(p.lower.size()) + " lower and " + std::to_string(p.upper.size()) +
                             " upper bounds");
    for (std::size_t i = 0; i < p.rows.size(); ++i)
        if (p.rows[i].coeffs.size() != n)
            throw DimensionError("LP row " + std::to_string(i) + " has " + std::to_string(p.rows[i].coeffs.size()) +
                                 " coefficients, expected " + std::to_string(n));
}

} // namespace detail

/**
 * Two-phase primal simplex on a dense exact tableau with Bland's rule, split so
 * that phase 1 runs once for a fixed feasible region and phase 2 once per
 * objective. Output is a deterministic function of the rows and the objective,
 * identical to solving each objective from scratch.
 */
class PreparedLp
{
public:
    explicit PreparedLp(const LpProblem& problem, const SimplexOptions& options = {})
        : n_(problem.num_vars()), options_(options), vars_(n_), T_(0, 0)
    {
        using namespace detail;
        check_dimensions(problem);

        // Variable substitution: every structural column is >= 0.
        std::size_t ncol = 0;
        for (std::size_t j = 0; j < n_; ++j) {
            const Bound& lo = problem.lower[j];
            const Bound& hi = problem.upper[j];
            if (lo) {
                vars_[j] = {VarKind::Shifted, *lo, ncol++, 0};
            } else if (hi) {
                vars_[j] = {VarKind::Mirrored, *hi, ncol++, 0};
            } else {
                vars_[j] = {VarKind::Split, Rational{}, ncol, ncol + 1};
                ncol += 2;
            }
        }
        const std::size_t structural = ncol;

        std::vector<StdRow> std_rows;
        std_rows.reserve(problem.rows.size() + n_);
        for (const auto& row : problem.rows) {
            StdRow s{{}, row.sense, row.rhs};
            for (std::size_t j = 0; j < n_; ++j) {
                const Rational& a = row.coeffs[j];
                if (a.is_zero())
                    continue;
                const VarMap& v = vars_[j];
                switch (v.kind) {
                case VarKind::Shifted:
                    s.rhs.sub_product(a, v.offset);
                    s.coeffs.emplace_back(v.col, a);
                    break;
                case VarKind::Mirrored:
                    s.rhs.sub_product(a, v.offset);
                    s.coeffs.emplace_back(v.col, -a);
                    break;
                case VarKind::Split:
                    s.coeffs.emplace_back(v.col, a);
                    s.coeffs.emplace_back(v.col2, -a);
                    break;
                }
            }
            std_rows.push_back(std::move(s));
        }
        for (std::size_t j = 0; j < n_; ++j)
            if (vars_[j].kind == VarKind::Shifted && problem.upper[j])
                std_rows.push_back(StdRow{{{vars_[j].col, Rational{1}}}, Sense::Le, *problem.upper[j] - vars_[j].offset});

        const std::size_t m = std_rows.size();
        rows_ = problem.rows.size();
        std::size_t num_slack = 0;
        for (const auto& r : std_rows)
            if (r.sense != Sense::Eq)
                ++num_slack;

        // Row sign flips so that rhs >= 0; a slack entering with +1 serves as initial basis.
        flip_.assign(m, 1);
        std::vector<std::size_t> slack_col(m, 0);
        std::vector<bool> needs_art(m, false);
        std::size_t next_slack = structural;
        std::size_t num_art = 0;
        for (std::size_t i = 0; i < m; ++i) {
            const auto& r = std_rows[i];
            if (r.rhs.sign() < 0)
                flip_[i] = -1;
            int slack_sign = 0;
            if (r.sense == Sense::Le)
                slack_sign = 1;
            else if (r.sense == Sense::Ge)
                slack_sign = -1;
            if (slack_sign != 0)
                slack_col[i] = next_slack++;
            if (r.sense == Sense::Ge && r.rhs.sign() == 0)
                flip_[i] = -1;
            if (slack_sign * flip_[i] != 1) {
                needs_art[i] = true;
                ++num_art;
            }
        }
        art_start_ = structural + num_slack;
        total_ = art_start_ + num_art;

        T_ = Tableau(m, total_);
        init_col_.assign(m, 0);
        std::size_t next_art = art_start_;
        for (std::size_t i = 0; i < m; ++i) {
            const auto& r = std_rows[i];
            const Rational sigma(flip_[i]);
            for (const auto& [c, a] : r.coeffs)
                T_.at(i, c) += flip_[i] > 0 ? a : -a;
            if (r.sense == Sense::Le)
                T_.at(i, slack_col[i]) = sigma;
            else if (r.sense == Sense::Ge)
                T_.at(i, slack_col[i]) = -sigma;
            T_.rhs(i) = flip_[i] > 0 ? r.rhs : -r.rhs;
            if (needs_art[i]) {
                T_.at(i, next_art) = 1;
                init_col_[i] = next_art;
                T_.basis()[i] = next_art++;
            } else {
                init_col_[i] = slack_col[i];
                T_.basis()[i] = slack_col[i];
            }
        }

        if (num_art > 0) {
            for (std::size_t j = art_start_; j < total_; ++j)
                T_.cost(j) = 1;
            for (std::size_t i = 0; i < m; ++i) {
                if (!needs_art[i])
                    continue;
                for (std::size_t j = 0; j <= total_; ++j)
                    if (!T_.at(i, j).is_zero())
                        T_.at(m, j) -= T_.at(i, j);
            }
            std::size_t unbounded_col = 0;
            T_.run(total_, phase1_pivots_, options_.pivot_budget, unbounded_col);
            if (T_.neg_objective().sign() != 0) {
                infeasible_ = true;
                return;
            }
            for (std::size_t i = 0; i < m; ++i) {
                if (T_.basis()[i] < art_start_)
                    continue;
                for (std::size_t j = 0; j < art_start_; ++j) {
                    if (!T_.at(i, j).is_zero()) {
                        T_.pivot(i, j);
                        break;
                    }
                }
            }
        }
    }

    bool infeasible() const { return infeasible_; }
    std::size_t num_vars() const { return n_; }

    /** Phase 2 for one objective over the prepared region. */
    LpResult solve(std::span<const Rational> objective) const
    {
        using namespace detail;
        if (objective.size() != n_)
            throw DimensionError("LP objective has " + std::to_string(objective.size()) + " coefficients, expected " +
                                 std::to_string(n_));
        LpResult result;
        result.pivots = phase1_pivots_;
        if (infeasible_) {
            result.status = LpStatus::Infeasible;
            return result;
        }
        const std::size_t m = T_.rows();
        Tableau T = T_;

        RatVector cost(total_);
        Rational constant;
        for (std::size_t j = 0; j < n_; ++j) {
            const Rational& c = objective[j];
            if (c.is_zero())
                continue;
            const VarMap& v = vars_[j];
            switch (v.kind) {
            case VarKind::Shifted:
                cost[v.col] += c;
                constant.add_product(c, v.offset);
                break;
            case VarKind::Mirrored:
                cost[v.col] -= c;
                constant.add_product(c, v.offset);
                break;
            case VarKind::Split:
                cost[v.col] += c;
                cost[v.col2] -= c;
                break;
            }
        }
        for (std::size_t j = 0; j < total_; ++j)
            T.cost(j) = cost[j];
        T.neg_objective() = 0;
        for (std::size_t i = 0; i < m; ++i) {
            const Rational& cb = cost[T.basis()[i]];
            if (cb.is_zero())
                continue;
            for (std::size_t j = 0; j <= total_; ++j)
                if (!T.at(i, j).is_zero())
                    T.at(m, j).sub_product(cb, T.at(i, j));
        }

        std::size_t unbounded_col = 0;
        auto outcome = T.run(art_start_, result.pivots, options_.pivot_budget, unbounded_col);

        auto to_original = [&](const RatVector& stdv, bool with_offsets) {
            RatVector x(n_);
            for (std::size_t j = 0; j < n_; ++j) {
                const VarMap& v = vars_[j];
                const Rational offset = with_offsets ? v.offset : Rational{};
                switch (v.kind) {
                case VarKind::Shifted: x[j] = offset + stdv[v.col]; break;
                case VarKind::Mirrored: x[j] = offset - stdv[v.col]; break;
                case VarKind::Split: x[j] = stdv[v.col] - stdv[v.col2]; break;
                }
            }
            return x;
        };

        if (outcome == Tableau::Outcome::Unbounded) {
            result.status = LpStatus::Unbounded;
            RatVector dir(total_);
            dir[unbounded_col] = 1;
            for (std::size_t i = 0; i < m; ++i)
                dir[T.basis()[i]] = -T.at(i, unbounded_col);
            result.ray = to_original(dir, false);
            return result;
        }

        result.status = LpStatus::Optimal;
        RatVector primal(total_);
        for (std::size_t i = 0; i < m; ++i)
            primal[T.basis()[i]] = T.rhs(i);
        result.x = to_original(primal, true);
        result.value = constant - T.neg_objective();
        result.duals.resize(rows_);
        for (std::size_t i = 0; i < rows_; ++i) {
            Rational y = -T.cost(init_col_[i]);
            result.duals[i] = flip_[i] > 0 ? y : -y;
        }
        return result;
    }

private:
    std::size_t n_;
    SimplexOptions options_;
    std::vector<detail::VarMap> vars_;
    detail::Tableau T_;
    std::vector<int> flip_;
    std::vector<std::size_t> init_col_;
    std::size_t rows_ = 0;
    std::size_t art_start_ = 0;
    std::size_t total_ = 0;
    std::size_t phase1_pivots_ = 0;
    bool infeasible_ = false;
};

inline LpResult solve_lp(const LpProblem& problem, const SimplexOptions& options = {})
{
    return PreparedLp(problem, options).solve(problem.objective);
}

/**
 * Solve M s = rhs exactly by Gaussian elimination.
 * Returns std::nullopt when M is singular.
 */
inline std::optional<RatVector> gauss_solve(const RatMatrix& M, const RatVector& rhs)
{
    const std::size_t n = M.rows();
    if (M.cols() != n)
        throw DimensionError("gauss_solve needs a square matrix, got " + std::to_string(M.rows()) + "x" +
                             std::to_string(M.cols()));
    if (rhs.size() != n)
        throw DimensionError("gauss_solve rhs has length " + std::to_string(rhs.size()) + ", expected " +
                             std::to_string(n));
    RatMatrix a = M;
    RatVector b = rhs;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        while (p < n && a(p, c).is_zero())
            ++p;
        if (p == n)
            return std::nullopt;
        if (p != c) {
            for (std::size_t j = 0; j < n; ++j)
                std::swap(a(p, j), a(c, j));
            std::swap(b[p], b[c]);
        }
        Rational inv = a(c, c).inverse();
        for (std::size_t j = c; j < n; ++j)
            a(c, j) *= inv;
        b[c] *= inv;
        for (std::size_t i = 0; i < n; ++i) {
            if (i == c || a(i, c).is_zero())
                continue;
            Rational f = a(i, c);
            for (std::size_t j = c; j < n; ++j)
                a(i, j).sub_product(f, a(c, j));
            b[i].sub_product(f, b[c]);
        }
    }
    return b;
}

} // namespace flexrec
