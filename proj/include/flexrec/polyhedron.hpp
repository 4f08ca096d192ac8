#pragma once

#include "flexrec/errors.hpp"
#include "flexrec/lp.hpp"
#include "flexrec/matrix.hpp"

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace flexrec {

/** { x : A x >= b } with the rows flagged in `equality` read as A x = b. */
struct HRep
{
    std::size_t dim = 0;
    RatMatrix A;
    RatVector b;
    std::vector<bool> equality;

    std::size_t size() const { return b.size(); }

    void add(std::span<const Rational> a, Rational rhs, bool eq = false)
    {
        if (a.size() != dim)
            throw DimensionError("inequality of length " + std::to_string(a.size()) + " in dimension " +
                                 std::to_string(dim));
        if (A.rows() == 0)
            A = RatMatrix(0, dim);
        A.append_row(a);
        b.push_back(std::move(rhs));
        equality.push_back(eq);
    }

    friend bool operator==(const HRep&, const HRep&) = default;
};

/** conv(vertices) + cone(rays). */
struct VRep
{
    std::size_t dim = 0;
    std::vector<RatVector> vertices;
    std::vector<RatVector> rays;

    friend bool operator==(const VRep&, const VRep&) = default;
};

namespace detail {

/** Bitset over constraint indices, used as the zero set of a DD ray. */
class ZeroSet
{
public:
    void set(std::size_t i)
    {
        if (words_.size() <= i / 64)
            words_.resize(i / 64 + 1, 0);
        words_[i / 64] |= std::uint64_t{1} << (i % 64);
    }
    ZeroSet operator&(const ZeroSet& o) const
    {
        ZeroSet r;
        r.words_.resize(std::min(words_.size(), o.words_.size()));
        for (std::size_t i = 0; i < r.words_.size(); ++i)
            r.words_[i] = words_[i] & o.words_[i];
        return r;
    }
    bool subset_of(const ZeroSet& o) const
    {
        for (std::size_t i = 0; i < words_.size(); ++i) {
            std::uint64_t other = i < o.words_.size() ? o.words_[i] : 0;
            if (words_[i] & ~other)
                return false;
        }
        return true;
    }
    std::size_t count() const
    {
        std::size_t c = 0;
        for (auto w : words_)
            c += static_cast<std::size_t>(__builtin_popcountll(w));
        return c;
    }

private:
    std::vector<std::uint64_t> words_;
};

struct ConeGenerators
{
    std::vector<RatVector> rays;
    std::vector<RatVector> lineality;
};

/**
 * Double description for the cone { x in R^D : row . x >= 0 for every row }.
 *
 * Starts from R^D (lineality = identity) and inserts rows one at a time.
 * While lineality remains, a row with nonzero product against a lineality
 * vector converts that vector into a ray; afterwards the usual pos/neg
 * combination step runs with the combinatorial adjacency test.
 */
inline ConeGenerators cone_double_description(const std::vector<RatVector>& rows, std::size_t D)
{
    std::vector<RatVector> lin;
    for (std::size_t i = 0; i < D; ++i)
        lin.push_back(unit_vector(D, i));
    std::vector<RatVector> rays;
    std::vector<ZeroSet> zeros;

    for (std::size_t k = 0; k < rows.size(); ++k) {
        const RatVector& a = rows[k];
        std::size_t li = lin.size();
        Rational al;
        for (std::size_t i = 0; i < lin.size(); ++i) {
            al = dot(a, lin[i]);
            if (!al.is_zero()) {
                li = i;
                break;
            }
        }
        if (li < lin.size()) {
            RatVector l = lin[li];
            if (al.sign() < 0) {
                for (auto& x : l)
                    x = -x;
                al = -al;
            }
            lin.erase(lin.begin() + static_cast<std::ptrdiff_t>(li));
            for (auto& other : lin) {
                Rational f = dot(a, other) / al;
                if (!f.is_zero())
                    for (std::size_t j = 0; j < D; ++j)
                        other[j].sub_product(f, l[j]);
            }
            for (std::size_t r = 0; r < rays.size(); ++r) {
                Rational f = dot(a, rays[r]) / al;
                if (!f.is_zero()) {
                    for (std::size_t j = 0; j < D; ++j)
                        rays[r][j].sub_product(f, l[j]);
                    make_primitive(rays[r]);
                }
                zeros[r].set(k);
            }
            ZeroSet z;
            for (std::size_t p = 0; p < k; ++p)
                z.set(p);
            make_primitive(l);
            rays.push_back(std::move(l));
            zeros.push_back(std::move(z));
            continue;
        }

        std::vector<Rational> val(rays.size());
        std::vector<std::size_t> pos, neg, zer;
        for (std::size_t r = 0; r < rays.size(); ++r) {
            val[r] = dot(a, rays[r]);
            int s = val[r].sign();
            (s > 0 ? pos : s < 0 ? neg : zer).push_back(r);
        }
        for (std::size_t r : zer)
            zeros[r].set(k);
        if (neg.empty())
            continue;

        const std::size_t threshold = D >= lin.size() + 2 ? D - lin.size() - 2 : 0;
        std::vector<RatVector> new_rays;
        std::vector<ZeroSet> new_zeros;
        for (std::size_t p : pos) {
            for (std::size_t q : neg) {
                ZeroSet common = zeros[p] & zeros[q];
                if (common.count() < threshold)
                    continue;
                bool adjacent = true;
                for (std::size_t r = 0; r < rays.size() && adjacent; ++r) {
                    if (r == p || r == q)
                        continue;
                    if (common.subset_of(zeros[r]))
                        adjacent = false;
                }
                if (!adjacent)
                    continue;
                RatVector nr(D);
                for (std::size_t j = 0; j < D; ++j) {
                    nr[j].add_product(val[p], rays[q][j]);
                    nr[j].sub_product(val[q], rays[p][j]);
                }
                make_primitive(nr);
                common.set(k);
                new_rays.push_back(std::move(nr));
                new_zeros.push_back(std::move(common));
            }
        }
        std::vector<RatVector> kept;
        std::vector<ZeroSet> kept_zeros;
        for (std::size_t r = 0; r < rays.size(); ++r) {
            if (val[r].sign() >= 0) {
                kept.push_back(std::move(rays[r]));
                kept_zeros.push_back(std::move(zeros[r]));
            }
        }
        for (std::size_t r = 0; r < new_rays.size(); ++r) {
            kept.push_back(std::move(new_rays[r]));
            kept_zeros.push_back(std::move(new_zeros[r]));
        }
        rays = std::move(kept);
        zeros = std::move(kept_zeros);
    }
    return {std::move(rays), std::move(lin)};
}

/** Reduced row echelon form, zero rows dropped. */
inline std::vector<RatVector> rref(std::vector<RatVector> rows, std::vector<std::size_t>* pivots = nullptr)
{
    std::vector<RatVector> out;
    if (rows.empty())
        return out;
    const std::size_t cols = rows.front().size();
    std::size_t r = 0;
    std::vector<std::size_t> piv;
    for (std::size_t c = 0; c < cols && r < rows.size(); ++c) {
        std::size_t p = r;
        while (p < rows.size() && rows[p][c].is_zero())
            ++p;
        if (p == rows.size())
            continue;
        std::swap(rows[p], rows[r]);
        Rational inv = rows[r][c].inverse();
        for (auto& x : rows[r])
            x *= inv;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (i == r || rows[i][c].is_zero())
                continue;
            Rational f = rows[i][c];
            for (std::size_t j = 0; j < cols; ++j)
                rows[i][j].sub_product(f, rows[r][j]);
        }
        piv.push_back(c);
        ++r;
    }
    rows.resize(r);
    if (pivots)
        *pivots = piv;
    return rows;
}

inline void sort_unique(std::vector<RatVector>& v)
{
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

} // namespace detail

/**
 * Generator representation of an H-represented polyhedron.
 * Returns std::nullopt for the empty set. Throws LinealityError if the
 * (nonempty) set contains a line.
 */
inline std::optional<VRep> h_to_v(const HRep& h)
{
    const std::size_t d = h.dim;
    if (h.A.rows() != h.size() || h.equality.size() != h.size() || (h.size() > 0 && h.A.cols() != d))
        throw DimensionError("inconsistent H-representation");
    std::vector<RatVector> rows;
    RatVector hom(d + 1);
    hom[0] = 1;
    rows.push_back(hom);
    for (std::size_t i = 0; i < h.size(); ++i) {
        RatVector r(d + 1);
        r[0] = -h.b[i];
        for (std::size_t j = 0; j < d; ++j)
            r[j + 1] = h.A(i, j);
        rows.push_back(r);
        if (h.equality[i]) {
            for (auto& x : r)
                x = -x;
            rows.push_back(std::move(r));
        }
    }
    auto gens = detail::cone_double_description(rows, d + 1);

    VRep v;
    v.dim = d;
    for (const auto& r : gens.rays) {
        if (r[0].sign() > 0) {
            RatVector p(d);
            Rational inv = r[0].inverse();
            for (std::size_t j = 0; j < d; ++j)
                p[j] = r[j + 1] * inv;
            v.vertices.push_back(std::move(p));
        }
    }
    if (v.vertices.empty())
        return std::nullopt;
    if (!gens.lineality.empty())
        throw LinealityError();
    for (const auto& r : gens.rays) {
        if (r[0].sign() == 0) {
            RatVector dir(r.begin() + 1, r.end());
            normalize_leading(dir);
            v.rays.push_back(std::move(dir));
        }
    }
    detail::sort_unique(v.vertices);
    detail::sort_unique(v.rays);
    return v;
}

/**
 * Irredundant inequality representation of conv(vertices) + cone(rays).
 * Equalities are in reduced row echelon form; inequalities are reduced
 * against them, scaled to a leading coefficient of magnitude one and sorted.
 */
inline HRep v_to_h(const VRep& v)
{
    const std::size_t d = v.dim;
    if (v.vertices.empty())
        throw PreconditionError("v_to_h: generator list has no vertex");
    for (const auto& p : v.vertices)
        if (p.size() != d)
            throw DimensionError("vertex " + to_string(p) + " in dimension " + std::to_string(d));
    for (const auto& r : v.rays)
        if (r.size() != d)
            throw DimensionError("ray " + to_string(r) + " in dimension " + std::to_string(d));

    // Valid inequalities c0 + a.x >= 0 form a cone in (c0, a).
    std::vector<RatVector> rows;
    for (const auto& p : v.vertices) {
        RatVector r(d + 1);
        r[0] = 1;
        std::copy(p.begin(), p.end(), r.begin() + 1);
        rows.push_back(std::move(r));
    }
    for (const auto& ray : v.rays) {
        RatVector r(d + 1);
        std::copy(ray.begin(), ray.end(), r.begin() + 1);
        rows.push_back(std::move(r));
    }
    auto gens = detail::cone_double_description(rows, d + 1);

    // Row layout for reduction: (a_1..a_d, b) meaning a.x (>= or =) b.
    auto to_row = [d](const RatVector& g) {
        RatVector r(d + 1);
        for (std::size_t j = 0; j < d; ++j)
            r[j] = g[j + 1];
        r[d] = -g[0];
        return r;
    };
    std::vector<RatVector> eq_rows;
    for (const auto& l : gens.lineality)
        eq_rows.push_back(to_row(l));
    std::vector<std::size_t> pivots;
    eq_rows = detail::rref(std::move(eq_rows), &pivots);

    std::vector<RatVector> ineq_rows;
    for (const auto& g : gens.rays) {
        RatVector r = to_row(g);
        for (std::size_t e = 0; e < eq_rows.size(); ++e) {
            Rational f = r[pivots[e]];
            if (!f.is_zero())
                for (std::size_t j = 0; j <= d; ++j)
                    r[j].sub_product(f, eq_rows[e][j]);
        }
        bool trivial = true;
        for (std::size_t j = 0; j < d; ++j)
            if (!r[j].is_zero())
                trivial = false;
        if (trivial)
            continue;
        normalize_leading(r);
        ineq_rows.push_back(std::move(r));
    }
    detail::sort_unique(ineq_rows);

    HRep h;
    h.dim = d;
    h.A = RatMatrix(0, d);
    for (const auto& r : eq_rows)
        h.add(std::span<const Rational>(r.data(), d), r[d], true);
    for (const auto& r : ineq_rows)
        h.add(std::span<const Rational>(r.data(), d), r[d], false);
    return h;
}

/**
 * Convex polyhedron holding both representations in canonical form, so that
 * structural equality coincides with set equality. The empty set is its own
 * variant.
 */
class Polyhedron
{
public:
    Polyhedron() = default;

    static Polyhedron empty_set(std::size_t dim)
    {
        Polyhedron p;
        p.dim_ = dim;
        p.empty_ = true;
        p.v_.dim = dim;
        p.h_.dim = dim;
        p.h_.A = RatMatrix(0, dim);
        return p;
    }

    static Polyhedron from_h(const HRep& h)
    {
        auto v = h_to_v(h);
        if (!v)
            return empty_set(h.dim);
        return from_canonical_v(std::move(*v));
    }

    static Polyhedron from_v(const VRep& v)
    {
        if (v.vertices.empty()) {
            if (!v.rays.empty())
                throw PreconditionError("generator list with rays but no vertex");
            return empty_set(v.dim);
        }
        Polyhedron p;
        p.dim_ = v.dim;
        p.empty_ = false;
        p.h_ = v_to_h(v);
        p.v_ = *h_to_v(p.h_);
        return p;
    }

    std::size_t dim() const { return dim_; }
    bool is_empty() const { return empty_; }
    const HRep& hrep() const { return h_; }
    const VRep& vrep() const { return v_; }
    const std::vector<RatVector>& vertices() const { return v_.vertices; }
    const std::vector<RatVector>& rays() const { return v_.rays; }

    friend bool operator==(const Polyhedron& a, const Polyhedron& b)
    {
        return a.dim_ == b.dim_ && a.empty_ == b.empty_ && a.v_ == b.v_;
    }

private:
    static Polyhedron from_canonical_v(VRep v)
    {
        Polyhedron p;
        p.dim_ = v.dim;
        p.empty_ = false;
        p.h_ = v_to_h(v);
        p.v_ = std::move(v);
        return p;
    }

    std::size_t dim_ = 0;
    bool empty_ = true;
    HRep h_;
    VRep v_;
};

inline bool contains_point(const Polyhedron& p, std::span<const Rational> x)
{
    if (x.size() != p.dim())
        throw DimensionError("point " + to_string(x) + " tested against a polyhedron in dimension " +
                             std::to_string(p.dim()));
    if (p.is_empty())
        return false;
    const HRep& h = p.hrep();
    for (std::size_t i = 0; i < h.size(); ++i) {
        Rational lhs = dot(h.A.row(i), x);
        if (h.equality[i] ? lhs != h.b[i] : lhs < h.b[i])
            return false;
    }
    return true;
}

/** Direction r lies in the recession cone of p. */
inline bool contains_direction(const Polyhedron& p, std::span<const Rational> r)
{
    const HRep& h = p.hrep();
    for (std::size_t i = 0; i < h.size(); ++i) {
        int s = dot(h.A.row(i), r).sign();
        if (h.equality[i] ? s != 0 : s < 0)
            return false;
    }
    return true;
}

/** inner is a subset of outer. */
inline bool contains_set(const Polyhedron& outer, const Polyhedron& inner)
{
    if (outer.dim() != inner.dim())
        throw DimensionError("containment between dimensions " + std::to_string(outer.dim()) + " and " +
                             std::to_string(inner.dim()));
    if (inner.is_empty())
        return true;
    if (outer.is_empty())
        return false;
    for (const auto& v : inner.vertices())
        if (!contains_point(outer, v))
            return false;
    for (const auto& r : inner.rays())
        if (!contains_direction(outer, r))
            return false;
    return true;
}

/** A vertex (or ray) of `inner` outside `outer`, if any. */
inline std::optional<RatVector> containment_witness(const Polyhedron& outer, const Polyhedron& inner)
{
    if (inner.is_empty())
        return std::nullopt;
    for (const auto& v : inner.vertices())
        if (outer.is_empty() || !contains_point(outer, v))
            return v;
    return std::nullopt;
}

inline VRep minkowski_sum(const VRep& a, const VRep& b)
{
    if (a.dim != b.dim)
        throw DimensionError("Minkowski sum of dimensions " + std::to_string(a.dim) + " and " + std::to_string(b.dim));
    if (a.vertices.empty() || b.vertices.empty())
        return VRep{a.dim, {}, {}};
    VRep s;
    s.dim = a.dim;
    for (const auto& p : a.vertices)
        for (const auto& q : b.vertices)
            s.vertices.push_back(p + q);
    s.rays = a.rays;
    s.rays.insert(s.rays.end(), b.rays.begin(), b.rays.end());
    return Polyhedron::from_v(s).vrep();
}

inline Polyhedron minkowski_sum(const Polyhedron& a, const Polyhedron& b)
{
    if (a.is_empty() || b.is_empty()) {
        if (a.dim() != b.dim())
            throw DimensionError("Minkowski sum of dimensions " + std::to_string(a.dim()) + " and " +
                                 std::to_string(b.dim()));
        return Polyhedron::empty_set(a.dim());
    }
    return Polyhedron::from_v(minkowski_sum(a.vrep(), b.vrep()));
}

inline VRep scale(const VRep& a, const Rational& lambda)
{
    if (lambda.sign() <= 0)
        throw PreconditionError("scale factor must be positive, got " + lambda.str());
    VRep s = a;
    for (auto& p : s.vertices)
        for (auto& x : p)
            x *= lambda;
    return s;
}

inline Polyhedron scale(const Polyhedron& a, const Rational& lambda)
{
    if (a.is_empty()) {
        if (lambda.sign() <= 0)
            throw PreconditionError("scale factor must be positive, got " + lambda.str());
        return a;
    }
    return Polyhedron::from_v(scale(a.vrep(), lambda));
}

inline Polyhedron translate(const Polyhedron& a, std::span<const Rational> shift)
{
    if (shift.size() != a.dim())
        throw DimensionError("translation by " + to_string(shift) + " in dimension " + std::to_string(a.dim()));
    if (a.is_empty())
        return a;
    VRep v = a.vrep();
    RatVector s(shift.begin(), shift.end());
    for (auto& p : v.vertices)
        p = p + s;
    return Polyhedron::from_v(v);
}

inline Polyhedron intersect(const Polyhedron& a, const Polyhedron& b)
{
    if (a.dim() != b.dim())
        throw DimensionError("intersection of dimensions " + std::to_string(a.dim()) + " and " +
                             std::to_string(b.dim()));
    if (a.is_empty() || b.is_empty())
        return Polyhedron::empty_set(a.dim());
    HRep h = a.hrep();
    const HRep& o = b.hrep();
    for (std::size_t i = 0; i < o.size(); ++i)
        h.add(o.A.row(i), o.b[i], o.equality[i]);
    return Polyhedron::from_h(h);
}

/**
 * Closed convex upper set: P + R^d_+ = P. Houses upper images and the
 * flexibility sets F(x). May be empty.
 */
class UpperSet
{
public:
    UpperSet() = default;

    explicit UpperSet(Polyhedron p) : p_(std::move(p))
    {
        if (p_.is_empty())
            return;
        for (std::size_t i = 0; i < p_.dim(); ++i)
            if (!contains_direction(p_, unit_vector(p_.dim(), i)))
                throw PreconditionError("polyhedron is not an upper set: direction e" + std::to_string(i + 1) +
                                        " is not a recession direction");
    }

    static UpperSet empty_set(std::size_t dim) { return UpperSet(Polyhedron::empty_set(dim)); }

    const Polyhedron& polyhedron() const { return p_; }
    std::size_t dim() const { return p_.dim(); }
    bool is_empty() const { return p_.is_empty(); }
    const std::vector<RatVector>& vertices() const { return p_.vertices(); }
    const std::vector<RatVector>& rays() const { return p_.rays(); }
    const HRep& hrep() const { return p_.hrep(); }
    const VRep& vrep() const { return p_.vrep(); }

    friend bool operator==(const UpperSet&, const UpperSet&) = default;

private:
    Polyhedron p_;
};

inline bool contains_point(const UpperSet& p, std::span<const Rational> x) { return contains_point(p.polyhedron(), x); }
inline bool contains_set(const UpperSet& outer, const UpperSet& inner)
{
    return contains_set(outer.polyhedron(), inner.polyhedron());
}

/** A + R^d_+ for a nonempty generator list. */
inline UpperSet hat(const VRep& v)
{
    if (v.vertices.empty())
        throw PreconditionError("hat of an empty generator list");
    VRep w = v;
    for (std::size_t i = 0; i < v.dim; ++i)
        w.rays.push_back(unit_vector(v.dim, i));
    return UpperSet(Polyhedron::from_v(w));
}

inline UpperSet hat(const Polyhedron& p)
{
    if (p.is_empty())
        return UpperSet::empty_set(p.dim());
    return hat(p.vrep());
}

inline UpperSet minkowski_sum(const UpperSet& a, const UpperSet& b)
{
    return UpperSet(minkowski_sum(a.polyhedron(), b.polyhedron()));
}

inline UpperSet scale(const UpperSet& a, const Rational& lambda) { return UpperSet(scale(a.polyhedron(), lambda)); }

inline UpperSet translate(const UpperSet& a, std::span<const Rational> shift)
{
    return UpperSet(translate(a.polyhedron(), shift));
}

/** conv of the union of upper sets, plus R^d_+ (the lattice infimum). */
inline UpperSet convex_union(const std::vector<UpperSet>& sets, std::size_t dim)
{
    VRep v;
    v.dim = dim;
    for (const auto& s : sets) {
        if (s.dim() != dim)
            throw DimensionError("convex union of sets in dimensions " + std::to_string(s.dim()) + " and " +
                                 std::to_string(dim));
        v.vertices.insert(v.vertices.end(), s.vertices().begin(), s.vertices().end());
    }
    if (v.vertices.empty())
        return UpperSet::empty_set(dim);
    return hat(v);
}

/**
 * Boundedness in the sense that the recession cone is exactly R^d_+.
 * Throws InfeasibleError for the empty set.
 */
inline bool check_A2(const UpperSet& p)
{
    if (p.is_empty())
        throw InfeasibleError("infeasible problem");
    std::vector<RatVector> units;
    for (std::size_t i = 0; i < p.dim(); ++i)
        units.push_back(unit_vector(p.dim(), i));
    std::sort(units.begin(), units.end());
    return p.rays() == units;
}

/**
 * Same test on a raw inequality system, which may describe sets with
 * lineality: {r : A r >= 0, A_eq r = 0} must equal R^d_+.
 */
inline bool check_A2(const HRep& h)
{
    const std::size_t d = h.dim;
    LpProblem feas = LpProblem::nonnegative(d);
    for (std::size_t j = 0; j < d; ++j)
        feas.lower[j] = std::nullopt;
    for (std::size_t i = 0; i < h.size(); ++i)
        feas.add_row(h.A.row_vector(i), h.equality[i] ? Sense::Eq : Sense::Ge, h.b[i]);
    if (solve_lp(feas).status != LpStatus::Optimal)
        throw InfeasibleError("infeasible problem");

    LpProblem cone = LpProblem::nonnegative(d);
    for (std::size_t j = 0; j < d; ++j) {
        cone.lower[j] = Rational(-1);
        cone.upper[j] = Rational(1);
    }
    for (std::size_t i = 0; i < h.size(); ++i)
        cone.add_row(h.A.row_vector(i), h.equality[i] ? Sense::Eq : Sense::Ge, Rational{});
    for (std::size_t i = 0; i < d; ++i) {
        // every unit vector must be a recession direction ...
        for (std::size_t r = 0; r < h.size(); ++r) {
            int s = h.A(r, i).sign();
            if (h.equality[r] ? s != 0 : s < 0)
                return false;
        }
        // ... and no recession direction may have a negative coordinate
        cone.objective.assign(d, Rational{});
        cone.objective[i] = 1;
        if (solve_lp(cone).value.sign() < 0)
            return false;
    }
    return true;
}

} // namespace flexrec
