#pragma once

#include "flexrec/errors.hpp"
#include "flexrec/rational.hpp"

#include <cstddef>
#include <initializer_list>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace flexrec {

using RatVector = std::vector<Rational>;

/** Dense row-major matrix of exact rationals. */
class RatMatrix
{
public:
    RatMatrix() = default;
    RatMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
    RatMatrix(std::initializer_list<std::initializer_list<Rational>> rows)
    {
        rows_ = rows.size();
        cols_ = rows_ == 0 ? 0 : rows.begin()->size();
        data_.reserve(rows_ * cols_);
        for (const auto& r : rows) {
            if (r.size() != cols_)
                throw DimensionError("ragged matrix literal");
            data_.insert(data_.end(), r.begin(), r.end());
        }
    }

    static RatMatrix from_rows(const std::vector<RatVector>& rows, std::size_t cols)
    {
        RatMatrix m(rows.size(), cols);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != cols)
                throw DimensionError("row " + std::to_string(i) + " has length " + std::to_string(rows[i].size()) +
                                     ", expected " + std::to_string(cols));
            for (std::size_t j = 0; j < cols; ++j)
                m(i, j) = rows[i][j];
        }
        return m;
    }

    static RatMatrix identity(std::size_t n)
    {
        RatMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i)
            m(i, i) = 1;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return rows_ == 0 || cols_ == 0; }

    Rational& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const Rational& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<const Rational> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
    std::span<Rational> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    RatVector row_vector(std::size_t i) const { return RatVector(row(i).begin(), row(i).end()); }

    void append_row(std::span<const Rational> r)
    {
        if (rows_ == 0 && cols_ == 0)
            cols_ = r.size();
        if (r.size() != cols_)
            throw DimensionError("appended row has length " + std::to_string(r.size()) + ", expected " +
                                 std::to_string(cols_));
        data_.insert(data_.end(), r.begin(), r.end());
        ++rows_;
    }

    RatVector operator*(std::span<const Rational> x) const
    {
        if (x.size() != cols_)
            throw DimensionError("matrix-vector product: " + std::to_string(cols_) + " columns vs vector of length " +
                                 std::to_string(x.size()));
        RatVector out(rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j)
                if (!(*this)(i, j).is_zero())
                    out[i].add_product((*this)(i, j), x[j]);
        return out;
    }

    friend bool operator==(const RatMatrix&, const RatMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Rational> data_;
};

inline Rational dot(std::span<const Rational> a, std::span<const Rational> b)
{
    if (a.size() != b.size())
        throw DimensionError("dot product of vectors with lengths " + std::to_string(a.size()) + " and " +
                             std::to_string(b.size()));
    Rational s;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!a[i].is_zero() && !b[i].is_zero())
            s.add_product(a[i], b[i]);
    return s;
}

inline RatVector operator+(const RatVector& a, const RatVector& b)
{
    if (a.size() != b.size())
        throw DimensionError("vector sum of lengths " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
    RatVector r(a);
    for (std::size_t i = 0; i < r.size(); ++i)
        r[i] += b[i];
    return r;
}

inline RatVector operator-(const RatVector& a, const RatVector& b)
{
    if (a.size() != b.size())
        throw DimensionError("vector difference of lengths " + std::to_string(a.size()) + " and " +
                             std::to_string(b.size()));
    RatVector r(a);
    for (std::size_t i = 0; i < r.size(); ++i)
        r[i] -= b[i];
    return r;
}

inline RatVector operator*(const Rational& s, RatVector v)
{
    for (auto& x : v)
        x *= s;
    return v;
}

inline bool is_zero(std::span<const Rational> v)
{
    for (const auto& x : v)
        if (!x.is_zero())
            return false;
    return true;
}

inline RatVector unit_vector(std::size_t dim, std::size_t i)
{
    RatVector e(dim);
    e[i] = 1;
    return e;
}

/** Componentwise a <= b. */
inline bool dominated_by(std::span<const Rational> a, std::span<const Rational> b)
{
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] > b[i])
            return false;
    return true;
}

/** Rescale v to the unique primitive integer vector pointing the same way. */
inline void make_primitive(RatVector& v)
{
    mpz_class l = 1;
    for (const auto& x : v)
        if (!x.is_zero())
            mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), x.mpq().get_den_mpz_t());
    mpz_class g = 0;
    for (const auto& x : v) {
        if (x.is_zero())
            continue;
        mpz_class n = x.mpq().get_num() * (l / x.mpq().get_den());
        mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), n.get_mpz_t());
    }
    if (g == 0)
        return;
    Rational factor(mpq_class(l, g));
    for (auto& x : v)
        x *= factor;
}

/** Scale so that the first nonzero entry has absolute value one. */
inline void normalize_leading(RatVector& v)
{
    for (const auto& x : v) {
        if (!x.is_zero()) {
            Rational f = x.abs().inverse();
            for (auto& y : v)
                y *= f;
            return;
        }
    }
}

inline std::string to_string(std::span<const Rational> v)
{
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < v.size(); ++i)
        os << (i ? ", " : "") << v[i];
    os << ')';
    return os.str();
}

} // namespace flexrec
