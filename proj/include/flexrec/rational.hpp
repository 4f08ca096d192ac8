#pragma once

#include <gmpxx.h>

#include <compare>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace flexrec {

/** Raised for text that is not a valid rational literal. */
class RationalFormatError : public std::invalid_argument
{
public:
    explicit RationalFormatError(const std::string& what) : std::invalid_argument(what) {}
};

/**
 * Exact rational number backed by GMP.
 *
 * Values are always kept in canonical form: gcd(|num|, den) = 1 and den >= 1.
 * Division by zero throws std::domain_error.
 */
class Rational
{
public:
    Rational() = default;
    Rational(int n) : v_(static_cast<long>(n)) {}
    Rational(long n) : v_(n) {}
    Rational(long long n) : v_(static_cast<long>(n)) {}
    Rational(unsigned n) : v_(static_cast<unsigned long>(n)) {}
    Rational(unsigned long n) : v_(n) {}
    Rational(long long num, long long den)
    {
        if (den == 0)
            throw std::domain_error("rational with zero denominator");
        v_ = mpq_class(mpz_class(static_cast<long>(num)), mpz_class(static_cast<long>(den)));
        v_.canonicalize();
    }
    explicit Rational(const mpq_class& q) : v_(q) { v_.canonicalize(); }
    explicit Rational(const mpz_class& z) : v_(z) {}

    /**
     * Parses "n", "-n", "+n" or "n/d" with decimal digits only. Anything else,
     * notably decimal points and exponents, is rejected.
     */
    static Rational parse(std::string_view text)
    {
        auto fail = [&](const char* why) {
            throw RationalFormatError("malformed rational '" + std::string(text) + "': " + why);
        };
        if (text.empty())
            fail("empty string");
        if (text.find_first_of(".eE") != std::string_view::npos)
            fail("use num/den form");
        auto slash = text.find('/');
        std::string_view num = text.substr(0, slash);
        std::string_view den = slash == std::string_view::npos ? std::string_view{"1"} : text.substr(slash + 1);
        auto digits_ok = [](std::string_view s, bool allow_sign) {
            if (allow_sign && !s.empty() && (s.front() == '-' || s.front() == '+'))
                s.remove_prefix(1);
            if (s.empty())
                return false;
            for (char c : s)
                if (c < '0' || c > '9')
                    return false;
            return true;
        };
        if (!digits_ok(num, true) || !digits_ok(den, false))
            fail("use num/den form");
        std::string n(num);
        if (n.front() == '+')
            n.erase(0, 1);
        mpz_class zn(n, 10), zd(std::string(den), 10);
        if (zd == 0)
            fail("zero denominator");
        mpq_class q(zn, zd);
        q.canonicalize();
        return Rational(q);
    }

    const mpq_class& mpq() const { return v_; }
    mpz_class numerator() const { return v_.get_num(); }
    mpz_class denominator() const { return v_.get_den(); }

    int sign() const { return sgn(v_); }
    bool is_zero() const { return sgn(v_) == 0; }
    bool is_integer() const { return v_.get_den() == 1; }
    double to_double() const { return v_.get_d(); }

    /** "num/den", or just "num" when the denominator is 1. */
    std::string str() const { return v_.get_str(); }

    Rational operator-() const
    {
        Rational r;
        mpq_neg(r.v_.get_mpq_t(), v_.get_mpq_t());
        return r;
    }
    Rational abs() const { return sign() < 0 ? -*this : *this; }
    Rational inverse() const
    {
        if (is_zero())
            throw std::domain_error("division by zero");
        Rational r;
        mpq_inv(r.v_.get_mpq_t(), v_.get_mpq_t());
        return r;
    }

    Rational& operator+=(const Rational& o)
    {
        mpq_add(v_.get_mpq_t(), v_.get_mpq_t(), o.v_.get_mpq_t());
        return *this;
    }
    Rational& operator-=(const Rational& o)
    {
        mpq_sub(v_.get_mpq_t(), v_.get_mpq_t(), o.v_.get_mpq_t());
        return *this;
    }
    Rational& operator*=(const Rational& o)
    {
        mpq_mul(v_.get_mpq_t(), v_.get_mpq_t(), o.v_.get_mpq_t());
        return *this;
    }
    Rational& operator/=(const Rational& o)
    {
        if (o.is_zero())
            throw std::domain_error("division by zero");
        mpq_div(v_.get_mpq_t(), v_.get_mpq_t(), o.v_.get_mpq_t());
        return *this;
    }

    /** this -= a * b, without a named temporary at the call site. */
    void sub_product(const Rational& a, const Rational& b)
    {
        thread_local mpq_class tmp;
        mpq_mul(tmp.get_mpq_t(), a.v_.get_mpq_t(), b.v_.get_mpq_t());
        mpq_sub(v_.get_mpq_t(), v_.get_mpq_t(), tmp.get_mpq_t());
    }
    /** this += a * b */
    void add_product(const Rational& a, const Rational& b)
    {
        thread_local mpq_class tmp;
        mpq_mul(tmp.get_mpq_t(), a.v_.get_mpq_t(), b.v_.get_mpq_t());
        mpq_add(v_.get_mpq_t(), v_.get_mpq_t(), tmp.get_mpq_t());
    }

    friend Rational operator+(Rational a, const Rational& b) { return a += b; }
    friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
    friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
    friend Rational operator/(Rational a, const Rational& b) { return a /= b; }

    friend bool operator==(const Rational& a, const Rational& b) { return mpq_equal(a.v_.get_mpq_t(), b.v_.get_mpq_t()) != 0; }
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b)
    {
        int c = mpq_cmp(a.v_.get_mpq_t(), b.v_.get_mpq_t());
        return c < 0 ? std::strong_ordering::less : c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal;
    }

    friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

private:
    mpq_class v_;
};

inline Rational abs(const Rational& r) { return r.abs(); }

} // namespace flexrec
