#ifndef KINKSCAN_RATIONAL_HPP
#define KINKSCAN_RATIONAL_HPP

#include <cstdint>
#include <string>

#include "kinkscan/errors.hpp"

namespace kinkscan {

// Exact rational arithmetic on 128-bit integers. Wide enough for the kernel
// coefficient formulas up to order k = 6 ((4k+5)! = 29! < 2^103) with gcd
// reduction after every operation. Overflow raises errc::numeric instead of
// wrapping.
class Rational {
public:
    using Int = __int128;

    constexpr Rational() : num_(0), den_(1) {}
    Rational(long long value) : num_(value), den_(1) {} // NOLINT: implicit by design
    Rational(long long numerator, long long denominator)
        : num_(numerator), den_(denominator) {
        normalize();
    }

    static Rational factorial(int n) {
        if (n < 0) fail(errc::invalid_argument, "factorial of negative integer");
        Rational r(1);
        for (int i = 2; i <= n; ++i) r = r * Rational(i);
        return r;
    }

    // 2^n for n >= 0.
    static Rational pow2(int n) {
        if (n < 0 || n > 120) fail(errc::invalid_argument, "pow2 exponent out of range");
        Rational r;
        r.num_ = Int(1) << n;
        r.den_ = 1;
        return r;
    }

    Rational operator-() const {
        Rational r = *this;
        r.num_ = -r.num_;
        return r;
    }

    Rational operator+(const Rational& o) const {
        Rational r;
        r.num_ = checked_add(checked_mul(num_, o.den_), checked_mul(o.num_, den_));
        r.den_ = checked_mul(den_, o.den_);
        r.normalize();
        return r;
    }
    Rational operator-(const Rational& o) const { return *this + (-o); }
    Rational operator*(const Rational& o) const {
        // Cross-reduce before multiplying to keep intermediates small.
        Int g1 = gcd(abs(num_), o.den_);
        Int g2 = gcd(abs(o.num_), den_);
        Rational r;
        r.num_ = checked_mul(num_ / g1, o.num_ / g2);
        r.den_ = checked_mul(den_ / g2, o.den_ / g1);
        r.normalize();
        return r;
    }
    Rational operator/(const Rational& o) const {
        if (o.num_ == 0) fail(errc::numeric, "rational division by zero");
        Rational inv;
        inv.num_ = o.den_;
        inv.den_ = o.num_;
        if (inv.den_ < 0) { inv.den_ = -inv.den_; inv.num_ = -inv.num_; }
        return *this * inv;
    }

    Rational& operator+=(const Rational& o) { return *this = *this + o; }
    Rational& operator-=(const Rational& o) { return *this = *this - o; }
    Rational& operator*=(const Rational& o) { return *this = *this * o; }
    Rational& operator/=(const Rational& o) { return *this = *this / o; }

    bool operator==(const Rational& o) const { return num_ == o.num_ && den_ == o.den_; }
    bool operator!=(const Rational& o) const { return !(*this == o); }

    bool is_zero() const { return num_ == 0; }
    int sign() const { return num_ == 0 ? 0 : (num_ < 0 ? -1 : 1); }

    double to_double() const {
        return static_cast<double>(num_) / static_cast<double>(den_);
    }

    // Decimal "num/den" form, mainly for reports and error messages.
    std::string str() const {
        std::string s = int128_to_string(num_);
        if (den_ != 1) s += "/" + int128_to_string(den_);
        return s;
    }

private:
    Int num_;
    Int den_; // > 0 after normalize()

    static Int abs(Int v) { return v < 0 ? -v : v; }

    static Int gcd(Int a, Int b) {
        while (b != 0) {
            Int t = a % b;
            a = b;
            b = t;
        }
        return a == 0 ? 1 : (a < 0 ? -a : a);
    }

    static Int checked_mul(Int a, Int b) {
        Int result;
        if (__builtin_mul_overflow(a, b, &result))
            fail(errc::numeric, "rational overflow in multiplication");
        return result;
    }

    static Int checked_add(Int a, Int b) {
        Int result;
        if (__builtin_add_overflow(a, b, &result))
            fail(errc::numeric, "rational overflow in addition");
        return result;
    }

    void normalize() {
        if (den_ == 0) fail(errc::numeric, "rational with zero denominator");
        if (den_ < 0) { den_ = -den_; num_ = -num_; }
        Int g = gcd(abs(num_), den_);
        num_ /= g;
        den_ /= g;
    }

    static std::string int128_to_string(Int v) {
        if (v == 0) return "0";
        bool neg = v < 0;
        unsigned __int128 u = neg ? static_cast<unsigned __int128>(-(v + 1)) + 1
                                  : static_cast<unsigned __int128>(v);
        std::string digits;
        while (u != 0) {
            digits.push_back(static_cast<char>('0' + static_cast<int>(u % 10)));
            u /= 10;
        }
        if (neg) digits.push_back('-');
        return {digits.rbegin(), digits.rend()};
    }
};

} // namespace kinkscan

#endif
