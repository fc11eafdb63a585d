#pragma once

#include <cstdint>
#include <numeric>
#include <string>

#include "cansub/errors.hpp"

namespace cansub {

/// Exact rational on int64, always normalized with positive denominator.
/// Overflow of intermediates is checked via __int128 to fail loudly instead of
/// silently wrapping (valuation bookkeeping must be exact).
struct Rat {
    std::int64_t num = 0;
    std::int64_t den = 1;

    Rat() = default;
    Rat(std::int64_t n) : num(n), den(1) {}
    Rat(std::int64_t n, std::int64_t d) : num(n), den(d) { normalize(); }

    void normalize() {
        if (den == 0) throw InvalidInput("Rat: zero denominator");
        if (den < 0) {
            num = -num;
            den = -den;
        }
        std::int64_t g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) {
            num /= g;
            den /= g;
        }
    }

    static Rat from_i128(__int128 n, __int128 d) {
        if (d == 0) throw InvalidInput("Rat: zero denominator");
        if (d < 0) {
            n = -n;
            d = -d;
        }
        __int128 a = n < 0 ? -n : n;
        __int128 b = d;
        while (b) {
            __int128 t = a % b;
            a = b;
            b = t;
        }
        if (a > 1) {
            n /= a;
            d /= a;
        }
        const __int128 lim = static_cast<__int128>(INT64_MAX);
        if (n > lim || n < -lim || d > lim) throw ExponentDenominatorOverflow("Rat: int64 overflow");
        Rat r;
        r.num = static_cast<std::int64_t>(n);
        r.den = static_cast<std::int64_t>(d);
        return r;
    }

    friend Rat operator+(const Rat& a, const Rat& b) {
        return from_i128((__int128)a.num * b.den + (__int128)b.num * a.den, (__int128)a.den * b.den);
    }
    friend Rat operator-(const Rat& a, const Rat& b) {
        return from_i128((__int128)a.num * b.den - (__int128)b.num * a.den, (__int128)a.den * b.den);
    }
    friend Rat operator*(const Rat& a, const Rat& b) {
        return from_i128((__int128)a.num * b.num, (__int128)a.den * b.den);
    }
    friend Rat operator/(const Rat& a, const Rat& b) {
        if (b.num == 0) throw InvalidInput("Rat: division by zero");
        return from_i128((__int128)a.num * b.den, (__int128)a.den * b.num);
    }
    Rat operator-() const {
        Rat r = *this;
        r.num = -r.num;
        return r;
    }

    friend bool operator==(const Rat& a, const Rat& b) { return a.num == b.num && a.den == b.den; }
    friend bool operator!=(const Rat& a, const Rat& b) { return !(a == b); }
    friend bool operator<(const Rat& a, const Rat& b) {
        return (__int128)a.num * b.den < (__int128)b.num * a.den;
    }
    friend bool operator>(const Rat& a, const Rat& b) { return b < a; }
    friend bool operator<=(const Rat& a, const Rat& b) { return !(b < a); }
    friend bool operator>=(const Rat& a, const Rat& b) { return !(a < b); }

    bool is_integer() const { return den == 1; }
    bool is_zero() const { return num == 0; }

    /// Floor as int64 (num may be negative).
    std::int64_t floor() const {
        std::int64_t q = num / den;
        if (num % den != 0 && num < 0) --q;
        return q;
    }

    std::string str() const {
        if (den == 1) return std::to_string(num);
        return std::to_string(num) + "/" + std::to_string(den);
    }

    /// Parses "a", "a/b" or a plain decimal like "0.25".
    static Rat parse(const std::string& s);
};

inline Rat Rat::parse(const std::string& s) {
    auto bad = [&]() -> Rat { throw InvalidInput("cannot parse rational: '" + s + "'"); };
    if (s.empty()) return bad();
    auto slash = s.find('/');
    try {
        if (slash != std::string::npos) {
            std::int64_t n = std::stoll(s.substr(0, slash));
            std::int64_t d = std::stoll(s.substr(slash + 1));
            return Rat(n, d);
        }
        auto dot = s.find('.');
        if (dot == std::string::npos) return Rat(std::stoll(s));
        std::string frac = s.substr(dot + 1);
        if (frac.empty() || frac.size() > 15) return bad();
        std::int64_t den = 1;
        for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
        std::string ip = s.substr(0, dot);
        bool neg = !ip.empty() && ip[0] == '-';
        std::int64_t whole = (ip.empty() || ip == "-" || ip == "+") ? 0 : std::stoll(ip);
        std::int64_t f = std::stoll(frac);
        std::int64_t n = whole * den + (neg || whole < 0 ? -f : f);
        return Rat(n, den);
    } catch (const std::exception&) {
        return bad();
    }
}

} // namespace cansub
