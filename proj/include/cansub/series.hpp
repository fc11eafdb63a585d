#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cansub/field.hpp"
#include "cansub/rational.hpp"

namespace cansub {

/// Sentinel precision for exactly known series (e.g. polynomial inputs).
constexpr std::int64_t PREC_EXACT = (std::int64_t)1 << 62;
/// Precisions at or above this are treated as exact when propagating.
constexpr std::int64_t PREC_HUGE = (std::int64_t)1 << 40;

inline std::int64_t prec_add(std::int64_t a, std::int64_t b) {
    if (a >= PREC_HUGE || b >= PREC_HUGE) return PREC_EXACT;
    return a + b;
}

/// Truncated power series over F_{p^m}: dense coefficients from exponent 0,
/// known modulo u^prec. Immutable value type; arithmetic propagates precision
/// pessimistically.
class TruncSeries {
public:
    TruncSeries() = default;
    TruncSeries(Fq K, std::int64_t prec) : K_(std::move(K)), prec_(prec) {}

    static TruncSeries zero(const Fq& K, std::int64_t prec = PREC_EXACT) { return TruncSeries(K, prec); }
    static TruncSeries one(const Fq& K, std::int64_t prec = PREC_EXACT) {
        return monomial(K, 0, K.one(), prec);
    }
    static TruncSeries monomial(const Fq& K, std::int64_t exp, const FE& c, std::int64_t prec = PREC_EXACT);
    static TruncSeries from_terms(const Fq& K, const std::vector<std::pair<std::int64_t, FE>>& terms,
                                  std::int64_t prec = PREC_EXACT);

    const Fq& field() const { return K_; }
    std::int64_t prec() const { return prec_; }
    bool exact() const { return prec_ >= PREC_HUGE; }
    std::int64_t len() const { return K_.degree() ? (std::int64_t)(a_.size() / K_.degree()) : 0; }

    FE coeff(std::int64_t exp) const;
    void set_coeff(std::int64_t exp, const FE& c); // builder use; keeps exp < prec
    /// Least exponent with a nonzero coefficient; nullopt when zero to precision.
    std::optional<std::int64_t> val() const;
    std::int64_t val_or_prec() const;
    bool is_zero_to_prec() const;
    bool is_exact_zero() const { return exact() && is_zero_to_prec(); }

    TruncSeries truncated(std::int64_t new_prec) const;
    TruncSeries lifted_to(const Fq& K2) const;

    friend TruncSeries operator+(const TruncSeries& a, const TruncSeries& b);
    friend TruncSeries operator-(const TruncSeries& a, const TruncSeries& b);
    friend TruncSeries operator*(const TruncSeries& a, const TruncSeries& b);
    TruncSeries operator-() const;
    TruncSeries scaled(const FE& c) const;

    /// phi: u -> u^p on the series, p-th power on coefficients.
    TruncSeries frobenius() const;
    TruncSeries shifted_up(std::int64_t k) const;
    /// Exact division by u^k; requires valuation >= k.
    TruncSeries shifted_down(std::int64_t k) const;
    /// Multiplicative inverse of a unit (valuation 0), to the given precision.
    TruncSeries inverse(std::int64_t target_prec) const;

    bool eq_to_prec(const TruncSeries& o, std::int64_t upto = PREC_EXACT) const;

    std::string str() const;

private:
    Fq K_;
    std::int64_t prec_ = PREC_EXACT;
    std::vector<fp_t> a_; // flat: coeff of u^i at [i*m, (i+1)*m)
    void trim();
    friend class SeriesMatrix;
};

/// Exact division a/b in k[[u]] at working precision; requires v(b) <= v(a).
TruncSeries divide_exact(const TruncSeries& a, const TruncSeries& b);

/// Sparse series with non-negative rational exponents, approximating elements
/// of the tilt ring R. prec = nullopt means exact.
class PuiseuxSeries {
public:
    PuiseuxSeries() = default;
    explicit PuiseuxSeries(Fq K, std::optional<Rat> prec = std::nullopt)
        : K_(std::move(K)), prec_(std::move(prec)) {}

    static PuiseuxSeries zero(const Fq& K) { return PuiseuxSeries(K); }
    static PuiseuxSeries monomial(const Fq& K, const Rat& exp, const FE& c);
    static PuiseuxSeries from_trunc(const TruncSeries& t);

    const Fq& field() const { return K_; }
    const std::optional<Rat>& prec() const { return prec_; }
    bool exact() const { return !prec_.has_value(); }
    const std::map<Rat, FE>& terms() const { return c_; }

    std::optional<Rat> val() const;
    bool is_zero_to_prec() const { return c_.empty(); }
    bool is_exact_zero() const { return exact() && c_.empty(); }
    FE coeff(const Rat& e) const;
    void add_term(const Rat& e, const FE& c); // builder

    PuiseuxSeries truncated(const Rat& new_prec) const;
    PuiseuxSeries with_prec(std::optional<Rat> p) const;
    PuiseuxSeries lifted_to(const Fq& K2) const;

    friend PuiseuxSeries operator+(const PuiseuxSeries& a, const PuiseuxSeries& b);
    friend PuiseuxSeries operator-(const PuiseuxSeries& a, const PuiseuxSeries& b);
    friend PuiseuxSeries operator*(const PuiseuxSeries& a, const PuiseuxSeries& b);
    PuiseuxSeries operator-() const;
    PuiseuxSeries scaled(const FE& c) const;
    /// Scaling by an F_p scalar (lifted to this series' level).
    PuiseuxSeries scaled_int(long c) const { return scaled(K_.from_int(c)); }
    PuiseuxSeries shifted(const Rat& e) const;

    PuiseuxSeries frobenius(int iterations = 1) const;
    /// p-th root: exponents divided by p, coefficients through the inverse
    /// Frobenius. Throws ExponentDenominatorOverflow past den_cap.
    PuiseuxSeries pth_root(std::int64_t den_cap) const;

    bool eq_to_common_prec(const PuiseuxSeries& o) const;
    /// Deterministic total order (by terms, then precision).
    static int cmp(const PuiseuxSeries& a, const PuiseuxSeries& b);

    std::string str() const;

private:
    Fq K_;
    std::optional<Rat> prec_;
    std::map<Rat, FE> c_;
    void drop_beyond_prec();
};

} // namespace cansub
