#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "cansub/errors.hpp"

namespace cansub {

using fp_t = std::uint32_t;
/// Element coordinates in the power basis of its level's defining polynomial.
using FE = std::vector<fp_t>;

/// A chain F_p = F_{p^{n_0}} ⊂ F_{p^{n_1}} ⊂ ... of concrete fields, each
/// presented as F_p[x]/(f_i) with f_i over F_p, plus stored embeddings of each
/// level into the next. Extension always happens at the top, so the chain
/// order is the divisibility order and composed embeddings are consistent by
/// construction. Immutable; extended() returns a new tower sharing the prefix.
class FieldTower {
public:
    struct Level {
        int degree = 1;                // over F_p
        std::vector<fp_t> minpoly;     // monic, length degree+1, coeffs in F_p
        std::vector<fp_t> embed_mat;   // degree x prev_degree, row-major; empty at level 0
        std::vector<fp_t> frob_mat;    // degree x degree matrix of c -> c^p
        std::vector<fp_t> inv_frob_mat;
    };
    struct Data {
        long p = 3;
        int max_total_degree = 64;
        std::vector<Level> levels;
    };

    FieldTower() = default;
    /// Base field F_{p^m} with the given monic defining polynomial over F_p
    /// (validated irreducible; for m = 1 any monic linear polynomial works).
    FieldTower(long p, const std::vector<fp_t>& base_minpoly, int max_total_degree = 64);
    /// Base field F_{p^m} with a deterministically chosen defining polynomial.
    FieldTower(long p, int m, int max_total_degree = 64);

    long p() const { return d_->p; }
    int num_levels() const { return static_cast<int>(d_->levels.size()); }
    int degree(int level) const { return d_->levels.at(level).degree; }
    const Level& level(int i) const { return d_->levels.at(i); }
    std::shared_ptr<const Data> data() const { return d_; }

    /// Appends a level of degree (top degree)*factor. Existing element
    /// coordinates remain valid in the returned tower.
    FieldTower extended(int factor) const;

    /// True when the two towers agree on their common prefix of levels.
    bool compatible(const FieldTower& o) const;
    /// The longer of two compatible towers.
    static FieldTower join(const FieldTower& a, const FieldTower& b);

private:
    std::shared_ptr<const Data> d_;
    explicit FieldTower(std::shared_ptr<const Data> d) : d_(std::move(d)) {}
};

/// Handle to one level of a tower; all element operations live here.
/// Elements are plain coordinate vectors (length degree()).
class Fq {
public:
    Fq() = default;
    Fq(FieldTower tw, int level) : tw_(std::move(tw)), level_(level) {}

    long p() const { return tw_.p(); }
    int level() const { return level_; }
    int degree() const { return tw_.degree(level_); }
    const FieldTower& tower() const { return tw_; }
    Fq at_level(int lvl) const { return Fq(tw_, lvl); }
    Fq top() const { return Fq(tw_, tw_.num_levels() - 1); }

    bool same_field(const Fq& o) const { return level_ == o.level_ && tw_.compatible(o.tw_); }

    FE zero() const { return FE(degree(), 0); }
    FE one() const { return from_int(1); }
    FE from_int(long v) const;
    bool is_zero(const FE& a) const;
    bool eq(const FE& a, const FE& b) const;

    FE add(const FE& a, const FE& b) const;
    FE sub(const FE& a, const FE& b) const;
    FE neg(const FE& a) const;
    FE mul(const FE& a, const FE& b) const;
    FE inv(const FE& a) const;
    FE pow(FE a, unsigned long long n) const;
    FE frob(const FE& a) const;     // c -> c^p
    FE inv_frob(const FE& a) const; // the inverse bijection
    /// Lift coordinates from a lower level of the same tower to this level.
    FE lift(const FE& a, int from_level) const;

    /// Multiplicative generator of this level's field (deterministic search).
    FE generator() const;

    /// Deterministic total order on elements (coordinate-lexicographic).
    static int cmp(const FE& a, const FE& b);

private:
    FieldTower tw_;
    int level_ = 0;
};

/// Unifies two handles over compatible towers; elements must be lifted by the
/// caller using the returned handle.
Fq unify(const Fq& a, const Fq& b);

/// All solutions y in k-bar of sum_k coeffs[k]*y^{p^k} = rhs, extending the
/// tower as needed (splitting-field construction). Input coefficients live at
/// K's level; returned roots live at the level of the returned handle.
/// Roots are sorted coordinate-lexicographically. Throws FieldTooSmall when
/// the needed extension would exceed the tower's max total degree.
struct AdditiveFieldRoots {
    Fq field;              // possibly extended
    std::vector<FE> roots; // all p^D solutions, D = deg span of the separable core
};
AdditiveFieldRoots additive_field_roots(const Fq& K, const std::vector<FE>& coeffs, const FE& rhs);

namespace fppoly {
/// Dense polynomials over F_p (lowest degree first), used for minpoly
/// machinery. All functions take p explicitly.
std::vector<fp_t> trim(std::vector<fp_t> a);
std::vector<fp_t> mul(const std::vector<fp_t>& a, const std::vector<fp_t>& b, long p);
std::vector<fp_t> mod(std::vector<fp_t> a, const std::vector<fp_t>& f, long p);
std::vector<fp_t> gcd(std::vector<fp_t> a, std::vector<fp_t> b, long p);
bool is_irreducible(const std::vector<fp_t>& f, long p);
/// First irreducible monic polynomial of the given degree in base-p counter order.
std::vector<fp_t> find_irreducible(long p, int degree);
} // namespace fppoly

} // namespace cansub
