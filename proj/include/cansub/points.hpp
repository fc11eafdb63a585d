#pragma once

#include <optional>

#include "cansub/canonical.hpp"
#include "cansub/kisin.hpp"

namespace cansub {

/// Tuning for point enumeration over the tilt ring.
struct PointConfig {
    Rat target_prec;               // v_u precision target per coordinate
    std::int64_t den_cap = 0;      // exponent denominator cap
    int max_corrections = 256;     // per-branch correction budget
    int max_h = 3;                 // enumeration rank cap
    /// Start coefficient arithmetic at this field (must extend the module's
    /// tower); lets two enumerations share one representation of k-bar.
    std::optional<Fq> field_hint;
    static PointConfig defaults(const KisinModule& M);
};

/// One enumerated point representative. The true points within u^honest_prec
/// of the stored coordinates form a coset of the subgroup of points with
/// all-coordinate valuation >= honest_prec; mult is its size. Fully resolved
/// points have mult = 1.
struct PointRep {
    std::vector<PuiseuxSeries> x;
    Rat honest_prec;
    long long mult = 1;
    bool is_zero_rep() const {
        for (const auto& s : x)
            if (!s.is_zero_to_prec()) return false;
        return true;
    }
};

struct PointSet {
    std::vector<PointRep> pts; // sorted, zero first
    Rat resolution;            // min honest precision over representatives
    long long total = 0;       // sum of multiplicities (= p^h when complete)
};

/// One root approximation from the additive solver.
struct RootApprox {
    PuiseuxSeries y;
    Rat honest_prec;
    long long mult = 1;
};

/// M_k = A phi(A) ... phi^{k-1}(A) for k = 0..k_max, so x^{p^k} = x * M_k.
std::vector<SeriesMatrix> frobenius_powers(const KisinModule& M, int k_max);

/// Minimal-length primitive relation sum_k c_k * (column var of M_k) = 0,
/// normalized so the first nonzero c_k has lowest-order coefficient 1.
/// var is 1-based to match the operation's contract.
std::vector<TruncSeries> additive_resultant(const KisinModule& M, int var);

/// All roots y (v(y) >= 0) of sum_k coeffs[k] * y^{p^k} = rhs, to the target
/// precision, with wild branches emitted as cluster representatives.
std::vector<RootApprox> solve_additive(const std::vector<PuiseuxSeries>& coeffs,
                                       const PuiseuxSeries& rhs, const PointConfig& cfg);

/// The p^h homomorphisms into the tilt ring, as certified representatives.
PointSet enumerate_points(const KisinModule& M, const PointConfig& cfg);

/// Independent enumeration path for upper-triangular A (coordinate-by-
/// coordinate back-substitution).
PointSet enumerate_points_triangular(const KisinModule& M, const PointConfig& cfg);

/// Lower ramification data: break of a nonzero point = min coordinate
/// valuation / e, in the v_R normalization.
struct RamificationReport {
    std::vector<std::pair<Rat, long long>> breaks; // sorted, with multiplicities
    long long order = 0;                           // |G| = total points
    int e = 1;
};
RamificationReport lower_breaks(const KisinModule& M, const PointSet& ps);

/// Indices of representatives in G_i (strict=false: v >= i) or G_{i+}
/// (strict=true: v > i); i in the v_R normalization.
std::vector<int> subgroup_at(const KisinModule& M, const PointSet& ps, const Rat& i, bool strict);
long long subgroup_order(const KisinModule& M, const PointSet& ps, const Rat& i, bool strict);

/// Cartier pairing value in F_p, or nullopt when the truncations cannot
/// resolve it (only possible for two wild representatives).
struct Pairing {
    Pairing(const KisinModule& M, const PointConfig& cfg);
    std::optional<long> value(const PointRep& x, const PointRep& y) const;
    PuiseuxSeries z0; // reference generator of T(S1^vee), v_R = 1/(p-1)
private:
    const KisinModule& M_;
    Rat v0_;
    FE zeta0_;
    Fq K0_;
};

/// Full pairing table between two point sets; entries may be unresolved.
std::vector<std::vector<std::optional<long>>> pairing_table(const KisinModule& M,
                                                            const PointSet& ps,
                                                            const PointSet& psd,
                                                            const PointConfig& cfg);

/// Certifies that both kernels of the pairing are trivial using only
/// resolved entries.
bool pairing_nondegenerate(const PointSet& ps, const PointSet& psd,
                           const std::vector<std::vector<std::optional<long>>>& table);

/// Upper ramification subgroup via the duality l(j) = 1/(p-1) - j/p:
/// G^{j+} = ((G^vee)_{l(j)})^perp (plus=true), G^j = ((G^vee)_{l(j)+})^perp.
/// Returns indices into ps.
std::vector<int> upper_subgroup(const KisinModule& M, const PointSet& ps, const PointSet& psd,
                                const std::vector<std::vector<std::optional<long>>>& table,
                                const Rat& j, bool plus);

/// Kernel of the Hodge-Tate map at level b: representatives whose Fil^1-block
/// coordinates (in the adapted basis) all have v_R >= b. Returns indices.
std::vector<int> ht_kernel(const KisinModule& M, const AdaptedPresentation& ad, const PointSet& ps,
                           const Rat& b);

/// Representatives lying in the canonical subgroup (kernel of evaluation on
/// the solver's summand). Returns indices; total multiplicity must be p^d.
std::vector<int> canonical_points(const KisinModule& M, const CanSubResult& res,
                                  const PointSet& ps);

} // namespace cansub
