#pragma once

#include "cansub/matrix.hpp"
#include "cansub/rational.hpp"

namespace cansub {

/// phi-module over k[[u]] of E-height <= 1: phi(e_1..e_h) = (e_1..e_h) A,
/// with u^e A^{-1} integral. cbar0 is the unit image of p^{-1}E(0) in k.
class KisinModule {
public:
    KisinModule(Fq K, int e, FE cbar0, SeriesMatrix A, std::int64_t precision);

    const Fq& field() const { return K_; }
    long p() const { return K_.p(); }
    int m() const { return K_.degree(); }
    int e() const { return e_; }
    const FE& cbar0() const { return cbar0_; }
    int h() const { return A_.rows(); }
    std::int64_t precision() const { return prec_; }
    const SeriesMatrix& A() const { return A_; }

    /// Working precision for internal eliminations.
    std::int64_t work_prec() const { return prec_; }
    /// Digits sacrificed when certifying exact identities.
    std::int64_t slack() const { return (std::int64_t)e_ * p(); }

private:
    Fq K_;
    int e_;
    FE cbar0_;
    SeriesMatrix A_;
    std::int64_t prec_;
};

struct Bt1Check {
    bool ok;
    int d; // number of u^e elementary divisors
    std::vector<std::int64_t> divisors;
};

/// Elementary divisors of A all in {1, u^e}; d = dimension.
Bt1Check validate_bt1(const KisinModule& M);

/// deg = v_u(det A) / e.
Rat degree(const KisinModule& M);

/// Basis in which A = [[P1, P2], [u^e P3, u^e P4]] with [[P1,P2],[P3,P4]] a
/// unit and the first h-d basis vectors spanning the Fil^1 lift.
struct AdaptedPresentation {
    SeriesMatrix U, Uinv;
    int d;
    SeriesMatrix P1, P2, P3, P4;
    Rat w; // Hodge height, = v(det P1)/e truncated at 1
};
AdaptedPresentation adapt_basis(const KisinModule& M);

/// Truncated Hodge height in [0, 1].
Rat hodge_height(const KisinModule& M);

/// Dual module: A_dual = (u^e / cbar0) (A^T)^{-1}.
KisinModule dual(const KisinModule& M);

/// New presentation U^{-1} A phi(U) for a unit U.
KisinModule base_change(const KisinModule& M, const SeriesMatrix& U);

} // namespace cansub
