#include "cansub/kisin.hpp"

namespace cansub {

KisinModule::KisinModule(Fq K, int e, FE cbar0, SeriesMatrix A, std::int64_t precision)
    : K_(std::move(K)), e_(e), cbar0_(std::move(cbar0)), A_(std::move(A)), prec_(precision) {
    if (e_ < 1) throw InvalidInput("e must be >= 1");
    if (prec_ < 4 * (std::int64_t)e_) throw InvalidInput("precision too small (need >= 4e)");
    if (A_.rows() != A_.cols()) throw InvalidInput("A must be square");
    if (K_.is_zero(cbar0_)) throw InvalidInput("cbar0 must be a unit");
    // E-height <= 1: every elementary divisor of A is <= e (u^e A^{-1} integral)
    SmithForm S = smith_form(A_, prec_);
    for (auto d : S.d)
        if (d > e_)
            throw InvalidInput("not of E-height <= 1: elementary divisor u^" + std::to_string(d) +
                               " exceeds u^" + std::to_string(e_));
}

Bt1Check validate_bt1(const KisinModule& M) {
    SmithForm S = smith_form(M.A(), M.work_prec());
    Bt1Check r{true, 0, S.d};
    for (auto d : S.d) {
        if (d == M.e())
            ++r.d;
        else if (d != 0)
            r.ok = false;
    }
    return r;
}

Rat degree(const KisinModule& M) {
    auto v = M.A().det().val();
    if (!v) throw PrecisionExhausted("degree: det(A) is zero to precision");
    return Rat(*v, M.e());
}

AdaptedPresentation adapt_basis(const KisinModule& M) {
    Bt1Check chk = validate_bt1(M);
    if (!chk.ok) throw NotBT1("adapt_basis: module is not BT1");
    int h = M.h(), d = chk.d, e = M.e();
    if (d <= 0 || d >= h) throw NotBT1("adapt_basis: dimension must satisfy 0 < d < h");
    std::int64_t W = M.work_prec();
    SmithForm S = smith_form(M.A(), W);
    // columns of Uinv: first h-d generate colspan(A) + u^e M (divisors sorted 0..0,e..e)
    SeriesMatrix U = S.Uinv;
    SeriesMatrix Uinv = S.U;
    SeriesMatrix Aad = Uinv * M.A() * U.phi_twist();
    AdaptedPresentation ap;
    ap.U = U;
    ap.Uinv = Uinv;
    ap.d = d;
    ap.P1 = Aad.block(0, 0, h - d, h - d).truncated(W);
    ap.P2 = Aad.block(0, h - d, h - d, d).truncated(W);
    SeriesMatrix B3 = Aad.block(h - d, 0, d, h - d);
    SeriesMatrix B4 = Aad.block(h - d, h - d, d, d);
    ap.P3 = B3.shifted_down(e).truncated(W);
    ap.P4 = B4.shifted_down(e).truncated(W);
    // stacked block matrix must be a unit
    SeriesMatrix stacked = SeriesMatrix::vstack(SeriesMatrix::hstack(ap.P1, ap.P2),
                                                SeriesMatrix::hstack(ap.P3, ap.P4));
    auto sv = stacked.det().val();
    if (!sv || *sv != 0) throw NotBT1("adapt_basis: stacked block matrix is not a unit");
    auto p1v = ap.P1.det().val();
    if (!p1v) throw PrecisionExhausted("adapt_basis: det(P1) zero to precision");
    ap.w = Rat(std::min<std::int64_t>(*p1v, e), e);
    return ap;
}

Rat hodge_height(const KisinModule& M) { return adapt_basis(M).w; }

KisinModule dual(const KisinModule& M) {
    SeriesMatrix Ad = scaled_inverse(M.A().transpose(), M.e(), M.work_prec());
    Ad = Ad.scaled(M.field().inv(M.cbar0()));
    return KisinModule(M.field(), M.e(), M.cbar0(), Ad, M.precision());
}

KisinModule base_change(const KisinModule& M, const SeriesMatrix& U) {
    SeriesMatrix Uinv = invert_unit(U, M.work_prec());
    SeriesMatrix A2 = Uinv * M.A() * U.phi_twist();
    return KisinModule(M.field(), M.e(), M.cbar0(), A2, M.precision());
}

} // namespace cansub
