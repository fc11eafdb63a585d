#include "cansub/canonical.hpp"

namespace cansub {

CanSubResult solve_canonical(const KisinModule& M, std::optional<SeriesMatrix> initial_B) {
    long p = M.p();
    int e = M.e(), h = M.h();
    std::int64_t W = M.work_prec();
    AdaptedPresentation ad = adapt_basis(M);
    int d = ad.d;
    Rat w = ad.w;
    if (!(w < Rat(p, p + 1)))
        throw HodgeTooLarge("hodge height " + w.str() + " >= p/(p+1) = " + Rat(p, p + 1).str());
    Rat ew_r = Rat(e) * w;
    if (!ew_r.is_integer()) throw Error("e*w is not an integer");
    std::int64_t ew = ew_r.num;
    std::int64_t e1w = e - ew; // e(1-w)
    std::int64_t g1 = p * e1w - ew;
    std::int64_t g2 = p * e1w;
    if (g1 <= 0 || g2 <= 0) throw NonConvergence("contraction exponents are not positive");

    SeriesMatrix P1h = scaled_inverse(ad.P1, ew, W); // P1 * P1h = u^{ew} I
    SeriesMatrix B0 = (ad.P3 * P1h).truncated(W);
    SeriesMatrix B = initial_B ? initial_B->truncated(W) : B0;
    if (B.rows() != d || B.cols() != h - d) throw InvalidInput("initial B has wrong shape");

    CanSubResult res;
    res.w = w;
    res.ad = ad;
    res.gamma = g1;
    int max_iter = (int)(W / g1) + 2;
    std::int64_t prev_gain = -1;
    int it = 0;
    for (;; ++it) {
        if (it > max_iter)
            throw NonConvergence("fixed point did not stabilize within prec/gamma + 2 iterations");
        SeriesMatrix phiB = B.phi_twist();
        SeriesMatrix Bn = B0 - (B * ad.P2 * phiB * P1h).shifted_up(g1) +
                          (ad.P4 * phiB * P1h).shifted_up(g2);
        Bn = Bn.truncated(W);
        SeriesMatrix diff = Bn - B;
        auto gain = diff.min_val();
        if (!gain) {
            B = Bn;
            ++it;
            break;
        }
        // contraction certificate: gains strictly improve by at least gamma
        if (prev_gain >= 0 && *gain < prev_gain + g1)
            throw NonConvergence("contraction gain stalled at u^" + std::to_string(*gain));
        prev_gain = *gain;
        B = Bn;
    }
    res.iterations = it;
    res.B = B;

    res.D = (ad.P1 * (SeriesMatrix::identity(M.field(), h - d) +
                      (P1h * ad.P2 * B.phi_twist()).shifted_up(g1)))
                .truncated(W);
    auto vD = res.D.det().val();
    if (!vD) throw PrecisionExhausted("det(D) is zero to precision");
    if (*vD != ew) throw Error("v(det D) = " + std::to_string(*vD) + " != e*w = " + std::to_string(ew));

    SeriesMatrix L_ad = SeriesMatrix::vstack(SeriesMatrix::identity(M.field(), h - d),
                                             B.shifted_up(e1w));
    res.L_basis = (ad.U * L_ad).truncated(W);
    res.N_matrix = (ad.P4.shifted_up(e) - (B * ad.P2).shifted_up(e1w)).truncated(W);

    // phi-stability residual: A_ad [I; u^{p e(1-w)} phi(B)] = L_ad D
    SeriesMatrix A_ad = SeriesMatrix::vstack(
        SeriesMatrix::hstack(ad.P1, ad.P2),
        SeriesMatrix::hstack(ad.P3.shifted_up(e), ad.P4.shifted_up(e)));
    SeriesMatrix arg = SeriesMatrix::vstack(SeriesMatrix::identity(M.field(), h - d),
                                            B.phi_twist().shifted_up(p * e1w));
    SeriesMatrix resid = A_ad * arg - L_ad * res.D;
    auto rv = resid.min_val();
    std::int64_t certified = rv ? *rv : resid.prec();
    if (certified < W - M.slack())
        throw PrecisionExhausted("stability residual only certified to u^" + std::to_string(certified));
    res.residual_val = certified;

    // degree additivity: deg(summand) + deg(quotient) = deg(M)
    auto vN = res.N_matrix.det().val();
    auto vA = M.A().det().val();
    if (!vN || !vA) throw PrecisionExhausted("determinant valuation not certified");
    if (*vN + ew != *vA) throw Error("degree additivity failed");
    return res;
}

KisinModule summand_module(const KisinModule& M, const CanSubResult& res) {
    return KisinModule(M.field(), M.e(), M.cbar0(), res.D, M.precision());
}

KisinModule quotient_module(const KisinModule& M, const CanSubResult& res) {
    return KisinModule(M.field(), M.e(), M.cbar0(), res.N_matrix, M.precision());
}

bool verify_frobenius_kernel(const CanSubResult& res, const KisinModule& M, const Rat& i) {
    Rat ei_r = Rat(M.e()) * i;
    if (!ei_r.is_integer() || ei_r.num <= 0 || ei_r.num > M.e())
        throw InvalidInput("e*i must be a positive integer <= e");
    std::int64_t ei = ei_r.num;
    int h = M.h(), d = res.ad.d;
    SeriesMatrix fil1 = res.ad.U.block(0, 0, h, h - d);
    std::int64_t W = M.work_prec();
    return span_contains(fil1, res.L_basis, ei, W) && span_contains(res.L_basis, fil1, ei, W);
}

KisinModule quotient_presentation(const KisinModule& M, const SeriesMatrix& L_basis,
                                  std::optional<SeriesMatrix> complement) {
    std::int64_t W = M.work_prec();
    SeriesMatrix C = complement ? *complement : complete_summand(L_basis, W);
    SeriesMatrix T = SeriesMatrix::hstack(L_basis, C);
    auto tv = T.det().val();
    if (!tv || *tv != 0) throw NotDirectSummand("L_basis does not extend to a basis");
    SeriesMatrix Tinv = invert_unit(T, W);
    SeriesMatrix Aq = Tinv * M.A() * T.phi_twist();
    int r = L_basis.cols(), d = M.h() - r;
    SeriesMatrix N = Aq.block(r, r, d, d).truncated(W);
    return KisinModule(M.field(), M.e(), M.cbar0(), N, M.precision());
}

bool duality_check(const KisinModule& M) {
    CanSubResult res = solve_canonical(M);
    KisinModule Md = dual(M);
    CanSubResult resd = solve_canonical(Md);
    std::int64_t W = std::min(M.work_prec(), Md.work_prec()) - M.slack();
    SeriesMatrix ann = annihilator(res.L_basis, M.work_prec());
    return span_contains(ann, resd.L_basis, PREC_EXACT, W) &&
           span_contains(resd.L_basis, ann, PREC_EXACT, W);
}

} // namespace cansub
