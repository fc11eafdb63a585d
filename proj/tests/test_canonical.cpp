#include <doctest.h>

#include <random>

#include "cansub/canonical.hpp"
#include "cansub/generate.hpp"

using namespace cansub;

namespace {

Fq f3() {
    static FieldTower tw(3, 1);
    return Fq(tw, 0);
}

KisinModule worked_module(std::int64_t prec = 96) {
    Fq K = f3();
    SeriesMatrix A(K, 2, 2);
    A.at(0, 0) = TruncSeries::monomial(K, 1, K.one());
    A.at(0, 1) = TruncSeries::one(K);
    A.at(1, 0) = TruncSeries::monomial(K, 4, K.one());
    A.at(1, 1) = TruncSeries::zero(K);
    return KisinModule(K, 4, K.from_int(2), A, prec);
}

KisinModule diag_ordinary(std::int64_t prec = 96) {
    Fq K = f3();
    SeriesMatrix A(K, 2, 2);
    A.at(0, 0) = TruncSeries::one(K);
    A.at(1, 1) = TruncSeries::monomial(K, 4, K.one());
    return KisinModule(K, 4, K.from_int(2), A, prec);
}

} // namespace

TEST_CASE("worked instance: fixed point, D, N") {
    KisinModule M = worked_module();
    Fq K = M.field();
    CanSubResult res = solve_canonical(M);
    CHECK(res.w == Rat(1, 4));
    CHECK(res.gamma == 8); // ep(1-w) - ew = 9 - 1
    // B = 1 - u^8 + u^16 mod u^24
    TruncSeries Bexp =
        TruncSeries::from_terms(K, {{0, K.one()}, {8, K.from_int(2)}, {16, K.one()}});
    CHECK(res.B.at(0, 0).eq_to_prec(Bexp, 24));
    // D = u + u^9 phi(B); v(det D) = 1 = e*w
    CHECK(res.D.det().val() == 1);
    TruncSeries Dexp =
        TruncSeries::monomial(K, 1, K.one()) + res.B.at(0, 0).frobenius().shifted_up(9);
    CHECK(res.D.at(0, 0).eq_to_prec(Dexp, 80));
    // N_matrix = -u^3 B (P4 = 0, P2 = 1)
    CHECK(res.N_matrix.at(0, 0).eq_to_prec(-res.B.at(0, 0).shifted_up(3), 80));
    CHECK(res.N_matrix.at(0, 0).val() == 3); // v = e(1-w)
    // L_basis = [1; u^3 B]
    CHECK(res.L_basis.at(0, 0).val() == 0);
    CHECK(res.L_basis.at(1, 0).val() == 3);
    // stability residual certified deep
    CHECK(res.residual_val >= M.precision() - M.slack());
    // iteration bound
    CHECK(res.iterations <= (int)(M.precision() / res.gamma) + 2);
}

TEST_CASE("worked instance: degrees of summand and quotient") {
    KisinModule M = worked_module();
    CanSubResult res = solve_canonical(M);
    KisinModule L = summand_module(M, res);
    KisinModule N = quotient_module(M, res);
    CHECK(degree(L) == Rat(1, 4)); // deg(G/C) = w
    CHECK(degree(N) == Rat(3, 4)); // deg(C) = d - w
    CHECK(degree(L) + degree(N) == degree(M));
}

TEST_CASE("w = 0 instance: recursion collapses") {
    KisinModule M = diag_ordinary();
    CanSubResult res = solve_canonical(M);
    CHECK(res.w == Rat(0));
    CHECK(res.B.is_zero_to_prec());
    CHECK(res.D.at(0, 0).eq_to_prec(TruncSeries::one(M.field()), 90));
    CHECK(res.N_matrix.at(0, 0).val() == 4); // (u^e)
    CHECK(verify_frobenius_kernel(res, M, Rat(1)));
}

TEST_CASE("frobenius kernel congruence") {
    KisinModule M = worked_module();
    CanSubResult res = solve_canonical(M);
    // at i = 1 - w = 3/4: true
    CHECK(verify_frobenius_kernel(res, M, Rat(3, 4)));
    // at i = 1: the u^3 term obstructs equality mod u^4
    CHECK(!verify_frobenius_kernel(res, M, Rat(1)));
    CHECK_THROWS_AS(verify_frobenius_kernel(res, M, Rat(1, 3)), InvalidInput);
}

TEST_CASE("quotient_presentation") {
    KisinModule M = worked_module();
    CanSubResult res = solve_canonical(M);
    KisinModule N = quotient_presentation(M, res.L_basis);
    // v = e(1-w) = 3, degree 3/4, invariant under the complement choice
    CHECK(N.A().at(0, 0).val() == 3);
    CHECK(degree(N) == Rat(3, 4));
    // non-summand columns are rejected
    Fq K = M.field();
    SeriesMatrix bad(K, 2, 1, 90);
    bad.at(0, 0) = TruncSeries::monomial(K, 1, K.one(), 90);
    bad.at(1, 0) = TruncSeries::monomial(K, 4, K.one(), 90);
    CHECK_THROWS_AS(quotient_presentation(M, bad), NotDirectSummand);
}

TEST_CASE("duality check on the worked and ordinary instances") {
    CHECK(duality_check(worked_module()));
    CHECK(duality_check(diag_ordinary()));
}

TEST_CASE("hodge height gate") {
    GenSpec spec;
    spec.p = 3;
    spec.e = 4;
    spec.h = 2;
    spec.d = 1;
    spec.w = Rat(3, 4); // = p/(p+1), out of range
    spec.seed = 5;
    KisinModule M = gen_bt1(spec);
    CHECK_THROWS_AS(solve_canonical(M), HodgeTooLarge);
}

TEST_CASE("uniqueness: perturbed integral starts reconverge") {
    KisinModule M = worked_module();
    CanSubResult base = solve_canonical(M);
    std::mt19937_64 rng(99);
    for (int it = 0; it < 5; ++it) {
        SeriesMatrix B0(M.field(), 1, 1);
        TruncSeries s(M.field(), PREC_EXACT);
        for (int k = 0; k < 6; ++k) s.set_coeff(k, {(fp_t)(rng() % 3)});
        B0.at(0, 0) = s;
        CanSubResult res = solve_canonical(M, B0);
        CHECK(res.B.eq_to_prec(base.B, M.precision() - M.slack()));
        CHECK(res.iterations <= (int)(M.precision() / res.gamma) + 2);
    }
}

TEST_CASE("random suite: stability, degrees, duality") {
    std::mt19937_64 seed_rng(2024);
    int solved = 0;
    for (int it = 0; it < 14; ++it) {
        GenSpec spec;
        spec.p = (it % 2) ? 5 : 3;
        spec.e = 2 + (int)(seed_rng() % 5);
        spec.h = 2 + (int)(seed_rng() % 3);
        spec.d = 1 + (int)(seed_rng() % (std::uint64_t)(spec.h - 1));
        spec.precision = 96;
        spec.seed = seed_rng();
        // admissible hodge heights: w < p/(p+1)
        std::vector<Rat> ws;
        for (int ew = 0; ew < spec.e; ++ew)
            if (Rat(ew, spec.e) < Rat(spec.p, spec.p + 1)) ws.push_back(Rat(ew, spec.e));
        spec.w = ws[seed_rng() % ws.size()];
        KisinModule M = gen_bt1(spec);
        CanSubResult res = solve_canonical(M);
        ++solved;
        CHECK(res.w == spec.w);
        std::int64_t ew = (Rat(M.e()) * res.w).num;
        CHECK(res.D.det().val() == ew);
        CHECK(verify_frobenius_kernel(res, M, Rat(1) - res.w));
        CHECK(degree(summand_module(M, res)) + degree(quotient_module(M, res)) == degree(M));
        CHECK(duality_check(M));
    }
    CHECK(solved == 14);
}
