#include <doctest.h>

#include <random>

#include "cansub/series.hpp"

using namespace cansub;

namespace {

Fq f3() {
    static FieldTower tw(3, 1);
    return Fq(tw, 0);
}
Fq f9() {
    static FieldTower tw(3, 2);
    return Fq(tw, 0);
}

TruncSeries random_series(const Fq& K, std::int64_t prec, std::mt19937_64& rng, int terms = 6) {
    TruncSeries s(K, prec);
    for (int t = 0; t < terms; ++t) {
        std::int64_t e = (std::int64_t)(rng() % (std::uint64_t)prec);
        FE c(K.degree());
        for (auto& x : c) x = (fp_t)(rng() % (std::uint64_t)K.p());
        s.set_coeff(e, c);
    }
    return s;
}

} // namespace

TEST_CASE("series_val") {
    Fq K = f3();
    // u^3 + u^5 at precision 10 -> 3
    auto s = TruncSeries::from_terms(K, {{3, K.one()}, {5, K.one()}}, 10);
    CHECK(s.val() == 3);
    // zero at precision 10 -> no finite valuation
    CHECK(!TruncSeries::zero(K, 10).val().has_value());
    // g*u^{1/8} + u^{1/2} over F_9 at precision 2 -> 1/8
    Fq K9 = f9();
    PuiseuxSeries ps(K9, Rat(2));
    ps.add_term(Rat(1, 8), K9.generator());
    ps.add_term(Rat(1, 2), K9.one());
    CHECK(ps.val() == Rat(1, 8));
}

TEST_CASE("frobenius_sub") {
    Fq K = f3();
    // 1 + u at precision 8 -> 1 + u^3 at precision 24
    auto s = TruncSeries::from_terms(K, {{0, K.one()}, {1, K.one()}}, 8);
    auto f = s.frobenius();
    CHECK(f.prec() == 24);
    CHECK(f.field().eq(f.coeff(0), K.one()));
    CHECK(f.field().eq(f.coeff(3), K.one()));
    CHECK(f.val() == 0);

    // g*u over F_9 -> g^3 u^3
    Fq K9 = f9();
    FE g = K9.generator();
    auto t = TruncSeries::monomial(K9, 1, g);
    auto ft = t.frobenius();
    CHECK(K9.eq(ft.coeff(3), K9.pow(g, 3)));

    // u^2 + 2u^5 over F_3 -> u^6 + 2u^15
    auto r = TruncSeries::from_terms(K, {{2, K.one()}, {5, K.from_int(2)}}).frobenius();
    CHECK(K.eq(r.coeff(6), K.one()));
    CHECK(K.eq(r.coeff(15), K.from_int(2)));
}

TEST_CASE("frobenius is a ring homomorphism") {
    Fq K = f9();
    std::mt19937_64 rng(7);
    for (int it = 0; it < 20; ++it) {
        auto a = random_series(K, 24, rng);
        auto b = random_series(K, 24, rng);
        CHECK((a * b).frobenius().eq_to_prec(a.frobenius() * b.frobenius()));
        CHECK((a + b).frobenius().eq_to_prec(a.frobenius() + b.frobenius()));
    }
}

TEST_CASE("valuation is additive on products") {
    Fq K = f3();
    std::mt19937_64 rng(11);
    for (int it = 0; it < 30; ++it) {
        auto a = random_series(K, 30, rng);
        auto b = random_series(K, 30, rng);
        auto va = a.val(), vb = b.val();
        if (!va || !vb) continue;
        auto prod = a * b;
        if (*va + *vb < prod.prec()) CHECK(prod.val() == *va + *vb);
    }
}

TEST_CASE("unit inversion") {
    Fq K = f3();
    std::mt19937_64 rng(13);
    for (int it = 0; it < 20; ++it) {
        auto s = random_series(K, 20, rng);
        s.set_coeff(0, K.from_int(1 + (long)(rng() % 2)));
        auto inv = s.inverse(20);
        auto prod = s * inv;
        CHECK(prod.val() == 0);
        CHECK((prod - TruncSeries::one(K)).is_zero_to_prec());
    }
    // inverse of a non-unit fails loudly
    CHECK_THROWS_AS(TruncSeries::monomial(K, 1, K.one(), 10).inverse(10), InvalidInput);
    CHECK_THROWS_AS(TruncSeries::zero(K, 10).inverse(10), SingularMatrix);
}

TEST_CASE("pth_root") {
    Fq K = f3();
    std::int64_t cap = 1000000;
    // u^3 -> u^{3/p} = u
    auto m = PuiseuxSeries::monomial(K, Rat(3), K.one());
    CHECK(m.pth_root(cap).val() == Rat(1));
    // a p-th power round-trips
    PuiseuxSeries s(K);
    s.add_term(Rat(0), K.one());
    s.add_term(Rat(1), K.one());
    auto cube = s.frobenius();
    CHECK(cube.pth_root(cap).eq_to_common_prec(s));

    // g*u over F_9 -> g^3 u^{1/3}, since (g^3)^3 = g^9 = g
    Fq K9 = f9();
    FE g = K9.generator();
    auto t = PuiseuxSeries::monomial(K9, Rat(1), g).pth_root(cap);
    CHECK(t.val() == Rat(1, 3));
    CHECK(K9.eq(t.coeff(Rat(1, 3)), K9.pow(g, 3)));
    // oracle: cubing the root coefficient recovers g
    CHECK(K9.eq(K9.pow(t.coeff(Rat(1, 3)), 3), g));

    // denominator cap is enforced
    CHECK_THROWS_AS(PuiseuxSeries::monomial(K, Rat(1, 400000), K.one()).pth_root(cap),
                    ExponentDenominatorOverflow);
}

TEST_CASE("pth_root inverts p-th powers of random puiseux series") {
    Fq K = f9();
    std::mt19937_64 rng(17);
    for (int it = 0; it < 15; ++it) {
        PuiseuxSeries s(K, Rat(12));
        for (int t = 0; t < 5; ++t) {
            Rat e((std::int64_t)(rng() % 36), 3);
            FE c(K.degree());
            for (auto& x : c) x = (fp_t)(rng() % 3);
            s.add_term(e, c);
        }
        auto back = s.frobenius().pth_root(1000000);
        CHECK(back.eq_to_common_prec(s));
    }
}

TEST_CASE("precision propagation is pessimistic") {
    Fq K = f3();
    auto a = TruncSeries::from_terms(K, {{2, K.one()}}, 10); // u^2 + O(u^10)
    auto b = TruncSeries::from_terms(K, {{3, K.one()}}, 7);  // u^3 + O(u^7)
    auto prod = a * b;
    // min(10 + 3, 7 + 2) = 9
    CHECK(prod.prec() == 9);
    CHECK(prod.val() == 5);
    auto sum = a + b;
    CHECK(sum.prec() == 7);
    // exact polynomials stay exact
    auto ea = TruncSeries::monomial(K, 2, K.one());
    auto eb = TruncSeries::monomial(K, 3, K.one());
    CHECK((ea * eb).exact());
    // shifting down consumes certified digits
    CHECK_THROWS_AS(TruncSeries::zero(K, 3).shifted_down(3), PrecisionExhausted);
}
