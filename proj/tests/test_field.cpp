#include <doctest.h>

#include "cansub/field.hpp"

using namespace cansub;

TEST_CASE("prime field arithmetic") {
    FieldTower tw(3, 1);
    Fq K(tw, 0);
    CHECK(K.degree() == 1);
    FE two = K.from_int(2);
    CHECK(K.eq(K.add(two, two), K.one()));       // 2+2 = 1 mod 3
    CHECK(K.eq(K.mul(two, two), K.one()));       // 2*2 = 1
    CHECK(K.eq(K.inv(two), two));                // 2^{-1} = 2
    CHECK(K.eq(K.frob(two), two));               // frobenius fixes F_p
    CHECK_THROWS_AS(K.inv(K.zero()), InvalidInput);
}

TEST_CASE("F_9 arithmetic and frobenius") {
    FieldTower tw(3, 2);
    Fq K(tw, 0);
    CHECK(K.degree() == 2);
    FE g = K.generator();
    // multiplicative order 8
    FE acc = K.one();
    int order = 0;
    for (int i = 1; i <= 8; ++i) {
        acc = K.mul(acc, g);
        if (K.eq(acc, K.one())) {
            order = i;
            break;
        }
    }
    CHECK(order == 8);
    // frobenius is x -> x^3 and has order 2
    CHECK(K.eq(K.frob(g), K.pow(g, 3)));
    CHECK(K.eq(K.frob(K.frob(g)), g));
    CHECK(K.eq(K.inv_frob(K.frob(g)), g));
    // inverse: g * g^{-1} = 1
    CHECK(K.eq(K.mul(g, K.inv(g)), K.one()));
}

TEST_CASE("rejects bad field parameters") {
    CHECK_THROWS_AS(FieldTower(2, 1), InvalidInput); // p must be > 2
    CHECK_THROWS_AS(FieldTower(9, 1), InvalidInput); // p must be prime
    // x^2 + 2 = (x+1)(x+2) over F_3 is not a valid defining polynomial
    CHECK_THROWS_AS(FieldTower(3, std::vector<fp_t>{2, 0, 1}), InvalidInput);
    CHECK_NOTHROW(FieldTower(3, std::vector<fp_t>{1, 0, 1}));
}

TEST_CASE("x^2 + 1 is irreducible over F_3 but x^2 + 2 is not") {
    CHECK(fppoly::is_irreducible({1, 0, 1}, 3));  // x^2 + 1
    CHECK(!fppoly::is_irreducible({2, 0, 1}, 3)); // x^2 + 2 = (x-1)(x+1)
    CHECK(fppoly::is_irreducible({1, 2, 0, 1}, 3));
    // deterministic search returns an irreducible of the right degree
    for (int d : {2, 3, 5, 8}) {
        auto f = fppoly::find_irreducible(5, d);
        CHECK((int)f.size() == d + 1);
        CHECK(fppoly::is_irreducible(f, 5));
    }
}

TEST_CASE("tower extension embeds compatibly") {
    FieldTower tw(3, 2);
    Fq K0(tw, 0);
    FE g = K0.generator();
    FieldTower tw2 = tw.extended(2); // F_81
    Fq K1(tw2, 1);
    CHECK(K1.degree() == 4);
    FE gl = K1.lift(g, 0);
    // embedding is a ring homomorphism: lift(g)^2 = lift(g^2)
    CHECK(K1.eq(K1.mul(gl, gl), K1.lift(K0.mul(g, g), 0)));
    // lift commutes with frobenius^[F_9:F_p] ... frobenius on the small field
    // agrees with frobenius on the image
    CHECK(K1.eq(K1.lift(K0.frob(g), 0), K1.frob(gl)));
    // chain: extending again composes embeddings consistently
    FieldTower tw3 = tw2.extended(3); // F_3^12
    Fq K2(tw3, 2);
    FE g2 = K2.lift(g, 0);
    FE g2b = K2.lift(K1.lift(g, 0), 1);
    CHECK(K2.eq(g2, g2b));
    CHECK_THROWS_AS(tw3.extended(8), FieldTooSmall); // 12*8 = 96 > 64
}

TEST_CASE("additive residue equations over the tower") {
    FieldTower tw(3, 1);
    Fq K(tw, 0);

    SUBCASE("y^p - y = 0 has the prime field as roots") {
        auto r = additive_field_roots(K, {K.from_int(-1), K.one()}, K.zero());
        CHECK(r.roots.size() == 3);
        CHECK(r.field.level() == 0); // no extension needed
    }
    SUBCASE("y^2 = -1 forces the quadratic extension") {
        // eta^p - (-1)*eta ... solve eta^3 + eta = 0: roots 0 and eta^2 = -1
        auto r = additive_field_roots(K, {K.one(), K.one()}, K.zero());
        CHECK(r.roots.size() == 3);
        CHECK(r.field.degree() == 2);
        for (const auto& root : r.roots) {
            if (r.field.is_zero(root)) continue;
            CHECK(r.field.eq(r.field.mul(root, root), r.field.from_int(-1)));
        }
    }
    SUBCASE("inhomogeneous Artin-Schreier y^p - y = 1 needs degree 3") {
        auto r = additive_field_roots(K, {K.from_int(-1), K.one()}, K.one());
        CHECK(r.roots.size() == 3);
        CHECK(r.field.degree() == 3);
        for (const auto& root : r.roots) {
            FE lhs = r.field.sub(r.field.pow(root, 3), root);
            CHECK(r.field.eq(lhs, r.field.one()));
        }
    }
    SUBCASE("roots are sorted and deterministic") {
        auto r1 = additive_field_roots(K, {K.from_int(-1), K.one()}, K.zero());
        auto r2 = additive_field_roots(K, {K.from_int(-1), K.one()}, K.zero());
        CHECK(r1.roots == r2.roots);
        for (std::size_t i = 1; i < r1.roots.size(); ++i)
            CHECK(Fq::cmp(r1.roots[i - 1], r1.roots[i]) < 0);
    }
}
