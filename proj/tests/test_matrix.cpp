#include <doctest.h>

#include <random>

#include "cansub/matrix.hpp"

using namespace cansub;

namespace {

Fq f3() {
    static FieldTower tw(3, 1);
    return Fq(tw, 0);
}

// the running example [[u, 1], [u^4, 0]]
SeriesMatrix worked(const Fq& K) {
    SeriesMatrix A(K, 2, 2);
    A.at(0, 0) = TruncSeries::monomial(K, 1, K.one());
    A.at(0, 1) = TruncSeries::one(K);
    A.at(1, 0) = TruncSeries::monomial(K, 4, K.one());
    A.at(1, 1) = TruncSeries::zero(K);
    return A;
}

SeriesMatrix random_matrix(const Fq& K, int n, std::mt19937_64& rng, std::int64_t prec = 48) {
    SeriesMatrix M(K, n, n, prec);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            TruncSeries s(K, prec);
            int shift = (int)(rng() % 3);
            for (int t = 0; t < 4; ++t)
                s.set_coeff(shift + (std::int64_t)(rng() % 6), {(fp_t)(rng() % 3)});
            M.at(i, j) = s;
        }
    return M;
}

} // namespace

TEST_CASE("smith form of the worked example") {
    Fq K = f3();
    SeriesMatrix A = worked(K);
    SmithForm S = smith_form(A, 40);
    CHECK(S.d == std::vector<std::int64_t>{0, 4});
    // recomposition U A V = diag(u^d)
    SeriesMatrix D = S.U * A * S.V;
    CHECK(D.at(0, 0).val() == 0);
    CHECK(D.at(1, 1).val() == 4);
    CHECK(D.at(0, 1).is_zero_to_prec());
    CHECK(D.at(1, 0).is_zero_to_prec());
    // U Uinv = I, V Vinv = I
    CHECK((S.U * S.Uinv).eq_to_prec(SeriesMatrix::identity(K, 2), 30));
    CHECK((S.V * S.Vinv).eq_to_prec(SeriesMatrix::identity(K, 2), 30));
}

TEST_CASE("smith form: diagonal and identity") {
    Fq K = f3();
    SeriesMatrix D(K, 2, 2);
    D.at(0, 0) = TruncSeries::one(K);
    D.at(1, 1) = TruncSeries::monomial(K, 4, K.one());
    CHECK(smith_form(D, 40).d == std::vector<std::int64_t>{0, 4});
    CHECK(smith_form(SeriesMatrix::identity(K, 3), 40).d == std::vector<std::int64_t>{0, 0, 0});
}

TEST_CASE("smith recomposition and divisor sum on random matrices") {
    Fq K = f3();
    std::mt19937_64 rng(5);
    int done = 0;
    for (int it = 0; it < 60 && done < 25; ++it) {
        SeriesMatrix M = random_matrix(K, 3, rng);
        auto dv = M.det().val();
        if (!dv) continue;
        ++done;
        SmithForm S = smith_form(M, 48);
        std::int64_t sum = 0;
        for (auto d : S.d) sum += d;
        CHECK(sum == *dv); // elementary-divisor multiplicativity
        for (std::size_t i = 1; i < S.d.size(); ++i) CHECK(S.d[i - 1] <= S.d[i]);
        // Uinv diag Vinv = M
        SeriesMatrix Dg(K, 3, 3);
        for (int i = 0; i < 3; ++i) Dg.at(i, i) = TruncSeries::monomial(K, S.d[i], K.one());
        CHECK((S.Uinv * Dg * S.Vinv).eq_to_prec(M, 24));
    }
    CHECK(done >= 25);
}

TEST_CASE("smith form rejects zero-to-precision blocks") {
    Fq K = f3();
    SeriesMatrix Z(K, 2, 2, 20);
    CHECK_THROWS_AS(smith_form(Z, 20), SingularMatrix);
}

TEST_CASE("phi_twist") {
    Fq K = f3();
    SeriesMatrix A = worked(K);
    SeriesMatrix T = A.phi_twist();
    CHECK(T.at(0, 0).val() == 3);
    CHECK(T.at(1, 0).val() == 12);
    CHECK(T.at(0, 1).val() == 0);
    // identity fixed
    CHECK(SeriesMatrix::identity(K, 2).phi_twist().eq_to_prec(SeriesMatrix::identity(K, 2)));
    // multiplicativity on random instances
    std::mt19937_64 rng(9);
    for (int it = 0; it < 10; ++it) {
        SeriesMatrix M = random_matrix(K, 2, rng);
        SeriesMatrix N = random_matrix(K, 2, rng);
        CHECK((M * N).phi_twist().eq_to_prec(M.phi_twist() * N.phi_twist(), 40));
    }
}

TEST_CASE("unit inverse and scaled inverse") {
    Fq K = f3();
    std::mt19937_64 rng(21);
    int done = 0;
    for (int it = 0; it < 30 && done < 8; ++it) {
        SeriesMatrix M = random_matrix(K, 2, rng);
        M.at(0, 0).set_coeff(0, K.one());
        M.at(1, 1).set_coeff(0, K.one());
        M.at(0, 1) = M.at(0, 1).shifted_up(1).truncated(48);
        auto dv = M.det().val();
        if (!dv || *dv != 0) continue;
        ++done;
        SeriesMatrix Mi = invert_unit(M, 40);
        CHECK((M * Mi).eq_to_prec(SeriesMatrix::identity(K, 2), 30));
        // phi_twist respects inverses of units
        CHECK((M.phi_twist() * Mi.phi_twist()).eq_to_prec(SeriesMatrix::identity(K, 2), 30));
    }
    CHECK(done >= 8);
    // u^e M^{-1} for the worked example (divisors 0 and 4)
    SeriesMatrix A = worked(K);
    SeriesMatrix S4 = scaled_inverse(A, 4, 40);
    CHECK((A * S4).eq_to_prec(SeriesMatrix::identity(K, 2).shifted_up(4), 30));
    CHECK_THROWS_AS(scaled_inverse(A, 3, 40), SingularMatrix);
    CHECK_THROWS_AS(invert_unit(A, 40), SingularMatrix);
}

TEST_CASE("span containment, annihilator, summand completion") {
    Fq K = f3();
    // span of [1; u^3] modulo u^k against span of e_1
    SeriesMatrix L(K, 2, 1, 40);
    L.at(0, 0) = TruncSeries::one(K, 40);
    L.at(1, 0) = TruncSeries::monomial(K, 3, K.one(), 40);
    SeriesMatrix E1(K, 2, 1, 40);
    E1.at(0, 0) = TruncSeries::one(K, 40);
    CHECK(span_contains(E1, L, 3, 40));
    CHECK(span_contains(L, E1, 3, 40));
    CHECK(!span_contains(E1, L, 4, 40));
    // annihilator of L is orthogonal to it
    SeriesMatrix ann = annihilator(L, 40);
    CHECK(ann.cols() == 1);
    CHECK((L.transpose() * ann).is_zero_to_prec());
    // complete_summand yields a basis
    SeriesMatrix C = complete_summand(L, 40);
    CHECK(SeriesMatrix::hstack(L, C).det().val() == 0);
    // a non-summand is rejected
    SeriesMatrix bad(K, 2, 1, 40);
    bad.at(0, 0) = TruncSeries::monomial(K, 1, K.one(), 40);
    bad.at(1, 0) = TruncSeries::monomial(K, 4, K.one(), 40);
    CHECK_THROWS_AS(complete_summand(bad, 40), NotDirectSummand);
}
