#include "cansub/generate.hpp"

#include <random>

namespace cansub {

namespace {

FE random_elem(const Fq& K, std::mt19937_64& rng) {
    FE c(K.degree());
    for (auto& x : c) x = (fp_t)(rng() % (std::uint64_t)K.p());
    return c;
}

FE random_unit_elem(const Fq& K, std::mt19937_64& rng) {
    for (;;) {
        FE c = random_elem(K, rng);
        if (!K.is_zero(c)) return c;
    }
}

TruncSeries random_poly(const Fq& K, int deg_bound, std::mt19937_64& rng) {
    TruncSeries t(K, PREC_EXACT);
    for (int i = 0; i < deg_bound; ++i) t.set_coeff(i, random_elem(K, rng));
    return t;
}

// (I + strictly lower) * diag(units) * (I + strictly upper): always a unit.
SeriesMatrix random_unit_matrix(const Fq& K, int n, int deg_bound, std::mt19937_64& rng) {
    SeriesMatrix L = SeriesMatrix::identity(K, n);
    SeriesMatrix Up = SeriesMatrix::identity(K, n);
    SeriesMatrix D(K, n, n);
    for (int i = 0; i < n; ++i) {
        D.at(i, i) = TruncSeries::monomial(K, 0, random_unit_elem(K, rng));
        for (int j = 0; j < i; ++j) L.at(i, j) = random_poly(K, deg_bound, rng);
        for (int j = i + 1; j < n; ++j) Up.at(i, j) = random_poly(K, deg_bound, rng);
    }
    return L * D * Up;
}

} // namespace

void GenSpec::validate() const {
    if (h < 2) throw InvalidInput("h must be >= 2");
    if (d <= 0 || d >= h) throw InvalidInput("d must satisfy 0 < d < h");
    if (e < 1) throw InvalidInput("e must be >= 1");
    if (m < 1) throw InvalidInput("m must be >= 1");
    if (w < Rat(0) || w >= Rat(1)) throw InvalidInput("w must satisfy 0 <= w < 1");
    Rat ew = Rat(e) * w;
    if (!ew.is_integer()) throw InvalidInput("e*w must be an integer");
    if (precision < 8 * e) throw InvalidInput("precision must be at least 8*e");
}

KisinModule gen_bt1(const GenSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    FieldTower tw(spec.p, spec.m);
    Fq K(tw, 0);
    FE cbar0 = K.from_int(spec.p - 1); // default: E(u) = u^e - p, so cbar0 = -1
    std::int64_t ew = (Rat(spec.e) * spec.w).num;
    int hd = spec.h - spec.d;

    for (int attempt = 0; attempt < 64; ++attempt) {
        SeriesMatrix A(K, spec.h, spec.h);
        if (spec.triangular_hint) {
            // diag(u^{s_i}) * upper unit, s a random arrangement of d copies of e
            std::vector<int> s(spec.h, 0);
            for (int i = 0; i < spec.d; ++i) s[i] = spec.e;
            for (int i = spec.h - 1; i > 0; --i)
                std::swap(s[i], s[(int)(rng() % (std::uint64_t)(i + 1))]);
            SeriesMatrix Up = SeriesMatrix::identity(K, spec.h);
            for (int i = 0; i < spec.h; ++i) {
                Up.at(i, i) = TruncSeries::monomial(K, 0, random_unit_elem(K, rng));
                for (int j = i + 1; j < spec.h; ++j) Up.at(i, j) = random_poly(K, spec.e, rng);
            }
            for (int i = 0; i < spec.h; ++i)
                for (int j = 0; j < spec.h; ++j) A.at(i, j) = Up.at(i, j).shifted_up(s[i]);
        } else {
            // P1 = V1 diag(u^{t_i}) V2 with sum t_i = e*w
            std::vector<std::int64_t> t(hd, 0);
            for (std::int64_t unit = 0; unit < ew; ++unit) t[(int)(rng() % (std::uint64_t)hd)] += 1;
            SeriesMatrix V1 = random_unit_matrix(K, hd, spec.e, rng);
            SeriesMatrix V2 = random_unit_matrix(K, hd, spec.e, rng);
            SeriesMatrix Dg(K, hd, hd);
            for (int i = 0; i < hd; ++i) Dg.at(i, i) = TruncSeries::monomial(K, t[i], K.one());
            SeriesMatrix P1 = V1 * Dg * V2;
            SeriesMatrix P2(K, hd, spec.d), P3(K, spec.d, hd), P4(K, spec.d, spec.d);
            for (int i = 0; i < hd; ++i)
                for (int j = 0; j < spec.d; ++j) P2.at(i, j) = random_poly(K, spec.e, rng);
            for (int i = 0; i < spec.d; ++i) {
                for (int j = 0; j < hd; ++j) P3.at(i, j) = random_poly(K, spec.e, rng);
                for (int j = 0; j < spec.d; ++j) P4.at(i, j) = random_poly(K, spec.e, rng);
            }
            SeriesMatrix stacked = SeriesMatrix::vstack(SeriesMatrix::hstack(P1, P2),
                                                        SeriesMatrix::hstack(P3, P4));
            auto sv = stacked.det().val();
            if (!sv || *sv != 0) continue; // stacked matrix must be a unit
            A = SeriesMatrix::vstack(SeriesMatrix::hstack(P1, P2),
                                     SeriesMatrix::hstack(P3.shifted_up(spec.e),
                                                          P4.shifted_up(spec.e)));
        }
        KisinModule M(K, spec.e, cbar0, A, spec.precision);
        Bt1Check chk = validate_bt1(M);
        if (!chk.ok || chk.d != spec.d) continue;
        if (degree(M) != Rat(spec.d)) continue;
        if (!spec.triangular_hint && hodge_height(M) != spec.w) continue;
        return M;
    }
    throw GenerationFailed("no valid module after 64 attempts");
}

} // namespace cansub
