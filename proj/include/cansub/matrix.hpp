#pragma once

#include <functional>
#include <vector>

#include "cansub/series.hpp"

namespace cansub {

/// Dense matrix over k[[u]] at uniform working precision. Entries share the
/// coefficient field; the stored precision is the minimum over entries.
class SeriesMatrix {
public:
    SeriesMatrix() = default;
    SeriesMatrix(const Fq& K, int rows, int cols, std::int64_t prec = PREC_EXACT);
    static SeriesMatrix identity(const Fq& K, int n, std::int64_t prec = PREC_EXACT);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    const Fq& field() const { return K_; }
    std::int64_t prec() const;

    const TruncSeries& at(int i, int j) const { return e_[(std::size_t)i * cols_ + j]; }
    TruncSeries& at(int i, int j) { return e_[(std::size_t)i * cols_ + j]; }

    friend SeriesMatrix operator+(const SeriesMatrix& a, const SeriesMatrix& b);
    friend SeriesMatrix operator-(const SeriesMatrix& a, const SeriesMatrix& b);
    friend SeriesMatrix operator*(const SeriesMatrix& a, const SeriesMatrix& b);
    SeriesMatrix operator-() const;

    SeriesMatrix transpose() const;
    SeriesMatrix scaled(const FE& c) const;
    SeriesMatrix shifted_up(std::int64_t k) const;   // times u^k
    SeriesMatrix shifted_down(std::int64_t k) const; // exact division by u^k
    SeriesMatrix truncated(std::int64_t prec) const;
    SeriesMatrix phi_twist() const; // entrywise frobenius

    SeriesMatrix block(int i0, int j0, int r, int c) const;
    static SeriesMatrix vstack(const SeriesMatrix& top, const SeriesMatrix& bottom);
    static SeriesMatrix hstack(const SeriesMatrix& left, const SeriesMatrix& right);

    TruncSeries det() const; // cofactor expansion (desk-scale sizes)
    /// Minimal valuation over entries; nullopt when all entries are zero to precision.
    std::optional<std::int64_t> min_val() const;
    bool is_zero_to_prec() const { return !min_val().has_value(); }
    bool eq_to_prec(const SeriesMatrix& o, std::int64_t upto = PREC_EXACT) const;

    std::string str() const;

private:
    Fq K_;
    int rows_ = 0, cols_ = 0;
    std::vector<TruncSeries> e_;
};

/// Smith normal form over k[[u]] at working precision: U*M*V = diag(u^d) with
/// U, V of unit determinant, d nondecreasing. Uinv and Vinv are maintained
/// alongside. Pivoting: minimal valuation, ties (row, col) lexicographic.
struct SmithForm {
    SeriesMatrix U, V, Uinv, Vinv;
    std::vector<std::int64_t> d;
};
SmithForm smith_form(const SeriesMatrix& M, std::int64_t work_prec);

/// Inverse of a matrix whose Smith divisors are all zero (unit determinant).
SeriesMatrix invert_unit(const SeriesMatrix& M, std::int64_t work_prec);
/// u^k * M^{-1}, defined when every Smith divisor of M is <= k.
SeriesMatrix scaled_inverse(const SeriesMatrix& M, std::int64_t k, std::int64_t work_prec);

/// True when every column of X lies in colspan(Y) + u^mod_k * (ambient), at
/// working precision. mod_k = PREC_EXACT means plain colspan containment.
bool span_contains(const SeriesMatrix& Y, const SeriesMatrix& X, std::int64_t mod_k,
                   std::int64_t work_prec);

/// Columns spanning the annihilator {n : n^T * L = 0} of a full-column-rank
/// direct summand L (rank r); returns h x (h-r).
SeriesMatrix annihilator(const SeriesMatrix& L, std::int64_t work_prec);

/// Completes the columns of L (a direct summand) to a basis; returns the
/// complement columns. Throws NotDirectSummand otherwise.
SeriesMatrix complete_summand(const SeriesMatrix& L, std::int64_t work_prec);

} // namespace cansub
