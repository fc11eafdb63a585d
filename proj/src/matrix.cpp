#include "cansub/matrix.hpp"

#include <algorithm>
#include <sstream>

namespace cansub {

SeriesMatrix::SeriesMatrix(const Fq& K, int rows, int cols, std::int64_t prec)
    : K_(K), rows_(rows), cols_(cols) {
    if (rows <= 0 || cols <= 0) throw InvalidInput("matrix dimensions must be positive");
    e_.assign((std::size_t)rows * cols, TruncSeries::zero(K, prec));
}

SeriesMatrix SeriesMatrix::identity(const Fq& K, int n, std::int64_t prec) {
    SeriesMatrix m(K, n, n, prec);
    for (int i = 0; i < n; ++i) m.at(i, i) = TruncSeries::one(K, prec);
    return m;
}

std::int64_t SeriesMatrix::prec() const {
    std::int64_t p = PREC_EXACT;
    for (const auto& s : e_) p = std::min(p, s.prec());
    return p;
}

SeriesMatrix operator+(const SeriesMatrix& a, const SeriesMatrix& b) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw InvalidInput("matrix shape mismatch");
    SeriesMatrix r = a;
    for (std::size_t i = 0; i < r.e_.size(); ++i) r.e_[i] = a.e_[i] + b.e_[i];
    return r;
}

SeriesMatrix operator-(const SeriesMatrix& a, const SeriesMatrix& b) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw InvalidInput("matrix shape mismatch");
    SeriesMatrix r = a;
    for (std::size_t i = 0; i < r.e_.size(); ++i) r.e_[i] = a.e_[i] - b.e_[i];
    return r;
}

SeriesMatrix operator*(const SeriesMatrix& a, const SeriesMatrix& b) {
    if (a.cols_ != b.rows_) throw InvalidInput("matrix shape mismatch");
    SeriesMatrix r(unify(a.K_, b.K_), a.rows_, b.cols_, PREC_EXACT);
    for (int i = 0; i < a.rows_; ++i)
        for (int j = 0; j < b.cols_; ++j) {
            TruncSeries acc = a.at(i, 0) * b.at(0, j);
            for (int k = 1; k < a.cols_; ++k) acc = acc + a.at(i, k) * b.at(k, j);
            r.at(i, j) = std::move(acc);
        }
    return r;
}

SeriesMatrix SeriesMatrix::operator-() const {
    SeriesMatrix r = *this;
    for (auto& s : r.e_) s = -s;
    return r;
}

SeriesMatrix SeriesMatrix::transpose() const {
    SeriesMatrix r(K_, cols_, rows_, PREC_EXACT);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) r.at(j, i) = at(i, j);
    return r;
}

SeriesMatrix SeriesMatrix::scaled(const FE& c) const {
    SeriesMatrix r = *this;
    for (auto& s : r.e_) s = s.scaled(c);
    return r;
}

SeriesMatrix SeriesMatrix::shifted_up(std::int64_t k) const {
    SeriesMatrix r = *this;
    for (auto& s : r.e_) s = s.shifted_up(k);
    return r;
}

SeriesMatrix SeriesMatrix::shifted_down(std::int64_t k) const {
    SeriesMatrix r = *this;
    for (auto& s : r.e_) s = s.shifted_down(k);
    return r;
}

SeriesMatrix SeriesMatrix::truncated(std::int64_t prec) const {
    SeriesMatrix r = *this;
    for (auto& s : r.e_) s = s.truncated(prec);
    return r;
}

SeriesMatrix SeriesMatrix::phi_twist() const {
    SeriesMatrix r = *this;
    for (auto& s : r.e_) s = s.frobenius();
    return r;
}

SeriesMatrix SeriesMatrix::block(int i0, int j0, int r, int c) const {
    SeriesMatrix m(K_, r, c, PREC_EXACT);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) m.at(i, j) = at(i0 + i, j0 + j);
    return m;
}

SeriesMatrix SeriesMatrix::vstack(const SeriesMatrix& top, const SeriesMatrix& bottom) {
    if (top.cols_ != bottom.cols_) throw InvalidInput("vstack shape mismatch");
    SeriesMatrix m(unify(top.K_, bottom.K_), top.rows_ + bottom.rows_, top.cols_, PREC_EXACT);
    for (int i = 0; i < top.rows_; ++i)
        for (int j = 0; j < top.cols_; ++j) m.at(i, j) = top.at(i, j);
    for (int i = 0; i < bottom.rows_; ++i)
        for (int j = 0; j < top.cols_; ++j) m.at(top.rows_ + i, j) = bottom.at(i, j);
    return m;
}

SeriesMatrix SeriesMatrix::hstack(const SeriesMatrix& left, const SeriesMatrix& right) {
    if (left.rows_ != right.rows_) throw InvalidInput("hstack shape mismatch");
    SeriesMatrix m(unify(left.K_, right.K_), left.rows_, left.cols_ + right.cols_, PREC_EXACT);
    for (int i = 0; i < left.rows_; ++i) {
        for (int j = 0; j < left.cols_; ++j) m.at(i, j) = left.at(i, j);
        for (int j = 0; j < right.cols_; ++j) m.at(i, left.cols_ + j) = right.at(i, j);
    }
    return m;
}

TruncSeries SeriesMatrix::det() const {
    if (rows_ != cols_) throw InvalidInput("det of non-square matrix");
    int n = rows_;
    if (n == 1) return at(0, 0);
    TruncSeries acc = TruncSeries::zero(K_, PREC_EXACT);
    // cofactor expansion along the first row
    for (int j = 0; j < n; ++j) {
        if (at(0, j).is_zero_to_prec() && at(0, j).exact()) continue;
        SeriesMatrix sub(K_, n - 1, n - 1, PREC_EXACT);
        for (int i = 1; i < n; ++i) {
            int cc = 0;
            for (int k = 0; k < n; ++k) {
                if (k == j) continue;
                sub.at(i - 1, cc++) = at(i, k);
            }
        }
        TruncSeries term = at(0, j) * sub.det();
        acc = (j % 2 == 0) ? acc + term : acc - term;
    }
    return acc;
}

std::optional<std::int64_t> SeriesMatrix::min_val() const {
    std::optional<std::int64_t> best;
    for (const auto& s : e_) {
        auto v = s.val();
        if (v && (!best || *v < *best)) best = v;
    }
    return best;
}

bool SeriesMatrix::eq_to_prec(const SeriesMatrix& o, std::int64_t upto) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) return false;
    for (std::size_t i = 0; i < e_.size(); ++i)
        if (!e_[i].eq_to_prec(o.e_[i], upto)) return false;
    return true;
}

std::string SeriesMatrix::str() const {
    std::ostringstream os;
    for (int i = 0; i < rows_; ++i) {
        os << "[ ";
        for (int j = 0; j < cols_; ++j) os << at(i, j).str() << (j + 1 < cols_ ? " | " : "");
        os << " ]\n";
    }
    return os.str();
}

// ------------------------------------------------------------- smith form ----

SmithForm smith_form(const SeriesMatrix& M, std::int64_t work_prec) {
    const Fq& K = M.field();
    int nr = M.rows(), nc = M.cols();
    std::int64_t W = std::min(work_prec, M.prec());
    SeriesMatrix A = M.truncated(W);
    SmithForm S{SeriesMatrix::identity(K, nr, PREC_EXACT), SeriesMatrix::identity(K, nc, PREC_EXACT),
                SeriesMatrix::identity(K, nr, PREC_EXACT), SeriesMatrix::identity(K, nc, PREC_EXACT),
                {}};
    int steps = std::min(nr, nc);
    for (int t = 0; t < steps; ++t) {
        // pivot: minimal valuation in the remaining block, ties (row, col)
        int pi = -1, pj = -1;
        std::int64_t pv = 0;
        bool found = false;
        for (int i = t; i < nr; ++i)
            for (int j = t; j < nc; ++j) {
                auto v = A.at(i, j).val();
                if (v && (!found || *v < pv)) {
                    found = true;
                    pv = *v;
                    pi = i;
                    pj = j;
                }
            }
        if (!found) throw SingularMatrix("smith_form: remaining block is zero to precision");
        if (pv >= W) throw PrecisionExhausted("smith_form: pivot valuation not certified below precision");
        if (pi != t) {
            for (int j = 0; j < nc; ++j) std::swap(A.at(t, j), A.at(pi, j));
            for (int j = 0; j < nr; ++j) std::swap(S.U.at(t, j), S.U.at(pi, j));
            for (int i = 0; i < nr; ++i) std::swap(S.Uinv.at(i, t), S.Uinv.at(i, pi));
        }
        if (pj != t) {
            for (int i = 0; i < nr; ++i) std::swap(A.at(i, t), A.at(i, pj));
            for (int i = 0; i < nc; ++i) std::swap(S.V.at(i, t), S.V.at(i, pj));
            for (int j = 0; j < nc; ++j) std::swap(S.Vinv.at(t, j), S.Vinv.at(pj, j));
        }
        // clear column t below and row t to the right
        for (int i = t + 1; i < nr; ++i) {
            if (A.at(i, t).is_zero_to_prec()) continue;
            TruncSeries f = divide_exact(A.at(i, t), A.at(t, t));
            for (int j = t; j < nc; ++j) A.at(i, j) = A.at(i, j) - f * A.at(t, j);
            for (int j = 0; j < nr; ++j) S.U.at(i, j) = S.U.at(i, j) - f * S.U.at(t, j);
            for (int r = 0; r < nr; ++r) S.Uinv.at(r, t) = S.Uinv.at(r, t) + f * S.Uinv.at(r, i);
        }
        for (int j = t + 1; j < nc; ++j) {
            if (A.at(t, j).is_zero_to_prec()) continue;
            TruncSeries f = divide_exact(A.at(t, j), A.at(t, t));
            for (int i = t; i < nr; ++i) A.at(i, j) = A.at(i, j) - A.at(i, t) * f;
            for (int i = 0; i < nc; ++i) S.V.at(i, j) = S.V.at(i, j) - S.V.at(i, t) * f;
            for (int c = 0; c < nc; ++c) S.Vinv.at(t, c) = S.Vinv.at(t, c) + f * S.Vinv.at(j, c);
        }
        // normalize pivot to u^pv: divide row t by the unit part
        TruncSeries unit = A.at(t, t).shifted_down(pv);
        TruncSeries uinv = unit.inverse(std::max<std::int64_t>(W - pv, 1));
        for (int j = t; j < nc; ++j) A.at(t, j) = A.at(t, j) * uinv;
        for (int j = 0; j < nr; ++j) S.U.at(t, j) = S.U.at(t, j) * uinv;
        for (int i = 0; i < nr; ++i) S.Uinv.at(i, t) = S.Uinv.at(i, t) * unit;
        S.d.push_back(pv);
    }
    for (std::size_t i = 1; i < S.d.size(); ++i)
        if (S.d[i] < S.d[i - 1]) throw Error("smith_form: divisors not nondecreasing");
    return S;
}

SeriesMatrix invert_unit(const SeriesMatrix& M, std::int64_t work_prec) {
    if (M.rows() != M.cols()) throw InvalidInput("invert_unit: square matrix required");
    SmithForm S = smith_form(M, work_prec);
    for (auto d : S.d)
        if (d != 0) throw SingularMatrix("invert_unit: matrix is not a unit (divisor u^" +
                                         std::to_string(d) + ")");
    return S.V * S.U; // U M V = I  =>  M^{-1} = V U
}

SeriesMatrix scaled_inverse(const SeriesMatrix& M, std::int64_t k, std::int64_t work_prec) {
    if (M.rows() != M.cols()) throw InvalidInput("scaled_inverse: square matrix required");
    SmithForm S = smith_form(M, work_prec);
    int n = M.rows();
    for (auto d : S.d)
        if (d > k)
            throw SingularMatrix("scaled_inverse: u^" + std::to_string(k) +
                                 " M^{-1} is not integral (divisor u^" + std::to_string(d) + ")");
    // M^{-1} = V diag(u^{-d}) U ; scale by u^k
    SeriesMatrix mid = S.U;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) mid.at(i, j) = mid.at(i, j).shifted_up(k - S.d[i]);
    return S.V * mid;
}

bool span_contains(const SeriesMatrix& Y, const SeriesMatrix& X, std::int64_t mod_k,
                   std::int64_t work_prec) {
    if (Y.rows() != X.rows()) throw InvalidInput("span_contains: row mismatch");
    SmithForm S = smith_form(Y, work_prec);
    SeriesMatrix Z = S.U * X; // condition: row r of Z divisible by u^{min(d_r, k)}
    int rank = (int)S.d.size();
    for (int i = 0; i < Z.rows(); ++i) {
        std::int64_t need = (i < rank) ? std::min(S.d[i], mod_k) : mod_k;
        need = std::min(need, work_prec); // containment is certified at working precision
        for (int j = 0; j < Z.cols(); ++j) {
            const auto& z = Z.at(i, j);
            auto v = z.val();
            if (v && *v < need) return false; // stored coefficients are always certified
            if (!v && z.prec() < need)
                throw PrecisionExhausted("span_contains: cannot certify vanishing at precision");
        }
    }
    return true;
}

SeriesMatrix annihilator(const SeriesMatrix& L, std::int64_t work_prec) {
    // kernel of L^T: V columns beyond the rank
    SeriesMatrix Lt = L.transpose();
    SmithForm S = smith_form(Lt, work_prec);
    int rank = (int)S.d.size(); // = cols(L) for full column rank
    int n = Lt.cols();
    if (rank >= n) throw InvalidInput("annihilator: nothing annihilates a full-rank span");
    return S.V.block(0, rank, n, n - rank);
}

SeriesMatrix complete_summand(const SeriesMatrix& L, std::int64_t work_prec) {
    SmithForm S = smith_form(L, work_prec);
    for (auto d : S.d)
        if (d != 0) throw NotDirectSummand("columns do not span a direct summand (divisor u^" +
                                           std::to_string(d) + ")");
    // L = Uinv [I;0] Vinv ; complement = last columns of Uinv
    int h = L.rows(), r = L.cols();
    return S.Uinv.block(0, r, h, h - r);
}

} // namespace cansub
