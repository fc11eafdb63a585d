#include "cansub/series.hpp"

#include <algorithm>
#include <sstream>

namespace cansub {

// ------------------------------------------------------------ TruncSeries ----

void TruncSeries::trim() {
    int m = K_.degree();
    if (m == 0) return;
    std::int64_t n = len();
    while (n > 0) {
        bool zero = true;
        for (int j = 0; j < m; ++j)
            if (a_[(std::size_t)(n - 1) * m + j]) {
                zero = false;
                break;
            }
        if (!zero) break;
        --n;
    }
    a_.resize((std::size_t)n * m);
}

TruncSeries TruncSeries::monomial(const Fq& K, std::int64_t exp, const FE& c, std::int64_t prec) {
    TruncSeries t(K, prec);
    if (exp < 0) throw InvalidInput("negative exponent in TruncSeries");
    t.set_coeff(exp, c);
    return t;
}

TruncSeries TruncSeries::from_terms(const Fq& K, const std::vector<std::pair<std::int64_t, FE>>& terms,
                                    std::int64_t prec) {
    TruncSeries t(K, prec);
    for (const auto& [e, c] : terms) t.set_coeff(e, c);
    return t;
}

FE TruncSeries::coeff(std::int64_t exp) const {
    int m = K_.degree();
    if (exp < 0 || exp >= len()) return FE(m, 0);
    return FE(a_.begin() + exp * m, a_.begin() + (exp + 1) * m);
}

void TruncSeries::set_coeff(std::int64_t exp, const FE& c) {
    if (exp < 0) throw InvalidInput("negative exponent in TruncSeries");
    if (exp >= prec_) return; // beyond precision: not representable
    int m = K_.degree();
    if ((int)c.size() != m) throw InvalidInput("coefficient has wrong field degree");
    if (exp >= len()) {
        if (K_.is_zero(c)) return;
        a_.resize((std::size_t)(exp + 1) * m, 0);
    }
    std::copy(c.begin(), c.end(), a_.begin() + exp * m);
    trim();
}

std::optional<std::int64_t> TruncSeries::val() const {
    int m = K_.degree();
    std::int64_t n = len();
    for (std::int64_t i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j)
            if (a_[(std::size_t)i * m + j]) return i;
    return std::nullopt;
}

std::int64_t TruncSeries::val_or_prec() const {
    auto v = val();
    return v ? *v : prec_;
}

bool TruncSeries::is_zero_to_prec() const { return !val().has_value(); }

TruncSeries TruncSeries::truncated(std::int64_t new_prec) const {
    TruncSeries t(K_, std::min(prec_, new_prec));
    int m = K_.degree();
    std::int64_t n = std::min(len(), std::max<std::int64_t>(t.prec_, 0));
    t.a_.assign(a_.begin(), a_.begin() + n * m);
    t.trim();
    return t;
}

TruncSeries TruncSeries::lifted_to(const Fq& K2) const {
    if (K2.level() == K_.level()) return *this;
    TruncSeries t(K2, prec_);
    int m = K_.degree();
    std::int64_t n = len();
    for (std::int64_t i = 0; i < n; ++i) {
        FE c(a_.begin() + i * m, a_.begin() + (i + 1) * m);
        if (!K_.is_zero(c)) t.set_coeff(i, K2.lift(c, K_.level()));
    }
    return t;
}

TruncSeries operator+(const TruncSeries& a, const TruncSeries& b) {
    Fq K = unify(a.K_, b.K_);
    TruncSeries x = a.lifted_to(K), y = b.lifted_to(K);
    TruncSeries r(K, std::min(a.prec_, b.prec_));
    int m = K.degree();
    std::int64_t n = std::min<std::int64_t>(std::max(x.len(), y.len()), r.prec_);
    r.a_.assign((std::size_t)n * m, 0);
    long p = K.p();
    for (std::int64_t i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) {
            fp_t s = 0;
            if (i < x.len()) s = x.a_[(std::size_t)i * m + j];
            if (i < y.len()) {
                fp_t t = y.a_[(std::size_t)i * m + j];
                s = s + t >= (fp_t)p ? s + t - (fp_t)p : s + t;
            }
            r.a_[(std::size_t)i * m + j] = s;
        }
    r.trim();
    return r;
}

TruncSeries TruncSeries::operator-() const {
    TruncSeries r(K_, prec_);
    r.a_ = a_;
    long p = K_.p();
    for (auto& c : r.a_)
        if (c) c = (fp_t)p - c;
    return r;
}

TruncSeries operator-(const TruncSeries& a, const TruncSeries& b) { return a + (-b); }

TruncSeries operator*(const TruncSeries& a, const TruncSeries& b) {
    Fq K = unify(a.K_, b.K_);
    TruncSeries x = a.lifted_to(K), y = b.lifted_to(K);
    std::int64_t va = x.val_or_prec(), vb = y.val_or_prec();
    std::int64_t prec = std::min(prec_add(a.prec_, vb >= PREC_HUGE ? PREC_EXACT : vb),
                                 prec_add(b.prec_, va >= PREC_HUGE ? PREC_EXACT : va));
    prec = std::min(prec, PREC_EXACT);
    TruncSeries r(K, prec >= PREC_HUGE ? PREC_EXACT : prec);
    if (x.is_zero_to_prec() || y.is_zero_to_prec()) return r;
    int m = K.degree();
    std::int64_t natural = x.len() + y.len() - 1;
    std::int64_t n = r.exact() ? natural : std::min(natural, r.prec_);
    if (n <= 0) return r;
    r.a_.assign((std::size_t)n * m, 0);
    if (m == 1) {
        long p = K.p();
        for (std::int64_t i = 0; i < x.len(); ++i) {
            std::uint64_t ci = x.a_[i];
            if (!ci) continue;
            std::int64_t jmax = std::min(y.len(), n - i);
            for (std::int64_t j = 0; j < jmax; ++j) {
                if (!y.a_[j]) continue;
                std::uint64_t v = r.a_[i + j] + ci * y.a_[j] % (std::uint64_t)p;
                r.a_[i + j] = (fp_t)(v >= (std::uint64_t)p ? v - p : v);
            }
        }
    } else {
        for (std::int64_t i = 0; i < x.len(); ++i) {
            FE ci = x.coeff(i);
            if (K.is_zero(ci)) continue;
            std::int64_t jmax = std::min(y.len(), n - i);
            for (std::int64_t j = 0; j < jmax; ++j) {
                FE cj = y.coeff(j);
                if (K.is_zero(cj)) continue;
                FE prod = K.mul(ci, cj);
                FE cur(r.a_.begin() + (i + j) * m, r.a_.begin() + (i + j + 1) * m);
                cur = K.add(cur, prod);
                std::copy(cur.begin(), cur.end(), r.a_.begin() + (i + j) * m);
            }
        }
    }
    r.trim();
    return r;
}

TruncSeries TruncSeries::scaled(const FE& c) const {
    TruncSeries r(K_, prec_);
    if (K_.is_zero(c)) return r;
    int m = K_.degree();
    std::int64_t n = len();
    r.a_.assign((std::size_t)n * m, 0);
    for (std::int64_t i = 0; i < n; ++i) {
        FE ci = coeff(i);
        if (K_.is_zero(ci)) continue;
        FE prod = K_.mul(ci, c);
        std::copy(prod.begin(), prod.end(), r.a_.begin() + i * m);
    }
    r.trim();
    return r;
}

TruncSeries TruncSeries::frobenius() const {
    long p = K_.p();
    std::int64_t prec = exact() ? PREC_EXACT : prec_ * p;
    TruncSeries r(K_, prec);
    int m = K_.degree();
    std::int64_t n = len();
    if (n == 0) return r;
    r.a_.assign((std::size_t)((n - 1) * p + 1) * m, 0);
    for (std::int64_t i = 0; i < n; ++i) {
        FE c = coeff(i);
        if (K_.is_zero(c)) continue;
        FE cp = K_.frob(c);
        std::copy(cp.begin(), cp.end(), r.a_.begin() + (i * p) * m);
    }
    r.trim();
    return r;
}

TruncSeries TruncSeries::shifted_up(std::int64_t k) const {
    if (k == 0) return *this;
    if (k < 0) return shifted_down(-k);
    TruncSeries r(K_, exact() ? PREC_EXACT : prec_ + k);
    int m = K_.degree();
    std::int64_t n = len();
    if (n) {
        r.a_.assign((std::size_t)(n + k) * m, 0);
        std::copy(a_.begin(), a_.end(), r.a_.begin() + k * m);
    }
    return r;
}

TruncSeries TruncSeries::shifted_down(std::int64_t k) const {
    if (k == 0) return *this;
    if (k < 0) return shifted_up(-k);
    auto v = val();
    if (v && *v < k) throw InvalidInput("shifted_down: valuation too small for exact division");
    std::int64_t prec = exact() ? PREC_EXACT : prec_ - k;
    if (prec <= 0) throw PrecisionExhausted("shifted_down: no certified digits remain");
    TruncSeries r(K_, prec);
    int m = K_.degree();
    if (len() > k) r.a_.assign(a_.begin() + k * m, a_.end());
    return r;
}

TruncSeries TruncSeries::inverse(std::int64_t target_prec) const {
    auto v = val();
    if (!v || *v != 0) {
        if (!v) throw SingularMatrix("inverse of a series that is zero to precision");
        throw InvalidInput("inverse: series is not a unit (valuation > 0)");
    }
    std::int64_t P = std::min(target_prec, prec_);
    if (P >= PREC_HUGE)
        throw InvalidInput("inverse: a finite target precision is required for exact input");
    if (P <= 0) throw PrecisionExhausted("inverse: no certified digits remain");
    TruncSeries r(K_, P);
    int m = K_.degree();
    FE c0i = K_.inv(coeff(0));
    r.a_.assign((std::size_t)P * m, 0);
    std::copy(c0i.begin(), c0i.end(), r.a_.begin());
    std::int64_t sn = std::min(len(), P);
    for (std::int64_t i = 1; i < P; ++i) {
        FE acc = K_.zero();
        std::int64_t jmax = std::min(i, sn - 1);
        for (std::int64_t j = 1; j <= jmax; ++j) {
            FE sj = coeff(j);
            if (K_.is_zero(sj)) continue;
            FE rj(r.a_.begin() + (i - j) * m, r.a_.begin() + (i - j + 1) * m);
            acc = K_.add(acc, K_.mul(sj, rj));
        }
        if (!K_.is_zero(acc)) {
            FE ci = K_.neg(K_.mul(c0i, acc));
            std::copy(ci.begin(), ci.end(), r.a_.begin() + i * m);
        }
    }
    r.trim();
    return r;
}

bool TruncSeries::eq_to_prec(const TruncSeries& o, std::int64_t upto) const {
    std::int64_t P = std::min({prec_, o.prec_, upto});
    TruncSeries d = (*this - o).truncated(P);
    return d.is_zero_to_prec();
}

TruncSeries divide_exact(const TruncSeries& a, const TruncSeries& b) {
    auto vb = b.val();
    if (!vb) throw SingularMatrix("divide_exact: divisor zero to precision");
    auto va = a.val();
    if (!va) {
        // a is zero to precision; quotient known to a.prec - v(b)
        std::int64_t prec = a.exact() && b.exact() ? PREC_EXACT : std::min(a.prec(), b.prec()) - *vb;
        if (prec <= 0) throw PrecisionExhausted("divide_exact: no certified digits remain");
        if (a.is_exact_zero()) return TruncSeries::zero(a.field(), PREC_EXACT);
        return TruncSeries::zero(a.field(), prec);
    }
    if (*va < *vb) throw InvalidInput("divide_exact: quotient not integral");
    TruncSeries bu = b.shifted_down(*vb);
    TruncSeries au = a.shifted_down(*vb);
    std::int64_t target = std::min(au.prec(), bu.prec());
    if (target >= PREC_HUGE) {
        // exact inputs: a polynomial quotient may exist, but we must pick a
        // working window; use the natural degree bound + 1
        target = std::max<std::int64_t>(au.len() + 1, 2);
        TruncSeries q = au * bu.inverse(target);
        // If it terminates within the window it is exact.
        TruncSeries check = q * bu - au;
        if (check.is_zero_to_prec() && q.len() < target) {
            TruncSeries qe(q.field(), PREC_EXACT);
            for (std::int64_t i = 0; i < q.len(); ++i) qe.set_coeff(i, q.coeff(i));
            TruncSeries resid = qe * bu - au;
            if (resid.is_exact_zero()) return qe;
        }
        return q;
    }
    return au * bu.inverse(target);
}

std::string TruncSeries::str() const {
    std::ostringstream os;
    bool first = true;
    int m = K_.degree();
    for (std::int64_t i = 0; i < len(); ++i) {
        FE c = coeff(i);
        if (K_.is_zero(c)) continue;
        if (!first) os << " + ";
        first = false;
        os << "(";
        for (int j = 0; j < m; ++j) os << (j ? "," : "") << c[j];
        os << ")u^" << i;
    }
    if (first) os << "0";
    if (!exact()) os << " + O(u^" << prec_ << ")";
    return os.str();
}

// ---------------------------------------------------------- PuiseuxSeries ----

void PuiseuxSeries::drop_beyond_prec() {
    if (!prec_) return;
    for (auto it = c_.begin(); it != c_.end();) {
        if (it->first >= *prec_ || K_.is_zero(it->second))
            it = c_.erase(it);
        else
            ++it;
    }
}

PuiseuxSeries PuiseuxSeries::monomial(const Fq& K, const Rat& exp, const FE& c) {
    PuiseuxSeries s(K);
    if (exp < Rat(0)) throw InvalidInput("negative exponent in PuiseuxSeries");
    if (!K.is_zero(c)) s.c_[exp] = c;
    return s;
}

PuiseuxSeries PuiseuxSeries::from_trunc(const TruncSeries& t) {
    PuiseuxSeries s(t.field(), t.exact() ? std::optional<Rat>{} : std::optional<Rat>{Rat(t.prec())});
    for (std::int64_t i = 0; i < t.len(); ++i) {
        FE c = t.coeff(i);
        if (!t.field().is_zero(c)) s.c_[Rat(i)] = c;
    }
    return s;
}

std::optional<Rat> PuiseuxSeries::val() const {
    if (c_.empty()) return std::nullopt;
    return c_.begin()->first;
}

FE PuiseuxSeries::coeff(const Rat& e) const {
    auto it = c_.find(e);
    return it == c_.end() ? K_.zero() : it->second;
}

void PuiseuxSeries::add_term(const Rat& e, const FE& c) {
    if (e < Rat(0)) throw InvalidInput("negative exponent in PuiseuxSeries");
    if (prec_ && e >= *prec_) return;
    auto it = c_.find(e);
    if (it == c_.end()) {
        if (!K_.is_zero(c)) c_[e] = c;
    } else {
        FE s = K_.add(it->second, c);
        if (K_.is_zero(s))
            c_.erase(it);
        else
            it->second = s;
    }
}

PuiseuxSeries PuiseuxSeries::truncated(const Rat& new_prec) const {
    PuiseuxSeries s(K_, prec_ ? std::min(*prec_, new_prec) : new_prec);
    for (const auto& [e, c] : c_)
        if (e < *s.prec_) s.c_[e] = c;
    return s;
}

PuiseuxSeries PuiseuxSeries::with_prec(std::optional<Rat> p) const {
    PuiseuxSeries s = *this;
    s.prec_ = std::move(p);
    s.drop_beyond_prec();
    return s;
}

PuiseuxSeries PuiseuxSeries::lifted_to(const Fq& K2) const {
    if (K2.level() == K_.level()) return *this;
    PuiseuxSeries s(K2, prec_);
    for (const auto& [e, c] : c_) s.c_[e] = K2.lift(c, K_.level());
    return s;
}

namespace {
std::optional<Rat> min_prec(const std::optional<Rat>& a, const std::optional<Rat>& b) {
    if (!a) return b;
    if (!b) return a;
    return std::min(*a, *b);
}
} // namespace

PuiseuxSeries operator+(const PuiseuxSeries& a, const PuiseuxSeries& b) {
    Fq K = unify(a.K_, b.K_);
    PuiseuxSeries x = a.lifted_to(K), y = b.lifted_to(K);
    PuiseuxSeries r(K, min_prec(a.prec_, b.prec_));
    r.c_ = std::move(x.c_);
    for (const auto& [e, c] : y.c_) {
        auto it = r.c_.find(e);
        if (it == r.c_.end())
            r.c_[e] = c;
        else {
            FE s = K.add(it->second, c);
            if (K.is_zero(s))
                r.c_.erase(it);
            else
                it->second = s;
        }
    }
    r.drop_beyond_prec();
    return r;
}

PuiseuxSeries PuiseuxSeries::operator-() const {
    PuiseuxSeries r(K_, prec_);
    for (const auto& [e, c] : c_) r.c_[e] = K_.neg(c);
    return r;
}

PuiseuxSeries operator-(const PuiseuxSeries& a, const PuiseuxSeries& b) { return a + (-b); }

PuiseuxSeries operator*(const PuiseuxSeries& a, const PuiseuxSeries& b) {
    Fq K = unify(a.K_, b.K_);
    if (a.is_exact_zero() || b.is_exact_zero()) return PuiseuxSeries::zero(K);
    PuiseuxSeries x = a.lifted_to(K), y = b.lifted_to(K);
    // prec = min(prec_a + v_b, prec_b + v_a); missing valuation means >= prec
    std::optional<Rat> prec;
    auto va = x.val(), vb = y.val();
    Rat va_eff = va ? *va : (a.prec_ ? *a.prec_ : Rat(0));
    Rat vb_eff = vb ? *vb : (b.prec_ ? *b.prec_ : Rat(0));
    if (a.prec_) prec = min_prec(prec, *a.prec_ + vb_eff);
    if (b.prec_) prec = min_prec(prec, *b.prec_ + va_eff);
    PuiseuxSeries r(K, prec);
    if (x.c_.empty() || y.c_.empty()) return r;
    for (const auto& [e1, c1] : x.c_)
        for (const auto& [e2, c2] : y.c_) {
            Rat e = e1 + e2;
            if (r.prec_ && e >= *r.prec_) continue;
            r.add_term(e, K.mul(c1, c2));
        }
    return r;
}

PuiseuxSeries PuiseuxSeries::scaled(const FE& c) const {
    PuiseuxSeries r(K_, prec_);
    if (K_.is_zero(c)) return r;
    for (const auto& [e, x] : c_) {
        FE v = K_.mul(x, c);
        if (!K_.is_zero(v)) r.c_[e] = v;
    }
    return r;
}

PuiseuxSeries PuiseuxSeries::shifted(const Rat& sh) const {
    PuiseuxSeries r(K_, prec_ ? std::optional<Rat>{*prec_ + sh} : std::nullopt);
    for (const auto& [e, c] : c_) {
        Rat ne = e + sh;
        if (ne < Rat(0)) throw InvalidInput("negative exponent after shift");
        r.c_[ne] = c;
    }
    return r;
}

PuiseuxSeries PuiseuxSeries::frobenius(int iterations) const {
    PuiseuxSeries r(K_, prec_);
    Rat mult(1);
    for (int i = 0; i < iterations; ++i) mult = mult * Rat(K_.p());
    if (prec_) r.prec_ = *prec_ * mult;
    for (const auto& [e, c] : c_) {
        FE cc = c;
        for (int i = 0; i < iterations; ++i) cc = K_.frob(cc);
        r.c_[e * mult] = cc;
    }
    return r;
}

PuiseuxSeries PuiseuxSeries::pth_root(std::int64_t den_cap) const {
    Rat q(1, K_.p());
    PuiseuxSeries r(K_, prec_ ? std::optional<Rat>{*prec_ * q} : std::nullopt);
    for (const auto& [e, c] : c_) {
        Rat ne = e * q;
        if (ne.den > den_cap)
            throw ExponentDenominatorOverflow("pth_root: exponent denominator " +
                                              std::to_string(ne.den) + " exceeds cap " +
                                              std::to_string(den_cap));
        r.c_[ne] = K_.inv_frob(c);
    }
    return r;
}

bool PuiseuxSeries::eq_to_common_prec(const PuiseuxSeries& o) const {
    PuiseuxSeries d = *this - o;
    return d.is_zero_to_prec();
}

int PuiseuxSeries::cmp(const PuiseuxSeries& a, const PuiseuxSeries& b) {
    auto ia = a.c_.begin(), ib = b.c_.begin();
    while (ia != a.c_.end() && ib != b.c_.end()) {
        if (ia->first != ib->first) return ia->first < ib->first ? -1 : 1;
        int c = Fq::cmp(ia->second, ib->second);
        if (c) return c;
        ++ia;
        ++ib;
    }
    if (ia != a.c_.end()) return 1;
    if (ib != b.c_.end()) return -1;
    return 0;
}

std::string PuiseuxSeries::str() const {
    std::ostringstream os;
    bool first = true;
    for (const auto& [e, c] : c_) {
        if (!first) os << " + ";
        first = false;
        os << "(";
        for (std::size_t j = 0; j < c.size(); ++j) os << (j ? "," : "") << c[j];
        os << ")u^" << e.str();
    }
    if (first) os << "0";
    if (prec_) os << " + O(u^" << prec_->str() << ")";
    return os.str();
}

} // namespace cansub
