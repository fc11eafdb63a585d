#include "cansub/field.hpp"

#include <algorithm>
#include <cstring>
#include <numeric>
#include <random>

namespace cansub {

namespace {

inline fp_t fp_add(fp_t a, fp_t b, long p) {
    fp_t s = a + b;
    return s >= (fp_t)p ? s - (fp_t)p : s;
}
inline fp_t fp_sub(fp_t a, fp_t b, long p) { return a >= b ? a - b : a + (fp_t)p - b; }
inline fp_t fp_mul(fp_t a, fp_t b, long p) {
    return (fp_t)(((std::uint64_t)a * b) % (std::uint64_t)p);
}
fp_t fp_pow(fp_t a, unsigned long long n, long p) {
    fp_t r = 1 % (fp_t)p;
    while (n) {
        if (n & 1) r = fp_mul(r, a, p);
        a = fp_mul(a, a, p);
        n >>= 1;
    }
    return r;
}
fp_t fp_inv(fp_t a, long p) {
    if (a == 0) throw InvalidInput("fp_inv(0)");
    return fp_pow(a, (unsigned long long)(p - 2), p);
}

// F_p linear algebra: solve M x = b and kernel basis; M row-major r x c.
struct FpLin {
    int rows, cols;
    long p;
    std::vector<fp_t> m; // rows x cols, will be reduced in place
    std::vector<int> pivot_col_of_row;
    std::vector<int> row_of_pivot_col; // -1 when free

    FpLin(int r, int c, long p_) : rows(r), cols(c), p(p_), m(r * c, 0) {}
    fp_t& at(int i, int j) { return m[(std::size_t)i * cols + j]; }

    void reduce() {
        pivot_col_of_row.assign(rows, -1);
        row_of_pivot_col.assign(cols, -1);
        int r = 0;
        for (int c = 0; c < cols && r < rows; ++c) {
            int pr = -1;
            for (int i = r; i < rows; ++i)
                if (at(i, c)) {
                    pr = i;
                    break;
                }
            if (pr < 0) continue;
            for (int j = 0; j < cols; ++j) std::swap(at(pr, j), at(r, j));
            fp_t iv = fp_inv(at(r, c), p);
            for (int j = c; j < cols; ++j) at(r, j) = fp_mul(at(r, j), iv, p);
            for (int i = 0; i < rows; ++i) {
                if (i == r || !at(i, c)) continue;
                fp_t f = at(i, c);
                for (int j = c; j < cols; ++j) at(i, j) = fp_sub(at(i, j), fp_mul(f, at(r, j), p), p);
            }
            pivot_col_of_row[r] = c;
            row_of_pivot_col[c] = r;
            ++r;
        }
    }
};

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    std::uint64_t x = a * 0x9e3779b97f4a7c15ULL ^ b * 0xbf58476d1ce4e5b9ULL ^ c * 0x94d049bb133111ebULL;
    x ^= x >> 31;
    x *= 0xd6e8feb86659fd93ULL;
    x ^= x >> 29;
    return x;
}

// Minimal big unsigned for exponents like (p^N - 1)/2.
struct BigU {
    std::vector<std::uint64_t> w; // little-endian, base 2^32 stored in u64 for carries
    static BigU from(std::uint64_t v) {
        BigU b;
        b.w = {v & 0xffffffffULL, v >> 32};
        b.trim();
        return b;
    }
    void trim() {
        while (!w.empty() && w.back() == 0) w.pop_back();
    }
    bool is_zero() const { return w.empty(); }
    void mul_small(std::uint64_t k) {
        std::uint64_t carry = 0;
        for (auto& d : w) {
            std::uint64_t v = d * k + carry;
            d = v & 0xffffffffULL;
            carry = v >> 32;
        }
        while (carry) {
            w.push_back(carry & 0xffffffffULL);
            carry >>= 32;
        }
        trim();
    }
    void sub_small(std::uint64_t k) { // assumes *this >= k
        std::uint64_t borrow = k;
        for (std::size_t i = 0; i < w.size() && borrow; ++i) {
            if (w[i] >= (borrow & 0xffffffffULL)) {
                w[i] -= borrow & 0xffffffffULL;
                borrow >>= 32;
            } else {
                w[i] = w[i] + 0x100000000ULL - (borrow & 0xffffffffULL);
                borrow = (borrow >> 32) + 1;
            }
        }
        trim();
    }
    void shr1() {
        std::uint64_t hi = 0;
        for (std::size_t i = w.size(); i-- > 0;) {
            std::uint64_t v = w[i] | (hi << 32);
            hi = v & 1;
            w[i] = v >> 1;
        }
        trim();
    }
    int bits() const {
        if (w.empty()) return 0;
        int n = (int)(w.size() - 1) * 32;
        std::uint64_t t = w.back();
        while (t) {
            ++n;
            t >>= 1;
        }
        return n;
    }
    bool bit(int i) const {
        int word = i / 32, off = i % 32;
        if (word >= (int)w.size()) return false;
        return (w[word] >> off) & 1;
    }
    // (p^n - 1) / 2
    static BigU half_q_minus_1(long p, int n) {
        BigU b = from(1);
        for (int i = 0; i < n; ++i) b.mul_small((std::uint64_t)p);
        b.sub_small(1);
        b.shr1();
        return b;
    }
};

} // namespace

// ---------------------------------------------------------------- fppoly ----

namespace fppoly {

std::vector<fp_t> trim(std::vector<fp_t> a) {
    while (!a.empty() && a.back() == 0) a.pop_back();
    return a;
}

std::vector<fp_t> mul(const std::vector<fp_t>& a, const std::vector<fp_t>& b, long p) {
    if (a.empty() || b.empty()) return {};
    std::vector<fp_t> r(a.size() + b.size() - 1, 0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!a[i]) continue;
        for (std::size_t j = 0; j < b.size(); ++j)
            r[i + j] = fp_add(r[i + j], fp_mul(a[i], b[j], p), p);
    }
    return trim(std::move(r));
}

std::vector<fp_t> mod(std::vector<fp_t> a, const std::vector<fp_t>& f, long p) {
    a = trim(std::move(a));
    const std::size_t df = f.size() - 1;
    fp_t lead_inv = fp_inv(f.back(), p);
    while (a.size() > df) {
        fp_t c = fp_mul(a.back(), lead_inv, p);
        std::size_t shift = a.size() - 1 - df;
        if (c)
            for (std::size_t i = 0; i <= df; ++i)
                a[shift + i] = fp_sub(a[shift + i], fp_mul(c, f[i], p), p);
        a = trim(std::move(a));
        if (a.empty()) break;
    }
    return a;
}

std::vector<fp_t> gcd(std::vector<fp_t> a, std::vector<fp_t> b, long p) {
    a = trim(std::move(a));
    b = trim(std::move(b));
    while (!b.empty()) {
        auto r = mod(a, b, p);
        a = std::move(b);
        b = std::move(r);
    }
    if (!a.empty()) {
        fp_t iv = fp_inv(a.back(), p);
        for (auto& c : a) c = fp_mul(c, iv, p);
    }
    return a;
}

namespace {
// x^{p^k} mod f by iterated p-th powers.
std::vector<fp_t> frob_iterate(const std::vector<fp_t>& start, int k, const std::vector<fp_t>& f, long p) {
    std::vector<fp_t> r = start;
    for (int i = 0; i < k; ++i) {
        // r <- r^p mod f (binary power, exponent p is small)
        std::vector<fp_t> acc = {1};
        std::vector<fp_t> base = r;
        long n = p;
        while (n) {
            if (n & 1) acc = mod(mul(acc, base, p), f, p);
            base = mod(mul(base, base, p), f, p);
            n >>= 1;
        }
        r = std::move(acc);
    }
    return r;
}
} // namespace

bool is_irreducible(const std::vector<fp_t>& f, long p) {
    int n = (int)f.size() - 1;
    if (n < 1) return false;
    if (n == 1) return true;
    std::vector<fp_t> x = {0, 1};
    // x^{p^n} == x mod f
    auto xpn = frob_iterate(x, n, f, p);
    auto diff = xpn;
    if (diff.size() < 2) diff.resize(2, 0);
    diff[1] = fp_sub(diff[1], 1, p);
    if (!trim(diff).empty()) return false;
    // gcd(x^{p^{n/l}} - x, f) == 1 for prime l | n
    std::vector<int> primes;
    int m = n;
    for (int l = 2; l * l <= m; ++l) {
        if (m % l) continue;
        primes.push_back(l);
        while (m % l == 0) m /= l;
    }
    if (m > 1) primes.push_back(m);
    for (int l : primes) {
        auto xq = frob_iterate(x, n / l, f, p);
        auto d = xq;
        if (d.size() < 2) d.resize(2, 0);
        d[1] = fp_sub(d[1], 1, p);
        if (gcd(d, f, p).size() != 1) return false;
    }
    return true;
}

std::vector<fp_t> find_irreducible(long p, int degree) {
    if (degree == 1) return {0, 1}; // x: F_p[x]/(x) = F_p
    // counter digits are the coefficients a_0..a_{degree-1}
    for (unsigned long long c = 0;; ++c) {
        std::vector<fp_t> f(degree + 1, 0);
        unsigned long long t = c;
        for (int i = 0; i < degree; ++i) {
            f[i] = (fp_t)(t % (unsigned long long)p);
            t /= (unsigned long long)p;
        }
        if (t) throw FieldTooSmall("no irreducible polynomial found (counter overflow)");
        f[degree] = 1;
        if (is_irreducible(f, p)) return f;
    }
}

} // namespace fppoly

// ------------------------------------------------------------ FieldTower ----

namespace {

// Builds the frobenius matrix (and inverse) for a level.
void build_frob(FieldTower::Level& lv, long p) {
    int n = lv.degree;
    lv.frob_mat.assign((std::size_t)n * n, 0);
    // column j = (x^j)^p mod f = (x^p)^j mod f
    std::vector<fp_t> xp = {0, 1};
    {
        std::vector<fp_t> acc = {1};
        std::vector<fp_t> base = xp;
        long e = p;
        while (e) {
            if (e & 1) acc = fppoly::mod(fppoly::mul(acc, base, p), lv.minpoly, p);
            base = fppoly::mod(fppoly::mul(base, base, p), lv.minpoly, p);
            e >>= 1;
        }
        xp = std::move(acc);
    }
    std::vector<fp_t> col = {1};
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < (int)col.size(); ++i) lv.frob_mat[(std::size_t)i * n + j] = col[i];
        if (j + 1 < n) col = fppoly::mod(fppoly::mul(col, xp, p), lv.minpoly, p);
    }
    // invert over F_p
    FpLin sys(n, 2 * n, p);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) sys.at(i, j) = lv.frob_mat[(std::size_t)i * n + j];
        sys.at(i, n + i) = 1;
    }
    sys.reduce();
    lv.inv_frob_mat.assign((std::size_t)n * n, 0);
    for (int i = 0; i < n; ++i) {
        if (sys.pivot_col_of_row[i] != i) throw Error("frobenius matrix not invertible");
        for (int j = 0; j < n; ++j) lv.inv_frob_mat[(std::size_t)i * n + j] = sys.at(i, n + j);
    }
}

} // namespace

FieldTower::FieldTower(long p, const std::vector<fp_t>& base_minpoly, int max_total_degree) {
    if (p <= 2) throw InvalidInput("p must be an odd prime > 2");
    for (long q = 2; q * q <= p; ++q)
        if (p % q == 0) throw InvalidInput("p must be prime");
    auto f = fppoly::trim(base_minpoly);
    int m = (int)f.size() - 1;
    if (m < 1) throw InvalidInput("defining polynomial must be non-constant");
    if (f.back() != 1) throw InvalidInput("defining polynomial must be monic");
    for (auto c : f)
        if (c >= (fp_t)p) throw InvalidInput("defining polynomial coefficient out of range");
    if (m > 1 && !fppoly::is_irreducible(f, p))
        throw InvalidInput("defining polynomial is not irreducible over F_p");
    auto data = std::make_shared<Data>();
    data->p = p;
    data->max_total_degree = max_total_degree;
    Level lv;
    lv.degree = m;
    lv.minpoly = f;
    build_frob(lv, p);
    data->levels.push_back(std::move(lv));
    d_ = std::move(data);
}

FieldTower::FieldTower(long p, int m, int max_total_degree)
    : FieldTower(p, fppoly::find_irreducible(p, m), max_total_degree) {}

bool FieldTower::compatible(const FieldTower& o) const {
    if (d_ == o.d_) return true;
    if (!d_ || !o.d_) return false;
    if (d_->p != o.d_->p) return false;
    std::size_t n = std::min(d_->levels.size(), o.d_->levels.size());
    for (std::size_t i = 0; i < n; ++i)
        if (d_->levels[i].minpoly != o.d_->levels[i].minpoly ||
            d_->levels[i].embed_mat != o.d_->levels[i].embed_mat)
            return false;
    return true;
}

FieldTower FieldTower::join(const FieldTower& a, const FieldTower& b) {
    if (!a.compatible(b)) throw InvalidInput("incompatible field towers");
    return a.num_levels() >= b.num_levels() ? a : b;
}

// --------------------------------------------------------------------- Fq ----

FE Fq::from_int(long v) const {
    FE r(degree(), 0);
    long p_ = p();
    long m = ((v % p_) + p_) % p_;
    r[0] = (fp_t)m;
    return r;
}

bool Fq::is_zero(const FE& a) const {
    for (auto c : a)
        if (c) return false;
    return true;
}

bool Fq::eq(const FE& a, const FE& b) const { return a == b; }

FE Fq::add(const FE& a, const FE& b) const {
    FE r(degree());
    long p_ = p();
    for (int i = 0; i < degree(); ++i) r[i] = fp_add(a[i], b[i], p_);
    return r;
}

FE Fq::sub(const FE& a, const FE& b) const {
    FE r(degree());
    long p_ = p();
    for (int i = 0; i < degree(); ++i) r[i] = fp_sub(a[i], b[i], p_);
    return r;
}

FE Fq::neg(const FE& a) const {
    FE r(degree());
    long p_ = p();
    for (int i = 0; i < degree(); ++i) r[i] = a[i] ? (fp_t)p_ - a[i] : 0;
    return r;
}

FE Fq::mul(const FE& a, const FE& b) const {
    int n = degree();
    long p_ = p();
    if (n == 1) return {fp_mul(a[0], b[0], p_)};
    std::vector<std::uint64_t> acc(2 * n - 1, 0);
    for (int i = 0; i < n; ++i) {
        if (!a[i]) continue;
        for (int j = 0; j < n; ++j) acc[i + j] += (std::uint64_t)a[i] * b[j];
    }
    const auto& f = tw_.level(level_).minpoly;
    // reduce: x^{n+k} = -(f_0 x^k + ... + f_{n-1} x^{n-1+k})
    for (int k = 2 * n - 2; k >= n; --k) {
        std::uint64_t c = acc[k] % (std::uint64_t)p_;
        if (!c) continue;
        for (int i = 0; i < n; ++i) {
            if (!f[i]) continue;
            std::uint64_t sub = (c * f[i]) % (std::uint64_t)p_;
            acc[k - n + i] += (std::uint64_t)p_ - sub;
        }
        acc[k] = 0;
    }
    FE r(n);
    for (int i = 0; i < n; ++i) r[i] = (fp_t)(acc[i] % (std::uint64_t)p_);
    return r;
}

FE Fq::inv(const FE& a) const {
    if (is_zero(a)) throw InvalidInput("field inverse of zero");
    long p_ = p();
    int n = degree();
    if (n == 1) return {fp_inv(a[0], p_)};
    // extended euclid over F_p[x]
    std::vector<fp_t> r0 = tw_.level(level_).minpoly;
    std::vector<fp_t> r1 = fppoly::trim(a);
    std::vector<fp_t> s0 = {}, s1 = {1};
    while (!r1.empty()) {
        // divide r0 by r1
        std::vector<fp_t> q;
        std::vector<fp_t> rem = r0;
        fp_t li = fp_inv(r1.back(), p_);
        while (rem.size() >= r1.size() && !rem.empty()) {
            fp_t c = fp_mul(rem.back(), li, p_);
            std::size_t sh = rem.size() - r1.size();
            if (q.size() < sh + 1) q.resize(sh + 1, 0);
            q[sh] = c;
            for (std::size_t i = 0; i < r1.size(); ++i)
                rem[sh + i] = fp_sub(rem[sh + i], fp_mul(c, r1[i], p_), p_);
            rem = fppoly::trim(std::move(rem));
        }
        auto s2 = s0; // s2 = s0 - q*s1
        auto qs1 = fppoly::mul(q, s1, p_);
        if (s2.size() < qs1.size()) s2.resize(qs1.size(), 0);
        for (std::size_t i = 0; i < qs1.size(); ++i) s2[i] = fp_sub(s2[i], qs1[i], p_);
        s0 = std::move(s1);
        s1 = fppoly::trim(std::move(s2));
        r0 = std::move(r1);
        r1 = std::move(rem);
    }
    // r0 = gcd (a unit since minpoly irreducible), s0 the cofactor of a
    fp_t gi = fp_inv(r0.back() /* constant: r0 degree 0 */, p_);
    FE out(n, 0);
    for (std::size_t i = 0; i < s0.size(); ++i) out[i] = fp_mul(s0[i], gi, p_);
    return out;
}

FE Fq::pow(FE a, unsigned long long n) const {
    FE r = one();
    while (n) {
        if (n & 1) r = mul(r, a);
        a = mul(a, a);
        n >>= 1;
    }
    return r;
}

namespace {
FE matvec(const std::vector<fp_t>& m, const FE& a, int rows, int cols, long p) {
    FE r(rows, 0);
    for (int i = 0; i < rows; ++i) {
        std::uint64_t acc = 0;
        for (int j = 0; j < cols; ++j) acc += (std::uint64_t)m[(std::size_t)i * cols + j] * a[j];
        r[i] = (fp_t)(acc % (std::uint64_t)p);
    }
    return r;
}
} // namespace

FE Fq::frob(const FE& a) const {
    int n = degree();
    if (n == 1) return a;
    return matvec(tw_.level(level_).frob_mat, a, n, n, p());
}

FE Fq::inv_frob(const FE& a) const {
    int n = degree();
    if (n == 1) return a;
    return matvec(tw_.level(level_).inv_frob_mat, a, n, n, p());
}

FE Fq::lift(const FE& a, int from_level) const {
    if (from_level > level_) throw InvalidInput("cannot lift downwards");
    FE cur = a;
    for (int l = from_level + 1; l <= level_; ++l) {
        const auto& lv = tw_.level(l);
        cur = matvec(lv.embed_mat, cur, lv.degree, tw_.degree(l - 1), p());
    }
    return cur;
}

FE Fq::generator() const {
    // brute counter order; fields used here are small enough
    unsigned long long q = 1;
    for (int i = 0; i < degree(); ++i) q *= (unsigned long long)p();
    for (unsigned long long c = 1; c < q; ++c) {
        FE a(degree(), 0);
        unsigned long long t = c;
        for (int i = 0; i < degree(); ++i) {
            a[i] = (fp_t)(t % (unsigned long long)p());
            t /= (unsigned long long)p();
        }
        bool ok = true;
        // order must be q-1: check a^{(q-1)/l} != 1 for prime l | q-1
        unsigned long long n = q - 1;
        for (unsigned long long l = 2; l * l <= n; ++l) {
            if (n % l) continue;
            if (eq(pow(a, (q - 1) / l), one())) {
                ok = false;
                break;
            }
            while (n % l == 0) n /= l;
        }
        if (ok && n > 1 && eq(pow(a, (q - 1) / n), one())) ok = false;
        if (ok) return a;
    }
    throw Error("no multiplicative generator found");
}

int Fq::cmp(const FE& a, const FE& b) {
    if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) return a[i] < b[i] ? -1 : 1;
    return 0;
}

Fq unify(const Fq& a, const Fq& b) {
    FieldTower tw = FieldTower::join(a.tower(), b.tower());
    return Fq(tw, std::max(a.level(), b.level()));
}

// --------------------------------------------- polynomials over Fq levels ----

namespace {

// Dense polynomial over an Fq level, lowest degree first.
struct EPoly {
    std::vector<FE> c;
    static EPoly trim(EPoly a, const Fq& K) {
        while (!a.c.empty() && K.is_zero(a.c.back())) a.c.pop_back();
        return a;
    }
    int deg() const { return (int)c.size() - 1; }
};

EPoly ep_mul(const EPoly& a, const EPoly& b, const Fq& K) {
    if (a.c.empty() || b.c.empty()) return {};
    EPoly r;
    r.c.assign(a.c.size() + b.c.size() - 1, K.zero());
    for (std::size_t i = 0; i < a.c.size(); ++i) {
        if (K.is_zero(a.c[i])) continue;
        for (std::size_t j = 0; j < b.c.size(); ++j)
            r.c[i + j] = K.add(r.c[i + j], K.mul(a.c[i], b.c[j]));
    }
    return EPoly::trim(std::move(r), K);
}

EPoly ep_mod(EPoly a, const EPoly& f, const Fq& K) {
    a = EPoly::trim(std::move(a), K);
    FE li = K.inv(f.c.back());
    while ((int)a.c.size() >= (int)f.c.size() && !a.c.empty()) {
        FE q = K.mul(a.c.back(), li);
        std::size_t sh = a.c.size() - f.c.size();
        for (std::size_t i = 0; i < f.c.size(); ++i)
            a.c[sh + i] = K.sub(a.c[sh + i], K.mul(q, f.c[i]));
        a = EPoly::trim(std::move(a), K);
    }
    return a;
}

EPoly ep_gcd(EPoly a, EPoly b, const Fq& K) {
    a = EPoly::trim(std::move(a), K);
    b = EPoly::trim(std::move(b), K);
    while (!b.c.empty()) {
        auto r = ep_mod(a, b, K);
        a = std::move(b);
        b = std::move(r);
    }
    if (!a.c.empty()) {
        FE iv = K.inv(a.c.back());
        for (auto& x : a.c) x = K.mul(x, iv);
    }
    return a;
}

EPoly ep_powmod_big(EPoly base, const BigU& e, const EPoly& f, const Fq& K) {
    EPoly r;
    r.c = {K.one()};
    base = ep_mod(std::move(base), f, K);
    for (int i = 0; i < e.bits(); ++i) {
        if (e.bit(i)) r = ep_mod(ep_mul(r, base, K), f, K);
        base = ep_mod(ep_mul(base, base, K), f, K);
    }
    return r;
}

// r -> r^{p} mod f, iterated k times
EPoly ep_frob_iter(EPoly r, int k, const EPoly& f, const Fq& K) {
    for (int i = 0; i < k; ++i) {
        EPoly acc;
        acc.c = {K.one()};
        EPoly base = r;
        long n = K.p();
        while (n) {
            if (n & 1) acc = ep_mod(ep_mul(acc, base, K), f, K);
            base = ep_mod(ep_mul(base, base, K), f, K);
            n >>= 1;
        }
        r = std::move(acc);
    }
    return r;
}

// One root of a squarefree polynomial that splits completely over K.
// Deterministic given the seed.
FE ep_find_root(EPoly f, const Fq& K, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    f = EPoly::trim(std::move(f), K);
    if (f.c.empty()) throw Error("find_root: zero polynomial");
    int total_deg = K.degree();
    BigU e = BigU::half_q_minus_1(K.p(), total_deg);
    int guard = 0;
    while (f.deg() > 1) {
        if (++guard > 200) throw Error("find_root: splitting did not converge");
        // random a; split via gcd((Y+a)^{(q-1)/2} - 1, f)
        FE a(K.degree());
        for (auto& x : a) x = (fp_t)(rng() % (std::uint64_t)K.p());
        EPoly shift;
        shift.c = {a, K.one()};
        EPoly s = ep_powmod_big(shift, e, f, K);
        if (s.c.empty()) continue;
        s.c[0] = K.sub(s.c[0], K.one());
        s = EPoly::trim(std::move(s), K);
        EPoly g = ep_gcd(s, f, K);
        if (g.deg() >= 1 && g.deg() < f.deg()) f = g; // keep one side, recurse
    }
    if (f.deg() != 1) throw Error("find_root: failed");
    return K.neg(K.mul(f.c[0], K.inv(f.c[1])));
}

} // namespace

FieldTower FieldTower::extended(int factor) const {
    if (factor < 2) throw InvalidInput("extension factor must be >= 2");
    const Data& old = *d_;
    int top_deg = old.levels.back().degree;
    long long nd = (long long)top_deg * factor;
    if (nd > old.max_total_degree)
        throw FieldTooSmall("required extension degree " + std::to_string(nd) + " exceeds cap " +
                            std::to_string(old.max_total_degree));
    auto data = std::make_shared<Data>(old);
    Level lv;
    lv.degree = (int)nd;
    lv.minpoly = fppoly::find_irreducible(old.p, (int)nd);
    build_frob(lv, old.p);
    data->levels.push_back(lv);
    FieldTower nt{std::shared_ptr<const Data>(data)};
    // embedding: root of the old top minpoly inside the new level
    Fq Knew(nt, nt.num_levels() - 1);
    EPoly g;
    for (auto c : old.levels.back().minpoly) g.c.push_back(Knew.from_int((long)c));
    FE root = ep_find_root(g, Knew, mix_seed((std::uint64_t)old.p, (std::uint64_t)nd, 0xe11bedULL));
    // embed matrix columns = root^j
    auto& lvl = data->levels.back();
    lvl.embed_mat.assign((std::size_t)nd * top_deg, 0);
    FE pw = Knew.one();
    for (int j = 0; j < top_deg; ++j) {
        for (int i = 0; i < (int)nd; ++i) lvl.embed_mat[(std::size_t)i * top_deg + j] = pw[i];
        if (j + 1 < top_deg) pw = Knew.mul(pw, root);
    }
    return FieldTower(std::shared_ptr<const Data>(data));
}

// --------------------------------------------------- additive_field_roots ----

AdditiveFieldRoots additive_field_roots(const Fq& K0, const std::vector<FE>& coeffs_in, const FE& rhs_in) {
    Fq K = K0;
    std::vector<FE> coeffs = coeffs_in;
    FE rhs = rhs_in;
    // strip leading zero coefficients (inseparable part is the caller's business;
    // here we require c_0 != 0)
    if (coeffs.empty() || K.is_zero(coeffs[0]))
        throw InvalidInput("additive_field_roots: separable form required (c_0 != 0)");
    int D = (int)coeffs.size() - 1;
    while (D > 0 && K.is_zero(coeffs[D])) --D;
    coeffs.resize(D + 1);

    for (int attempt = 0;; ++attempt) {
        if (attempt > 8) throw FieldTooSmall("additive root solver: too many extensions");
        int n = K.degree();
        long p = K.p();
        // F_p-linear map z -> sum c_k z^{p^k} on the current field
        FpLin sys(n, n + 1, p);
        for (int j = 0; j < n; ++j) {
            FE basis(n, 0);
            basis[j] = 1;
            FE img = K.zero();
            FE zk = basis;
            for (int k = 0; k <= D; ++k) {
                if (!K.is_zero(coeffs[k])) img = K.add(img, K.mul(coeffs[k], zk));
                if (k < D) zk = K.frob(zk);
            }
            for (int i = 0; i < n; ++i) sys.at(i, j) = img[i];
        }
        for (int i = 0; i < n; ++i) sys.at(i, n) = rhs[i];
        sys.reduce();
        // consistency + kernel dimension
        bool consistent = true;
        for (int r = 0; r < n; ++r) {
            if (sys.pivot_col_of_row[r] == n) {
                consistent = false;
                break;
            }
        }
        std::vector<int> free_cols;
        for (int c = 0; c < n; ++c)
            if (sys.row_of_pivot_col[c] < 0) free_cols.push_back(c);
        int kdim = (int)free_cols.size();
        if (consistent && kdim == D) {
            // particular solution
            FE part(n, 0);
            for (int r = 0; r < n; ++r)
                if (sys.pivot_col_of_row[r] >= 0 && sys.pivot_col_of_row[r] < n)
                    part[sys.pivot_col_of_row[r]] = sys.at(r, n);
            // kernel basis
            std::vector<FE> kb;
            for (int fc : free_cols) {
                FE v(n, 0);
                v[fc] = 1;
                for (int r = 0; r < n; ++r) {
                    int pc = sys.pivot_col_of_row[r];
                    if (pc >= 0 && pc < n) v[pc] = fp_sub(0, sys.at(r, fc), p);
                }
                kb.push_back(v);
            }
            // enumerate particular + span(kernel)
            std::vector<FE> roots;
            long total = 1;
            for (int i = 0; i < kdim; ++i) total *= p;
            roots.reserve(total);
            std::vector<long> digits(kdim, 0);
            for (long idx = 0; idx < total; ++idx) {
                FE v = part;
                long t = idx;
                for (int i = 0; i < kdim; ++i) {
                    long di = t % p;
                    t /= p;
                    if (di) {
                        FE scaled = kb[i];
                        for (auto& x : scaled) x = fp_mul(x, (fp_t)di, p);
                        v = K.add(v, scaled);
                    }
                }
                roots.push_back(std::move(v));
            }
            std::sort(roots.begin(), roots.end(), [](const FE& a, const FE& b) { return Fq::cmp(a, b) < 0; });
            return {K, std::move(roots)};
        }
        // need a bigger field: distinct-degree factorization of F(Y) - rhs tells
        // exactly which extension splits everything
        EPoly F;
        {
            long long degF = 1;
            for (int i = 0; i < D; ++i) degF *= p;
            F.c.assign((std::size_t)degF + 1, K.zero());
            long long e = 1;
            for (int k = 0; k <= D; ++k) {
                F.c[(std::size_t)e] = coeffs[k];
                if (k < D) e *= p;
            }
            F.c[0] = K.sub(F.c[0], rhs);
            F = EPoly::trim(std::move(F), K);
        }
        EPoly Y;
        Y.c = {K.zero(), K.one()};
        EPoly r = Y;
        EPoly f = F;
        long long lcm_deg = 1;
        for (int t = 1; f.deg() > 0 && t <= f.deg(); ++t) {
            r = ep_frob_iter(std::move(r), n, f, K); // r = Y^{q^t} mod f
            EPoly diff = r;
            if ((int)diff.c.size() < 2) diff.c.resize(2, K.zero());
            diff.c[1] = K.sub(diff.c[1], K.one());
            diff = EPoly::trim(std::move(diff), K);
            EPoly g = ep_gcd(diff, f, K);
            if (g.deg() >= 1) {
                lcm_deg = std::lcm(lcm_deg, (long long)t);
                // divide out: f /= g  (exact division via repeated ep_mod quotient)
                // simple long division:
                EPoly q;
                q.c.assign(f.c.size() - g.c.size() + 1, K.zero());
                EPoly rem = f;
                FE li = K.inv(g.c.back());
                while ((int)rem.c.size() >= (int)g.c.size() && !rem.c.empty()) {
                    FE qc = K.mul(rem.c.back(), li);
                    std::size_t sh = rem.c.size() - g.c.size();
                    q.c[sh] = qc;
                    for (std::size_t i = 0; i < g.c.size(); ++i)
                        rem.c[sh + i] = K.sub(rem.c[sh + i], K.mul(qc, g.c[i]));
                    rem = EPoly::trim(std::move(rem), K);
                }
                f = EPoly::trim(std::move(q), K);
                if (f.deg() >= 1) r = ep_mod(std::move(r), f, K);
            }
        }
        if (f.deg() > 0) lcm_deg = std::lcm(lcm_deg, (long long)f.deg());
        if (lcm_deg <= 1)
            throw Error("additive root solver: inconsistent factorization state");
        if (lcm_deg > 1000) throw FieldTooSmall("splitting degree too large");
        FieldTower nt = K.tower().extended((int)lcm_deg);
        Fq Knew(nt, nt.num_levels() - 1);
        for (auto& c : coeffs) c = Knew.lift(c, K.level());
        rhs = Knew.lift(rhs, K.level());
        K = Knew;
    }
}

} // namespace cansub
