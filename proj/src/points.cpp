#include "cansub/points.hpp"

#include <algorithm>
#include <cmath>

namespace cansub {

namespace {

const Rat RAT_INF(1000000000000LL);

using PVec = std::vector<PuiseuxSeries>;
using PMat = std::vector<PVec>;

PMat to_pmat(const SeriesMatrix& A, const std::optional<Fq>& hint = std::nullopt) {
    PMat m(A.rows(), PVec(A.cols()));
    for (int i = 0; i < A.rows(); ++i)
        for (int j = 0; j < A.cols(); ++j) {
            m[i][j] = PuiseuxSeries::from_trunc(hint ? A.at(i, j).lifted_to(*hint) : A.at(i, j));
        }
    return m;
}

PMat pmat_mul(const PMat& a, const PMat& b) {
    std::size_t n = a.size(), k = b.size(), c = b[0].size();
    PMat r(n, PVec(c));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < c; ++j) {
            PuiseuxSeries acc = a[i][0] * b[0][j];
            for (std::size_t t = 1; t < k; ++t) acc = acc + a[i][t] * b[t][j];
            r[i][j] = std::move(acc);
        }
    return r;
}

PMat pmat_frob(const PMat& a) {
    PMat r = a;
    for (auto& row : r)
        for (auto& s : row) s = s.frobenius();
    return r;
}

PuiseuxSeries pdet(const std::vector<PVec>& m) {
    std::size_t n = m.size();
    if (n == 1) return m[0][0];
    const Fq& K = m[0][0].field();
    PuiseuxSeries acc = PuiseuxSeries::zero(K);
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<PVec> sub(n - 1, PVec(n - 1));
        for (std::size_t i = 1; i < n; ++i) {
            std::size_t cc = 0;
            for (std::size_t t = 0; t < n; ++t) {
                if (t == j) continue;
                sub[i - 1][cc++] = m[i][t];
            }
        }
        PuiseuxSeries term = m[0][j] * pdet(sub);
        acc = (j % 2 == 0) ? acc + term : acc - term;
    }
    return acc;
}

// ---------------------------------------------------------- Newton polygon ---

struct HullPt {
    long long x;
    Rat v;
};
struct HullEdge {
    Rat slope;     // root valuation lambda
    long long len; // number of roots (with polynomial multiplicity)
};

std::vector<HullEdge> lower_hull(std::vector<HullPt> pts) {
    std::sort(pts.begin(), pts.end(), [](const HullPt& a, const HullPt& b) {
        if (a.x != b.x) return a.x < b.x;
        return a.v < b.v;
    });
    // dedupe x keeping the lowest v
    std::vector<HullPt> q;
    for (auto& p : pts) {
        if (!q.empty() && q.back().x == p.x) continue;
        q.push_back(p);
    }
    std::vector<HullPt> hull;
    for (const auto& p : q) {
        while (hull.size() >= 2) {
            const HullPt& a = hull[hull.size() - 2];
            const HullPt& b = hull.back();
            // drop b when it is on or above segment a..p
            if ((b.v - a.v) * Rat(p.x - a.x) >= (p.v - a.v) * Rat(b.x - a.x))
                hull.pop_back();
            else
                break;
        }
        hull.push_back(p);
    }
    std::vector<HullEdge> edges;
    for (std::size_t i = 0; i + 1 < hull.size(); ++i) {
        Rat slope = (hull[i].v - hull[i + 1].v) / Rat(hull[i + 1].x - hull[i].x);
        edges.push_back({slope, hull[i + 1].x - hull[i].x});
    }
    return edges; // ascending in x, i.e. ascending slope for a lower hull
}

// ------------------------------------------------------- additive solving ---

PuiseuxSeries apply_additive(const std::vector<PuiseuxSeries>& coeffs, const PuiseuxSeries& y) {
    PuiseuxSeries acc = PuiseuxSeries::zero(y.field());
    PuiseuxSeries yk = y;
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
        if (!coeffs[k].is_zero_to_prec() || !coeffs[k].exact()) acc = acc + coeffs[k] * yk;
        if (k + 1 < coeffs.size()) yk = yk.frobenius();
    }
    return acc;
}

// Precision beyond which hidden tails of the inputs could alter a root.
Rat hidden_cap(const std::vector<PuiseuxSeries>& coeffs, const PuiseuxSeries& rhs, const Rat& target) {
    long p = coeffs[0].field().p();
    std::vector<Rat> precs;
    for (const auto& c : coeffs)
        if (c.prec()) precs.push_back(*c.prec());
    if (rhs.prec()) precs.push_back(*rhs.prec());
    if (precs.empty()) return target;
    Rat minP = *std::min_element(precs.begin(), precs.end());
    // a perturbation of size u^P translates the root set by the particular
    // solution of A(y) = eps, whose valuation is the first Newton polygon
    // slope from (0, P): max_k (P - v(c_k))/p^k
    std::optional<Rat> resp;
    long long pk = 1;
    for (const auto& c : coeffs) {
        auto v = c.val();
        if (v) {
            Rat cand = (minP - *v) / Rat(pk);
            if (!resp || cand > *resp) resp = cand;
        }
        pk *= p;
    }
    if (!resp || *resp <= Rat(0))
        throw PrecisionExhausted("additive solve: inputs too imprecise to locate any root");
    return std::min(target, *resp);
}

struct SolveState {
    const PointConfig* cfg;
    Rat target;
    Fq* session; // shared evolving field; keeps all extensions on one chain
};

// Roots y with v(y) > floor (floor < 0 disables) of sum coeffs[k] y^{p^k} = rhs.
// expected >= 0 enables the conservation assertion.
void solve_rec(const std::vector<PuiseuxSeries>& coeffs, const PuiseuxSeries& rhs, const Rat& floor,
               bool has_floor, long long expected, int depth, SolveState& st,
               std::vector<RootApprox>& out) {
    long p = coeffs[0].field().p();
    Rat cap = hidden_cap(coeffs, rhs, st.target);
    std::vector<HullPt> pts;
    long long pk = 1;
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
        auto v = coeffs[k].val();
        if (v) pts.push_back({pk, *v});
        pk *= p;
    }
    auto vr = rhs.val();
    if (vr) pts.push_back({0, *vr});
    auto edges = lower_hull(pts);

    long long emitted = 0;
    long long lumped = 0;
    Rat lump_prec = cap;
    bool rhs_zero = !vr.has_value();
    if (rhs_zero) lumped += 1; // the zero root (or a deeper particular solution)
    bool stopped = false;      // once an edge stops, all higher slopes lump too

    for (const auto& edge : edges) {
        Rat lam = edge.slope;
        if (has_floor && lam <= floor) continue;
        if (lam < Rat(0)) continue; // outside the valuation ring
        bool stop = stopped || lam >= cap || lam.den > st.cfg->den_cap ||
                    depth >= st.cfg->max_corrections;
        if (stop) {
            stopped = true;
            lumped += edge.len;
            lump_prec = std::min(lump_prec, std::min(lam, cap));
            continue;
        }
        // leading equation on this edge
        Rat line = RAT_INF;
        pk = 1;
        for (std::size_t k = 0; k < coeffs.size(); ++k) {
            auto v = coeffs[k].val();
            if (v) line = std::min(line, *v + lam * Rat(pk));
            pk *= p;
        }
        if (vr) line = std::min(line, *vr);
        int k1 = -1, k2 = -1;
        pk = 1;
        for (std::size_t k = 0; k < coeffs.size(); ++k) {
            auto v = coeffs[k].val();
            if (v && *v + lam * Rat(pk) == line) {
                if (k1 < 0) k1 = (int)k;
                k2 = (int)k;
            }
            pk *= p;
        }
        if (k1 < 0) continue; // edge carried by rhs alone: no balance, no roots here
        // residue field equation, solved over the session's field so that all
        // extensions within one enumeration share a single chain
        Fq K = unify(*st.session, coeffs[0].field());
        for (const auto& c : coeffs) K = unify(K, c.field());
        K = unify(K, rhs.field());
        std::vector<FE> sep((std::size_t)(k2 - k1) + 1, K.zero());
        pk = 1;
        for (std::size_t k = 0; k < coeffs.size(); ++k) {
            auto v = coeffs[k].val();
            if (v && *v + lam * Rat(pk) == line && (int)k >= k1)
                sep[(std::size_t)((int)k - k1)] =
                    K.lift(coeffs[k].coeff(*v), coeffs[k].field().level());
            pk *= p;
        }
        FE rlead = K.zero();
        if (vr && *vr == line) rlead = K.lift(rhs.coeff(*vr), rhs.field().level());
        AdditiveFieldRoots afr = additive_field_roots(K, sep, rlead);
        if (afr.field.tower().num_levels() > st.session->tower().num_levels())
            *st.session = afr.field;
        long long mult_branch = 1;
        for (int i = 0; i < k1; ++i) mult_branch *= p;
        long long seen = 0;
        for (const auto& etap : afr.roots) {
            if (afr.field.is_zero(etap)) continue;
            FE eta = etap;
            for (int i = 0; i < k1; ++i) eta = afr.field.inv_frob(eta);
            PuiseuxSeries t = PuiseuxSeries::monomial(afr.field, lam, eta);
            if (lam.den > st.cfg->den_cap)
                throw ExponentDenominatorOverflow("slope denominator exceeds cap");
            PuiseuxSeries new_rhs = rhs - apply_additive(coeffs, t);
            std::vector<RootApprox> sub;
            solve_rec(coeffs, new_rhs, lam, true, mult_branch, depth + 1, st, sub);
            for (auto& s : sub) {
                out.push_back({t + s.y, s.honest_prec, s.mult});
                seen += s.mult;
                emitted += s.mult;
            }
        }
        long long want = edge.len; // total roots on the edge
        if (seen != want)
            throw EnumerationIncomplete("edge at slope " + lam.str() + " produced " +
                                        std::to_string(seen) + " of " + std::to_string(want) +
                                        " roots");
    }
    if (lumped > 0) {
        Fq K = coeffs[0].field();
        PuiseuxSeries zero = PuiseuxSeries::zero(K).with_prec(lump_prec);
        out.push_back({zero, lump_prec, lumped});
        emitted += lumped;
    }
    if (expected >= 0 && emitted != expected)
        throw EnumerationIncomplete("branch expected " + std::to_string(expected) + " roots, got " +
                                    std::to_string(emitted));
}

// p-th root for enumeration internals: terms whose exponent denominator would
// exceed the cap are dropped and the precision is lowered to the first dropped
// exponent (an honest resolution cut, like a stopped wild branch). The public
// PuiseuxSeries::pth_root stays strict.
PuiseuxSeries pth_root_tolerant(const PuiseuxSeries& s, std::int64_t den_cap) {
    const Fq& K = s.field();
    Rat q(1, K.p());
    std::optional<Rat> prec;
    if (s.prec()) prec = *s.prec() * q;
    std::optional<Rat> cut;
    std::vector<std::pair<Rat, FE>> keep;
    for (const auto& [e, c] : s.terms()) {
        Rat ne = e * q;
        if (ne.den > den_cap) {
            cut = ne;
            break;
        }
        keep.emplace_back(ne, K.inv_frob(c));
    }
    if (cut) prec = prec ? std::min(*prec, *cut) : *cut;
    PuiseuxSeries r(K, prec);
    for (const auto& [e, c] : keep) r.add_term(e, c);
    return r;
}

std::vector<RootApprox> solve_additive_inner(std::vector<PuiseuxSeries> coeffs, PuiseuxSeries rhs,
                                             const PointConfig& cfg, const Rat& target,
                                             Fq* session = nullptr) {
    Fq local = coeffs.empty() ? Fq() : coeffs[0].field();
    if (!session) session = &local;
    // drop trailing zero coefficients
    while (!coeffs.empty() && coeffs.back().is_zero_to_prec()) coeffs.pop_back();
    if (coeffs.empty()) throw InvalidInput("solve_additive: all coefficients vanish");
    // inseparable part: c_0 = ... = c_{k0-1} = 0 means solve in z = y^{p^{k0}}
    std::size_t k0 = 0;
    while (k0 < coeffs.size() && coeffs[k0].is_zero_to_prec()) ++k0;
    if (k0 >= coeffs.size()) throw InvalidInput("solve_additive: all coefficients vanish");
    long p = coeffs[0].field().p();
    if (k0 > 0) {
        std::vector<PuiseuxSeries> b(coeffs.begin() + k0, coeffs.end());
        Rat t2 = target;
        for (std::size_t i = 0; i < k0; ++i) t2 = t2 * Rat(p);
        std::vector<RootApprox> zroots =
            solve_additive_inner(std::move(b), std::move(rhs), cfg, t2, session);
        std::vector<RootApprox> out;
        for (auto& zr : zroots) {
            PuiseuxSeries y = zr.y;
            Rat hp = zr.honest_prec;
            for (std::size_t i = 0; i < k0; ++i) {
                y = pth_root_tolerant(y, cfg.den_cap);
                hp = hp / Rat(p);
                if (y.prec() && *y.prec() < hp) hp = *y.prec();
            }
            out.push_back({std::move(y), hp, zr.mult});
        }
        return out;
    }
    SolveState st{&cfg, target, session};
    std::vector<RootApprox> out;
    solve_rec(coeffs, rhs, Rat(0), false, -1, 0, st, out);
    std::sort(out.begin(), out.end(),
              [](const RootApprox& a, const RootApprox& b) { return PuiseuxSeries::cmp(a.y, b.y) < 0; });
    return out;
}

} // namespace

PointConfig PointConfig::defaults(const KisinModule& M) {
    PointConfig cfg;
    long p = M.p();
    int h = M.h(), e = M.e();
    cfg.target_prec = Rat((std::int64_t)e * (h + p));
    // keep well inside the module's certified window
    cfg.target_prec = std::min(cfg.target_prec, Rat(M.precision(), p));
    std::int64_t ph = 1;
    for (int i = 0; i < h; ++i) ph *= p;
    std::int64_t p8 = 1;
    for (int i = 0; i < 8; ++i) p8 *= p;
    cfg.den_cap = (std::int64_t)e * (ph - 1) * p8;
    return cfg;
}

std::vector<SeriesMatrix> frobenius_powers(const KisinModule& M, int k_max) {
    if (k_max < 1) throw InvalidInput("frobenius_powers: k_max must be >= 1");
    std::vector<SeriesMatrix> out;
    out.push_back(SeriesMatrix::identity(M.field(), M.h()));
    for (int k = 1; k <= k_max; ++k) out.push_back(M.A() * out.back().phi_twist());
    return out;
}

namespace {

// Minimal dependence among the columns w_0..w_T, coefficients by Cramer minors
// (division-free). Returns empty when the given prefix is independent.
std::vector<PuiseuxSeries> minimal_relation(const std::vector<PVec>& cols, int k) {
    auto minor_det = [&](const std::vector<int>& rows, const std::vector<int>& use) {
        std::vector<PVec> m(rows.size(), PVec(use.size()));
        for (std::size_t i = 0; i < rows.size(); ++i)
            for (std::size_t j = 0; j < use.size(); ++j) m[i][j] = cols[use[j]][rows[i]];
        return pdet(m);
    };
    auto combos = [&](int n, int r) {
        std::vector<std::vector<int>> res;
        std::vector<int> idx(r);
        for (int i = 0; i < r; ++i) idx[i] = i;
        while (true) {
            res.push_back(idx);
            int i = r - 1;
            while (i >= 0 && idx[i] == n - r + i) --i;
            if (i < 0) break;
            ++idx[i];
            for (int j = i + 1; j < r; ++j) idx[j] = idx[j - 1] + 1;
        }
        return res;
    };
    for (int T = 1; T <= (int)cols.size() - 1; ++T) {
        bool dependent;
        if (T + 1 > k) {
            dependent = true;
        } else {
            dependent = true;
            std::vector<int> use(T + 1);
            for (int i = 0; i <= T; ++i) use[i] = i;
            for (const auto& rows : combos(k, T + 1)) {
                PuiseuxSeries dmt = minor_det(rows, use);
                if (dmt.val()) {
                    dependent = false;
                    break;
                }
            }
        }
        if (!dependent) continue;
        // pick T rows where cols 0..T-1 have a nonzero minor of minimal valuation
        std::vector<int> best_rows;
        std::optional<Rat> best_val;
        std::vector<int> prefix(T);
        for (int i = 0; i < T; ++i) prefix[i] = i;
        for (const auto& rows : combos(k, T)) {
            PuiseuxSeries dmt = minor_det(rows, prefix);
            auto v = dmt.val();
            if (v && (!best_val || *v < *best_val)) {
                best_val = *v;
                best_rows = rows;
            }
        }
        if (best_rows.empty()) continue; // prefix degenerate at this T; grow T
        std::vector<PuiseuxSeries> c(T + 1);
        for (int t = 0; t <= T; ++t) {
            std::vector<int> use;
            for (int s = 0; s <= T; ++s)
                if (s != t) use.push_back(s);
            PuiseuxSeries dmt = minor_det(best_rows, use);
            c[t] = (t % 2 == 0) ? dmt : -dmt;
        }
        // normalize: primitive, first nonzero coefficient has lowest coeff 1
        std::optional<Rat> vmin;
        for (const auto& s : c) {
            auto v = s.val();
            if (v && (!vmin || *v < *vmin)) vmin = *v;
        }
        if (!vmin) continue;
        for (auto& s : c) s = s.shifted(-*vmin);
        // unify coefficient fields, then scale the leading coefficient to 1
        Fq Kc = c[0].field();
        for (const auto& s : c) Kc = unify(Kc, s.field());
        for (auto& s : c) s = s.lifted_to(Kc);
        for (const auto& s : c) {
            auto v = s.val();
            if (v) {
                FE li = Kc.inv(s.coeff(*v));
                for (auto& t : c) t = t.scaled(li);
                break;
            }
        }
        return c;
    }
    throw EnumerationIncomplete("no dependence found among frobenius-power columns");
}

struct Cand {
    PVec x;
    Rat honest;
    long long mult;
};

// Exact division by a series with integer exponents. Returns nullopt when the
// numerator visibly fails divisibility (a genuinely non-integral solution);
// throws PrecisionExhausted when divisibility cannot be decided.
std::optional<PuiseuxSeries> div_puiseux(const PuiseuxSeries& num, const PuiseuxSeries& den) {
    auto dv = den.val();
    if (!dv) throw SingularMatrix("div_puiseux: divisor zero to precision");
    if (!dv->is_integer()) throw Error("div_puiseux: divisor exponents must be integers");
    auto nv = num.val();
    if (nv && *nv < *dv) return std::nullopt;
    Rat nprec = num.prec() ? *num.prec() : RAT_INF;
    if (!nv && nprec <= *dv)
        throw PrecisionExhausted("div_puiseux: divisibility not certified");
    // denominator unit part in dense integer-exponent arithmetic
    const Fq& K = den.field();
    std::int64_t shift = dv->num;
    const std::int64_t big = (std::int64_t)1 << 20;
    std::int64_t navail = nprec == RAT_INF ? big : nprec.floor() - shift + 2;
    std::int64_t davail = !den.prec() ? big : den.prec()->floor() - shift;
    std::int64_t wprec = std::max<std::int64_t>(2, std::min({navail, davail, big}));
    TruncSeries unit(K, wprec);
    for (const auto& [e, c] : den.terms())
        if (e.num - shift < wprec) unit.set_coeff(e.num - shift, c);
    PuiseuxSeries uinv = PuiseuxSeries::from_trunc(unit.inverse(wprec));
    return (num.shifted(Rat(-shift)) * uinv);
}

std::vector<Cand> enum_system(const PMat& A, const PVec& g, const PointConfig& cfg,
                              const Rat& target, int var_first, Fq* session);

// Decoupled recursion: the resultant variable's column is zero off the
// diagonal, so its equation involves no other unknowns and fibers branch
// legitimately (counts multiply).
std::vector<Cand> enum_decoupled(const PMat& A, const PVec& g, const PointConfig& cfg,
                                 const Rat& target, int var, int var_first,
                                 const std::vector<RootApprox>& roots, Fq* session) {
    int k = (int)A.size();
    std::vector<Cand> out;
    for (const auto& r : roots) {
        PMat A2((std::size_t)k - 1, PVec((std::size_t)k - 1));
        PVec g2((std::size_t)k - 1);
        int ii = 0;
        for (int i = 0; i < k; ++i) {
            if (i == var) continue;
            int jj = 0;
            for (int j = 0; j < k; ++j) {
                if (j == var) continue;
                A2[ii][jj] = A[i][j];
                ++jj;
            }
            ++ii;
        }
        int jj = 0;
        for (int j = 0; j < k; ++j) {
            if (j == var) continue;
            g2[jj] = g[j] + r.y * A[var][j];
            ++jj;
        }
        std::vector<Cand> subs = enum_system(A2, g2, cfg, target, var_first, session);
        for (auto& s : subs) {
            PVec x((std::size_t)k);
            int si = 0;
            for (int i = 0; i < k; ++i) x[i] = (i == var) ? r.y : s.x[si++];
            out.push_back({std::move(x), std::min(r.honest_prec, s.honest), r.mult * s.mult});
        }
    }
    return out;
}

std::vector<Cand> enum_system(const PMat& A, const PVec& g, const PointConfig& cfg,
                              const Rat& target, int var_first, Fq* session) {
    int k = (int)A.size();
    if (k == 0) return {{{}, RAT_INF, 1}};
    const Fq& K = A[0][0].field();
    if (k == 1) {
        std::vector<PuiseuxSeries> c{-A[0][0], PuiseuxSeries::monomial(K, Rat(0), K.one())};
        std::vector<Cand> out;
        for (const auto& r : solve_additive_inner(c, g[0], cfg, target, session))
            out.push_back({{r.y}, r.honest_prec, r.mult});
        return out;
    }
    // frobenius powers with inhomogeneous tracking: x^{p^t} = x M_t + g_t
    std::vector<PMat> Mt{PMat()};
    Mt[0].assign(k, PVec(k));
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            Mt[0][i][j] = (i == j) ? PuiseuxSeries::monomial(K, Rat(0), K.one())
                                   : PuiseuxSeries::zero(K);
    std::vector<PVec> gt{PVec(k, PuiseuxSeries::zero(K))};
    for (int t = 1; t <= k; ++t) {
        PMat prev_f = pmat_frob(Mt.back());
        Mt.push_back(pmat_mul(A, prev_f));
        PVec gnew(k);
        for (int j = 0; j < k; ++j) {
            PuiseuxSeries acc = gt.back()[j].frobenius();
            for (int i = 0; i < k; ++i) acc = acc + g[i] * prev_f[i][j];
            gnew[j] = std::move(acc);
        }
        gt.push_back(std::move(gnew));
    }
    // Pick the resultant variable. A full-length relation (K = k) makes the
    // root -> point map bijective: every relation root extends uniquely and
    // the other coordinates come from Cramer formulas (no consistency
    // equation is ever dropped). Prefer the variable whose coefficient
    // matrix W has minimal determinant valuation (least precision loss).
    struct VarPlan {
        int var;
        std::vector<PuiseuxSeries> rel;
        bool full; // K == k
        Rat detval;
    };
    std::vector<VarPlan> plans;
    std::string last_err = "no variable admits a usable relation";
    for (int off = 0; off < k; ++off) {
        int var = (var_first + off) % k;
        std::vector<PVec> cols;
        for (int t = 0; t <= k; ++t) {
            PVec w(k);
            for (int i = 0; i < k; ++i) w[i] = Mt[t][i][var];
            cols.push_back(std::move(w));
        }
        try {
            std::vector<PuiseuxSeries> rel = minimal_relation(cols, k);
            VarPlan plan{var, rel, (int)rel.size() == k + 1, Rat(0)};
            if (plan.full) {
                std::vector<PVec> W(k, PVec(k));
                for (int i = 0; i < k; ++i)
                    for (int t = 0; t < k; ++t) W[i][t] = cols[t][i];
                auto dv = pdet(W).val();
                if (!dv) continue;
                plan.detval = *dv;
            } else {
                // legitimate only when the variable's column is decoupled
                bool decoupled = true;
                for (int i = 0; i < k && decoupled; ++i)
                    if (i != var && A[i][var].val()) decoupled = false;
                if (!decoupled) continue;
            }
            plans.push_back(std::move(plan));
        } catch (const Error& e) {
            last_err = e.what();
        }
    }
    std::stable_sort(plans.begin(), plans.end(), [](const VarPlan& a, const VarPlan& b) {
        if (a.full != b.full) return a.full; // full relations first
        if (a.full && a.detval != b.detval) return a.detval < b.detval;
        return false;
    });
    for (const auto& plan : plans) {
        try {
            int var = plan.var;
            PuiseuxSeries rhs = PuiseuxSeries::zero(K);
            for (std::size_t t = 0; t < plan.rel.size(); ++t)
                rhs = rhs + plan.rel[t] * gt[t][var];
            std::vector<RootApprox> roots =
                solve_additive_inner(plan.rel, rhs, cfg, target, session);
            if (!plan.full) return enum_decoupled(A, g, cfg, target, var, var_first, roots, session);
            // Cramer route: x W = z with W[i][t] = (M_t)_{i,var},
            // z_t = y^{p^t} - (g_t)_var; x_i = det(W with row i -> z) / det W
            std::vector<PVec> W(k, PVec(k));
            for (int i = 0; i < k; ++i)
                for (int t = 0; t < k; ++t) W[i][t] = Mt[t][i][var];
            PuiseuxSeries detW = pdet(W);
            std::vector<Cand> out;
            for (const auto& r : roots) {
                PVec z(k);
                PuiseuxSeries yp = r.y;
                for (int t = 0; t < k; ++t) {
                    z[t] = yp - gt[t][var];
                    if (t + 1 < k) yp = yp.frobenius();
                }
                PVec x(k);
                bool integral = true;
                Rat honest = r.honest_prec;
                for (int i = 0; i < k && integral; ++i) {
                    if (i == var) {
                        x[i] = r.y;
                        continue;
                    }
                    std::vector<PVec> Wi = W;
                    for (int t = 0; t < k; ++t) Wi[i][t] = z[t];
                    auto q = div_puiseux(pdet(Wi), detW);
                    if (!q) {
                        integral = false; // genuinely non-integral root
                        break;
                    }
                    x[i] = std::move(*q);
                    Rat pz = x[i].prec() ? *x[i].prec() : RAT_INF;
                    honest = std::min(honest, pz);
                    auto xv = x[i].val();
                    if (xv && *xv < Rat(0)) {
                        integral = false;
                        break;
                    }
                }
                if (!integral) continue;
                if (honest <= Rat(0))
                    throw PrecisionExhausted("coordinate formulas lost all certified digits");
                out.push_back({std::move(x), honest, r.mult});
            }
            return out;
        } catch (const PrecisionExhausted& e) {
            last_err = e.what();
        } catch (const EnumerationIncomplete& e) {
            last_err = e.what();
        }
    }
    throw EnumerationIncomplete(std::string("enum_system: ") + last_err);
}

int cmp_coords(const PVec& a, const PVec& b) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        int c = PuiseuxSeries::cmp(a[i], b[i]);
        if (c) return c;
    }
    return 0;
}

PointSet assemble(const KisinModule& M, std::vector<Cand> cands, const PMat& A) {
    int h = M.h();
    long p = M.p();
    // certify by back-substitution, discard visible failures
    std::vector<PointRep> keep;
    long long total = 0;
    for (auto& c : cands) {
        bool ok = true;
        for (int j = 0; j < h && ok; ++j) {
            PuiseuxSeries r = c.x[j].frobenius();
            for (int i = 0; i < h; ++i) r = r - c.x[i] * A[i][j];
            if (r.val()) ok = false; // certified nonzero residual
        }
        if (!ok) continue;
        keep.push_back({std::move(c.x), c.honest, c.mult});
        total += c.mult;
    }
    long long ph = 1;
    for (int i = 0; i < h; ++i) ph *= p;
    if (total != ph)
        throw EnumerationIncomplete("certified " + std::to_string(total) + " points, expected " +
                                    std::to_string(ph));
    std::sort(keep.begin(), keep.end(), [](const PointRep& a, const PointRep& b) {
        bool za = a.is_zero_rep(), zb = b.is_zero_rep();
        if (za != zb) return za;
        return cmp_coords(a.x, b.x) < 0;
    });
    PointSet ps;
    ps.pts = std::move(keep);
    ps.total = total;
    ps.resolution = RAT_INF;
    for (const auto& pt : ps.pts) ps.resolution = std::min(ps.resolution, pt.honest_prec);
    return ps;
}

} // namespace

std::vector<TruncSeries> additive_resultant(const KisinModule& M, int var) {
    if (var < 1 || var > M.h()) throw InvalidInput("additive_resultant: bad variable index");
    PMat A = to_pmat(M.A());
    int k = M.h();
    const Fq& K = M.field();
    std::vector<PMat> Mt{PMat()};
    Mt[0].assign(k, PVec(k));
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            Mt[0][i][j] = (i == j) ? PuiseuxSeries::monomial(K, Rat(0), K.one())
                                   : PuiseuxSeries::zero(K);
    for (int t = 1; t <= k; ++t) Mt.push_back(pmat_mul(A, pmat_frob(Mt.back())));
    std::vector<PVec> cols;
    for (int t = 0; t <= k; ++t) {
        PVec w(k);
        for (int i = 0; i < k; ++i) w[i] = Mt[t][i][var - 1];
        cols.push_back(std::move(w));
    }
    std::vector<PuiseuxSeries> rel = minimal_relation(cols, k);
    std::vector<TruncSeries> out;
    for (const auto& s : rel) {
        std::int64_t prec = s.prec() ? s.prec()->floor() : PREC_EXACT;
        TruncSeries t(s.field(), prec);
        for (const auto& [e, c] : s.terms()) {
            if (!e.is_integer()) throw Error("resultant coefficient has non-integer exponent");
            t.set_coeff(e.num, c);
        }
        out.push_back(std::move(t));
    }
    return out;
}

std::vector<RootApprox> solve_additive(const std::vector<PuiseuxSeries>& coeffs,
                                       const PuiseuxSeries& rhs, const PointConfig& cfg) {
    return solve_additive_inner(coeffs, rhs, cfg, cfg.target_prec);
}

PointSet enumerate_points(const KisinModule& M, const PointConfig& cfg) {
    if (M.h() > cfg.max_h)
        throw InvalidInput("enumerate_points: h exceeds configured maximum " +
                           std::to_string(cfg.max_h));
    auto dv = M.A().det().val();
    if (!dv) throw SingularMatrix("enumerate_points: det(A) is zero to precision");
    PMat A = to_pmat(M.A(), cfg.field_hint);
    PVec g(M.h(), PuiseuxSeries::zero(cfg.field_hint ? *cfg.field_hint : M.field()));
    std::string last_err;
    for (int shift = 0; shift < M.h(); ++shift) {
        try {
            Fq session = cfg.field_hint ? *cfg.field_hint : M.field();
            std::vector<Cand> cands = enum_system(A, g, cfg, cfg.target_prec, shift, &session);
            return assemble(M, std::move(cands), A);
        } catch (const EnumerationIncomplete& e) {
            last_err = e.what();
        } catch (const PrecisionExhausted& e) {
            last_err = e.what();
        }
    }
    throw EnumerationIncomplete("all variable orders failed; last: " + last_err);
}

PointSet enumerate_points_triangular(const KisinModule& M, const PointConfig& cfg) {
    int h = M.h();
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < i; ++j)
            if (M.A().at(i, j).val())
                throw InvalidInput("enumerate_points_triangular: A is not upper triangular");
    PMat A = to_pmat(M.A(), cfg.field_hint);
    Fq K = cfg.field_hint ? *cfg.field_hint : M.field();
    Fq session = K;
    std::vector<Cand> cands{{{}, RAT_INF, 1}};
    for (int j = 0; j < h; ++j) {
        std::vector<Cand> next;
        for (const auto& c : cands) {
            // x_j^p - A_jj x_j = sum_{i<j} x_i A_ij
            PuiseuxSeries rhs = PuiseuxSeries::zero(K);
            for (int i = 0; i < j; ++i) rhs = rhs + c.x[i] * A[i][j];
            std::vector<PuiseuxSeries> coeffs{-A[j][j], PuiseuxSeries::monomial(K, Rat(0), K.one())};
            for (const auto& r : solve_additive_inner(coeffs, rhs, cfg, cfg.target_prec, &session)) {
                Cand nc = c;
                nc.x.push_back(r.y);
                nc.honest = std::min(nc.honest, r.honest_prec);
                nc.mult *= r.mult;
                next.push_back(std::move(nc));
            }
        }
        cands = std::move(next);
    }
    return assemble(M, std::move(cands), A);
}

// ------------------------------------------------------------ ramification ---

namespace {

// break of a representative in v_u units; nullopt for the zero point
std::optional<Rat> rep_break_vu(const PointRep& r) {
    std::optional<Rat> minv;
    Rat min_empty_prec = RAT_INF;
    for (const auto& s : r.x) {
        auto v = s.val();
        if (v) {
            if (!minv || *v < *minv) minv = *v;
        } else {
            Rat pz = s.prec() ? *s.prec() : RAT_INF;
            min_empty_prec = std::min(min_empty_prec, pz);
        }
    }
    if (!minv) return std::nullopt; // zero representative
    if (*minv >= min_empty_prec)
        throw PrecisionExhausted("break not certified: empty coordinate with lower precision");
    return minv;
}

} // namespace

RamificationReport lower_breaks(const KisinModule& M, const PointSet& ps) {
    RamificationReport rep;
    rep.e = M.e();
    rep.order = ps.total;
    std::map<Rat, long long> agg;
    for (const auto& r : ps.pts) {
        auto b = rep_break_vu(r);
        if (!b) {
            if (r.mult != 1)
                throw PrecisionExhausted("unresolved cluster at zero: breaks not separated");
            continue;
        }
        agg[*b / Rat(M.e())] += r.mult;
    }
    for (auto& [v, m] : agg) rep.breaks.emplace_back(v, m);
    return rep;
}

std::vector<int> subgroup_at(const KisinModule& M, const PointSet& ps, const Rat& i, bool strict) {
    std::vector<int> idx;
    Rat iu = i * Rat(M.e()); // v_u threshold
    for (int a = 0; a < (int)ps.pts.size(); ++a) {
        const auto& r = ps.pts[a];
        auto b = rep_break_vu(r);
        if (!b) {
            // zero representative: the zero point always belongs; a cluster
            // qualifies only when its resolution settles the comparison
            if (r.mult == 1) {
                idx.push_back(a);
                continue;
            }
            bool ok = strict ? (r.honest_prec > iu) : (r.honest_prec >= iu);
            if (ok) {
                idx.push_back(a);
                continue;
            }
            throw PrecisionExhausted("subgroup query at " + i.str() +
                                     " exceeds cluster resolution");
        }
        if (*b >= r.honest_prec)
            throw PrecisionExhausted("break beyond honest precision");
        bool in = strict ? (*b > iu) : (*b >= iu);
        if (in) idx.push_back(a);
    }
    return idx;
}

long long subgroup_order(const KisinModule& M, const PointSet& ps, const Rat& i, bool strict) {
    long long n = 0;
    for (int a : subgroup_at(M, ps, i, strict)) n += ps.pts[a].mult;
    return n;
}

// ----------------------------------------------------------------- pairing ---

Pairing::Pairing(const KisinModule& M, const PointConfig& cfg) : M_(M), K0_(M.field()) {
    long p = M.p();
    v0_ = Rat(M.e(), p - 1);
    // z^p = cbar0^{-1} u^e z : coefficients (-cbar0^{-1} u^e, 1)
    FE ci = K0_.inv(M.cbar0());
    std::vector<PuiseuxSeries> coeffs{
        -PuiseuxSeries::monomial(K0_, Rat(M.e()), ci),
        PuiseuxSeries::monomial(K0_, Rat(0), K0_.one())};
    auto roots = solve_additive_inner(coeffs, PuiseuxSeries::zero(K0_), cfg, v0_ * Rat(3));
    for (const auto& r : roots) {
        if (r.y.val()) {
            z0 = r.y;
            break; // roots are sorted; first nonzero is the reference
        }
    }
    auto v = z0.val();
    if (!v || *v != v0_) throw Error("pairing reference solution has wrong valuation");
    zeta0_ = z0.coeff(v0_);
}

std::optional<long> Pairing::value(const PointRep& x, const PointRep& y) const {
    if (x.x.size() != y.x.size()) throw InvalidInput("pairing: size mismatch");
    Fq K = unify(x.x[0].field(), y.x[0].field());
    PuiseuxSeries z = PuiseuxSeries::zero(K);
    for (std::size_t i = 0; i < x.x.size(); ++i) z = z + x.x[i] * y.x[i];
    auto v = z.val();
    std::optional<Rat> pz = z.prec();
    if (!v) {
        if (!pz || *pz > v0_) return 0;
        return std::nullopt; // cannot distinguish 0 from a small multiple of z0
    }
    if (*v != v0_) throw PairingInconsistent("pairing value has valuation " + v->str() +
                                             ", expected " + v0_.str() + " or zero");
    // z = t * zeta0 * u^{v0}: read t and check shape
    Fq Kz = z.field();
    FE lead = z.coeff(*v);
    FE zl = Kz.lift(zeta0_, z0.field().level());
    FE t = Kz.mul(lead, Kz.inv(zl));
    long tval = -1;
    for (long c = 1; c < Kz.p(); ++c)
        if (Kz.eq(t, Kz.from_int(c))) {
            tval = c;
            break;
        }
    if (tval < 0) throw PairingInconsistent("pairing value is not an F_p multiple of z0");
    PuiseuxSeries diff = z - z0.lifted_to(Kz).scaled(Kz.from_int(tval));
    if (diff.val()) throw PairingInconsistent("pairing value deviates from t*z0 at " +
                                              diff.val()->str());
    // defining equation of T(S1^vee)
    FE ci = Kz.lift(K0_.inv(M_.cbar0()), K0_.level());
    PuiseuxSeries resid = z.frobenius() - z.shifted(Rat(M_.e())).scaled(ci);
    if (resid.val()) throw PairingInconsistent("pairing value violates z^p = cbar0^{-1} u^e z");
    return tval;
}

std::vector<std::vector<std::optional<long>>> pairing_table(const KisinModule& M,
                                                            const PointSet& ps,
                                                            const PointSet& psd,
                                                            const PointConfig& cfg) {
    Pairing pr(M, cfg);
    std::vector<std::vector<std::optional<long>>> t(ps.pts.size());
    for (std::size_t a = 0; a < ps.pts.size(); ++a) {
        t[a].resize(psd.pts.size());
        for (std::size_t b = 0; b < psd.pts.size(); ++b) t[a][b] = pr.value(ps.pts[a], psd.pts[b]);
    }
    return t;
}

bool pairing_nondegenerate(const PointSet& ps, const PointSet& psd,
                           const std::vector<std::vector<std::optional<long>>>& table) {
    bool undecided = false;
    for (std::size_t a = 0; a < ps.pts.size(); ++a) {
        if (ps.pts[a].is_zero_rep()) continue;
        bool nonzero = false, all_known_zero = true;
        for (std::size_t b = 0; b < psd.pts.size(); ++b) {
            if (table[a][b] && *table[a][b] != 0) nonzero = true;
            if (!table[a][b]) all_known_zero = false;
        }
        if (nonzero) continue;
        if (all_known_zero) return false; // genuinely in the kernel
        undecided = true;
    }
    for (std::size_t b = 0; b < psd.pts.size(); ++b) {
        if (psd.pts[b].is_zero_rep()) continue;
        bool nonzero = false, all_known_zero = true;
        for (std::size_t a = 0; a < ps.pts.size(); ++a) {
            if (table[a][b] && *table[a][b] != 0) nonzero = true;
            if (!table[a][b]) all_known_zero = false;
        }
        if (nonzero) continue;
        if (all_known_zero) return false;
        undecided = true;
    }
    if (undecided)
        throw PrecisionExhausted("pairing nondegeneracy undecided at current resolution");
    return true;
}

std::vector<int> upper_subgroup(const KisinModule& M, const PointSet& ps, const PointSet& psd,
                                const std::vector<std::vector<std::optional<long>>>& table,
                                const Rat& j, bool plus) {
    long p = M.p();
    if (j > Rat(p, p - 1)) throw InvalidInput("upper_subgroup: j exceeds p/(p-1)");
    Rat l = Rat(1, p - 1) - j / Rat(p);
    // S = (G^vee)_{l} (non-strict) for G^{j+}, or (G^vee)_{l+} (strict) for G^j
    std::vector<int> S;
    if (l <= Rat(0)) {
        // every dual point qualifies for v >= l; the strict variant at l < 0 too
        for (int b = 0; b < (int)psd.pts.size(); ++b) S.push_back(b);
        if (l == Rat(0) && !plus) S = subgroup_at(M, psd, l, true);
    } else {
        S = subgroup_at(M, psd, l, !plus);
    }
    std::vector<int> out;
    for (int a = 0; a < (int)ps.pts.size(); ++a) {
        bool orth = true;
        for (int b : S) {
            const auto& v = table[a][b];
            if (!v) throw PrecisionExhausted("upper_subgroup: unresolved pairing entry");
            if (*v != 0) {
                orth = false;
                break;
            }
        }
        if (orth) out.push_back(a);
    }
    return out;
}

std::vector<int> ht_kernel(const KisinModule& M, const AdaptedPresentation& ad, const PointSet& ps,
                           const Rat& b) {
    if (b > Rat(1)) throw InvalidInput("ht_kernel: b must be <= 1");
    int h = M.h(), d = ad.d;
    Rat thr = b * Rat(M.e()); // v_u threshold on the Fil^1 block
    PMat U = to_pmat(ad.U);
    std::vector<int> out;
    for (int a = 0; a < (int)ps.pts.size(); ++a) {
        const auto& r = ps.pts[a];
        bool in = true;
        for (int i = 0; i < h - d && in; ++i) {
            PuiseuxSeries xi = r.x[0] * U[0][i];
            for (int t = 1; t < h; ++t) xi = xi + r.x[t] * U[t][i];
            auto v = xi.val();
            if (v) {
                if (*v < thr) in = false;
            } else {
                Rat pz = xi.prec() ? *xi.prec() : RAT_INF;
                if (pz < thr)
                    throw PrecisionExhausted("ht_kernel: coordinate only known to u^" + pz.str());
            }
        }
        if (in) out.push_back(a);
    }
    return out;
}

std::vector<int> canonical_points(const KisinModule& M, const CanSubResult& res,
                                  const PointSet& ps) {
    PMat L = to_pmat(res.L_basis);
    int h = M.h();
    int r = res.L_basis.cols();
    std::vector<int> out;
    long long total = 0;
    for (int a = 0; a < (int)ps.pts.size(); ++a) {
        const auto& pt = ps.pts[a];
        bool in = true;
        for (int j = 0; j < r && in; ++j) {
            PuiseuxSeries z = pt.x[0] * L[0][j];
            for (int i = 1; i < h; ++i) z = z + pt.x[i] * L[i][j];
            if (z.val()) in = false;
        }
        if (in) {
            out.push_back(a);
            total += pt.mult;
        }
    }
    long long pd = 1;
    for (int i = 0; i < res.ad.d; ++i) pd *= M.p();
    if (total != pd)
        throw Error("canonical subgroup has " + std::to_string(total) + " points, expected " +
                    std::to_string(pd));
    return out;
}

} // namespace cansub
