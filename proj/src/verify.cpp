#include "cansub/verify.hpp"

#include <chrono>
#include <random>
#include <sstream>

namespace cansub {

namespace {

std::vector<Rat> grid(const Rat& lo, const Rat& hi, int n, bool include_lo, bool include_hi) {
    // n points; half-open ranges sample toward the included endpoint
    std::vector<Rat> out;
    Rat step = (hi - lo) / Rat(n);
    for (int k = 0; k <= n; ++k) {
        if (k == 0 && !include_lo) continue;
        if (k == n && !include_hi) continue;
        out.push_back(lo + step * Rat(k));
    }
    // dedupe (possible when lo == hi)
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

bool same_indices(std::vector<int> a, std::vector<int> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    return a == b;
}

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();
    }
};

} // namespace

const ClauseResult* VerifyReport::find(const std::string& name) const {
    for (const auto& [n, c] : clauses)
        if (n == name) return &c;
    return nullptr;
}

int VerifyReport::exit_code() const {
    bool fail = false;
    for (const auto& [n, c] : clauses) {
        if (!c.applicable) continue;
        if (c.errored) return 2;
        if (!c.pass) fail = true;
    }
    return fail ? 1 : 0;
}

VerifyReport verify_instance(const KisinModule& M, const VerifyOptions& opt) {
    VerifyReport rep;
    rep.p = M.p();
    rep.m = M.m();
    rep.e = M.e();
    rep.h = M.h();
    long p = M.p();

    auto run = [&](const std::string& name, bool applicable, auto&& body) {
        ClauseResult c;
        c.applicable = applicable;
        Timer t;
        if (applicable) {
            try {
                body(c);
            } catch (const std::exception& ex) {
                c.errored = true;
                c.pass = false;
                c.details = ex.what();
            }
        }
        rep.timing_ms[name] = t.ms();
        rep.clauses.emplace_back(name, std::move(c));
    };

    Bt1Check chk = validate_bt1(M);
    rep.bt1_ok = chk.ok;
    rep.deg = degree(M);
    if (!chk.ok) {
        ClauseResult c;
        c.applicable = true;
        c.pass = false;
        c.details = "module is not BT1";
        rep.clauses.emplace_back("bt1_shape", std::move(c));
        return rep;
    }
    rep.d = chk.d;
    bool pipeline = chk.d > 0 && chk.d < M.h();
    rep.w = pipeline ? hodge_height(M) : Rat(0);
    Rat w = rep.w;
    bool solve_ok = pipeline && w < Rat(p, p + 1);

    std::optional<CanSubResult> res;
    run("solve_stability", solve_ok, [&](ClauseResult& c) {
        res = solve_canonical(M);
        std::int64_t bound = M.precision() / res->gamma + 2;
        c.pass = res->iterations <= (int)bound && res->residual_val >= M.precision() - M.slack();
        std::ostringstream os;
        os << "iterations=" << res->iterations << " bound=" << bound
           << " residual_val=" << res->residual_val;
        c.details = os.str();
        c.value = std::to_string(res->iterations);
        c.expected = "<=" + std::to_string(bound);
    });
    bool solved = res.has_value();

    run("det_D", solved, [&](ClauseResult& c) {
        auto v = res->D.det().val();
        std::int64_t ew = (Rat(M.e()) * w).num;
        c.pass = v && *v == ew;
        c.details = "v(det D)=" + (v ? std::to_string(*v) : "inf") + " e*w=" + std::to_string(ew);
        c.value = v ? std::to_string(*v) : "inf";
        c.expected = std::to_string(ew);
    });

    run("frobenius_kernel", solved, [&](ClauseResult& c) {
        c.pass = verify_frobenius_kernel(*res, M, Rat(1) - w);
        c.details = "i=" + (Rat(1) - w).str();
    });

    run("degree_quotient", solved, [&](ClauseResult& c) {
        KisinModule L = summand_module(M, *res);
        KisinModule N = quotient_module(M, *res);
        Rat dl = degree(L), dn = degree(N);
        c.pass = dl == w && dn == Rat(chk.d) - w && dl + dn == rep.deg;
        c.details = "deg(L)=" + dl.str() + " deg(N)=" + dn.str();
        c.value = dn.str();
        c.expected = (Rat(chk.d) - w).str();
    });

    run("duality", solve_ok, [&](ClauseResult& c) {
        c.pass = duality_check(M);
        c.details = "annihilator span comparison";
    });

    run("uniqueness", solved, [&](ClauseResult& c) {
        std::mt19937_64 rng(opt.seed);
        SeriesMatrix B0(M.field(), chk.d, M.h() - chk.d);
        for (int i = 0; i < B0.rows(); ++i)
            for (int j = 0; j < B0.cols(); ++j) {
                TruncSeries s(M.field(), PREC_EXACT);
                for (int k = 0; k < M.e(); ++k) {
                    FE cc(M.m());
                    for (auto& x : cc) x = (fp_t)(rng() % (std::uint64_t)p);
                    s.set_coeff(k, cc);
                }
                B0.at(i, j) = s;
            }
        CanSubResult res2 = solve_canonical(M, B0);
        c.pass = res2.B.eq_to_prec(res->B, M.precision() - M.slack());
        c.details = "perturbed start reconverged, iterations=" + std::to_string(res2.iterations);
    });

    // ---- point-level clauses ----
    bool points_ok = M.h() <= opt.max_h_points;
    PointConfig pcfg;
    std::optional<PointSet> ps, psd;
    std::optional<KisinModule> Md;
    std::vector<std::vector<std::optional<long>>> table;
    std::vector<int> C;
    if (points_ok) pcfg = PointConfig::defaults(M);

    run("point_count", points_ok, [&](ClauseResult& c) {
        ps = enumerate_points(M, pcfg);
        long long ph = 1;
        for (int i = 0; i < M.h(); ++i) ph *= p;
        bool closed = true;
        // spot-check additive closure on a deterministic sample of pairs
        int n = (int)ps->pts.size();
        for (int a = 0; a < n && closed; ++a) {
            int b = (a * 7 + 3) % n;
            std::vector<PuiseuxSeries> sum;
            Rat hp = std::min(ps->pts[a].honest_prec, ps->pts[b].honest_prec);
            for (int i = 0; i < M.h(); ++i) sum.push_back(ps->pts[a].x[i] + ps->pts[b].x[i]);
            bool found = false;
            for (const auto& q : ps->pts) {
                bool match = true;
                for (int i = 0; i < M.h() && match; ++i) {
                    PuiseuxSeries diff = (sum[i] - q.x[i]).truncated(hp);
                    if (diff.val()) match = false;
                }
                if (match) {
                    found = true;
                    break;
                }
            }
            closed = found;
        }
        c.pass = ps->total == ph && closed;
        c.details = "count=" + std::to_string(ps->total) + " closure=" + (closed ? "yes" : "no");
        c.value = std::to_string(ps->total);
        c.expected = std::to_string(ph);
    });
    bool have_pts = ps.has_value();

    auto ensure_dual_points = [&]() {
        if (psd) return;
        Md = dual(M);
        psd = enumerate_points(*Md, pcfg);
        table = pairing_table(M, *ps, *psd, pcfg);
    };

    run("pairing_rank", have_pts && solve_ok, [&](ClauseResult& c) {
        ensure_dual_points();
        c.pass = pairing_nondegenerate(*ps, *psd, table);
        c.details = "both pairing kernels trivial";
    });

    run("lowramdeg_bound", have_pts, [&](ClauseResult& c) {
        auto check = [&](const KisinModule& X, const PointSet& xs) {
            RamificationReport rr = lower_breaks(X, xs);
            Rat bound = degree(X) / Rat(p - 1);
            for (const auto& [b, mult] : rr.breaks)
                if (b > bound) return false;
            return true;
        };
        bool ok = check(M, *ps);
        std::string which = "M";
        if (solved) {
            KisinModule L = summand_module(M, *res);
            KisinModule N = quotient_module(M, *res);
            if (L.h() <= opt.max_h_points) {
                if (ok && !check(L, enumerate_points(L, PointConfig::defaults(L)))) {
                    ok = false;
                    which = "L";
                } else
                    which += ",L";
            }
            if (N.h() <= opt.max_h_points) {
                if (ok && !check(N, enumerate_points(N, PointConfig::defaults(N)))) {
                    ok = false;
                    which = "N";
                } else
                    which += ",N";
            }
        }
        c.pass = ok;
        c.details = "checked on " + which;
    });

    bool ram_ok = have_pts && solved && w < Rat(1, 2);
    run("lower_ram", ram_ok, [&](ClauseResult& c) {
        C = canonical_points(M, *res, *ps);
        bool ok = true;
        Rat lo = w / Rat(p - 1), hi = (Rat(1) - w) / Rat(p - 1);
        for (const Rat& b : grid(lo, hi, opt.grid_points, false, true)) {
            if (!same_indices(C, subgroup_at(M, *ps, b, false))) {
                ok = false;
                c.details = "C != G_b at b=" + b.str();
                break;
            }
        }
        c.pass = ok;
        if (ok) c.details = "C = G_b on (" + lo.str() + ", " + hi.str() + "]";
        std::optional<Rat> cbreak;
        for (int a : C) {
            const auto& r = ps->pts[a];
            std::optional<Rat> mv;
            for (const auto& s : r.x) {
                auto v = s.val();
                if (v && (!mv || *v < *mv)) mv = *v;
            }
            if (mv) {
                Rat bb = *mv / Rat(M.e());
                if (!cbreak || bb < *cbreak) cbreak = bb;
            }
        }
        if (cbreak) c.value = cbreak->str();
        c.expected = hi.str();
    });

    run("upper_ram", ram_ok, [&](ClauseResult& c) {
        ensure_dual_points();
        if (C.empty()) C = canonical_points(M, *res, *ps);
        bool ok = true;
        Rat lo = Rat(p) * w / Rat(p - 1), hi = Rat(p) * (Rat(1) - w) / Rat(p - 1);
        for (const Rat& j : grid(lo, hi, opt.grid_points, true, false)) {
            if (!same_indices(C, upper_subgroup(M, *ps, *psd, table, j, true))) {
                ok = false;
                c.details = "C != G^{j+} at j=" + j.str();
                break;
            }
        }
        c.pass = ok;
        if (ok) c.details = "C = G^{j+} on [" + lo.str() + ", " + hi.str() + ")";
    });

    run("ht_kernel", have_pts && solved && w < Rat(p - 1, p), [&](ClauseResult& c) {
        if (C.empty()) C = canonical_points(M, *res, *ps);
        bool ok = true;
        Rat lo = w / Rat(p - 1), hi = Rat(1) - w;
        for (const Rat& b : grid(lo, hi, opt.grid_points, false, true)) {
            if (!same_indices(C, ht_kernel(M, res->ad, *ps, b))) {
                ok = false;
                c.details = "kernel(HT_b) != C at b=" + b.str();
                break;
            }
        }
        c.pass = ok;
        if (ok) c.details = "kernel(HT_b) = C on (" + lo.str() + ", " + hi.str() + "]";
    });

    return rep;
}

} // namespace cansub
