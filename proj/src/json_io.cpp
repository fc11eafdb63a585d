#include "cansub/json_io.hpp"

#include <array>
#include <cstring>
#include <sstream>

namespace cansub {

// ------------------------------------------------------------------ sha256 ---

namespace {

struct Sha256 {
    std::array<std::uint32_t, 8> h = {0x6a09e667u, 0xbb67ae85u, 0x3c6ef372u, 0xa54ff53au,
                                      0x510e527fu, 0x9b05688cu, 0x1f83d9abu, 0x5be0cd19u};
    static constexpr std::array<std::uint32_t, 64> k = {
        0x428a2f98u, 0x71374491u, 0xb5c0fbcfu, 0xe9b5dba5u, 0x3956c25bu, 0x59f111f1u, 0x923f82a4u,
        0xab1c5ed5u, 0xd807aa98u, 0x12835b01u, 0x243185beu, 0x550c7dc3u, 0x72be5d74u, 0x80deb1feu,
        0x9bdc06a7u, 0xc19bf174u, 0xe49b69c1u, 0xefbe4786u, 0x0fc19dc6u, 0x240ca1ccu, 0x2de92c6fu,
        0x4a7484aau, 0x5cb0a9dcu, 0x76f988dau, 0x983e5152u, 0xa831c66du, 0xb00327c8u, 0xbf597fc7u,
        0xc6e00bf3u, 0xd5a79147u, 0x06ca6351u, 0x14292967u, 0x27b70a85u, 0x2e1b2138u, 0x4d2c6dfcu,
        0x53380d13u, 0x650a7354u, 0x766a0abbu, 0x81c2c92eu, 0x92722c85u, 0xa2bfe8a1u, 0xa81a664bu,
        0xc24b8b70u, 0xc76c51a3u, 0xd192e819u, 0xd6990624u, 0xf40e3585u, 0x106aa070u, 0x19a4c116u,
        0x1e376c08u, 0x2748774cu, 0x34b0bcb5u, 0x391c0cb3u, 0x4ed8aa4au, 0x5b9cca4fu, 0x682e6ff3u,
        0x748f82eeu, 0x78a5636fu, 0x84c87814u, 0x8cc70208u, 0x90befffau, 0xa4506cebu, 0xbef9a3f7u,
        0xc67178f2u};
    static std::uint32_t rotr(std::uint32_t x, int n) { return (x >> n) | (x << (32 - n)); }

    void block(const unsigned char* pdata) {
        std::uint32_t w[64];
        for (int i = 0; i < 16; ++i)
            w[i] = (std::uint32_t)pdata[4 * i] << 24 | (std::uint32_t)pdata[4 * i + 1] << 16 |
                   (std::uint32_t)pdata[4 * i + 2] << 8 | (std::uint32_t)pdata[4 * i + 3];
        for (int i = 16; i < 64; ++i) {
            std::uint32_t s0 = rotr(w[i - 15], 7) ^ rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
            std::uint32_t s1 = rotr(w[i - 2], 17) ^ rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
            w[i] = w[i - 16] + s0 + w[i - 7] + s1;
        }
        auto [a, b, c, d, e, f, g, hh] = h;
        for (int i = 0; i < 64; ++i) {
            std::uint32_t S1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
            std::uint32_t ch = (e & f) ^ (~e & g);
            std::uint32_t t1 = hh + S1 + ch + k[i] + w[i];
            std::uint32_t S0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
            std::uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
            std::uint32_t t2 = S0 + maj;
            hh = g;
            g = f;
            f = e;
            e = d + t1;
            d = c;
            c = b;
            b = a;
            a = t1 + t2;
        }
        h[0] += a;
        h[1] += b;
        h[2] += c;
        h[3] += d;
        h[4] += e;
        h[5] += f;
        h[6] += g;
        h[7] += hh;
    }
};
constexpr std::array<std::uint32_t, 64> Sha256::k;

} // namespace

std::string sha256_hex(const std::string& data) {
    Sha256 s;
    std::uint64_t bitlen = (std::uint64_t)data.size() * 8;
    std::string padded = data;
    padded.push_back((char)0x80);
    while (padded.size() % 64 != 56) padded.push_back((char)0);
    for (int i = 7; i >= 0; --i) padded.push_back((char)((bitlen >> (8 * i)) & 0xff));
    for (std::size_t off = 0; off < padded.size(); off += 64)
        s.block(reinterpret_cast<const unsigned char*>(padded.data() + off));
    std::ostringstream os;
    for (auto x : s.h) {
        for (int i = 7; i >= 0; --i) os << "0123456789abcdef"[(x >> (4 * i)) & 0xf];
    }
    return os.str();
}

// ----------------------------------------------------------------- schemas ---

namespace {

ordered_json fe_to_json(const FE& c) {
    ordered_json a = ordered_json::array();
    for (auto x : c) a.push_back((long)x);
    return a;
}

FE fe_from_json(const ordered_json& j, int m, long p) {
    if (!j.is_array() || (int)j.size() != m) throw InvalidInput("coefficient must be an array of m ints");
    FE c(m);
    for (int i = 0; i < m; ++i) {
        long v = j[i].get<long>();
        if (v < 0 || v >= p) throw InvalidInput("coefficient coordinate out of [0, p)");
        c[i] = (fp_t)v;
    }
    return c;
}

} // namespace

ordered_json series_to_json(const TruncSeries& s) {
    ordered_json a = ordered_json::array();
    for (std::int64_t i = 0; i < s.len(); ++i) {
        FE c = s.coeff(i);
        if (s.field().is_zero(c)) continue;
        a.push_back(ordered_json::array({i, fe_to_json(c)}));
    }
    return a;
}

ordered_json puiseux_to_json(const PuiseuxSeries& s) {
    ordered_json o;
    o["level"] = s.field().level();
    o["field_degree"] = s.field().degree();
    if (s.prec()) o["prec"] = s.prec()->str();
    ordered_json terms = ordered_json::array();
    for (const auto& [e, c] : s.terms())
        terms.push_back(ordered_json::array({e.str(), fe_to_json(c)}));
    o["terms"] = terms;
    return o;
}

ordered_json module_to_json(const KisinModule& M) {
    ordered_json j;
    j["p"] = M.p();
    j["field_degree"] = M.m();
    ordered_json fp = ordered_json::array();
    for (auto c : M.field().tower().level(0).minpoly) fp.push_back((long)c);
    j["field_poly"] = fp;
    j["e"] = M.e();
    j["cbar0"] = fe_to_json(M.cbar0());
    j["h"] = M.h();
    j["precision"] = M.precision();
    ordered_json rows = ordered_json::array();
    for (int i = 0; i < M.h(); ++i) {
        ordered_json row = ordered_json::array();
        for (int jj = 0; jj < M.h(); ++jj) row.push_back(series_to_json(M.A().at(i, jj)));
        rows.push_back(row);
    }
    j["A"] = rows;
    return j;
}

KisinModule module_from_json(const ordered_json& j) {
    for (const char* key : {"p", "field_degree", "field_poly", "e", "cbar0", "h", "precision", "A"})
        if (!j.contains(key)) throw InvalidInput(std::string("module JSON missing key '") + key + "'");
    long p = j["p"].get<long>();
    int m = j["field_degree"].get<int>();
    std::vector<fp_t> poly;
    for (const auto& c : j["field_poly"]) {
        long v = c.get<long>();
        if (v < 0 || v >= p) throw InvalidInput("field_poly coefficient out of [0, p)");
        poly.push_back((fp_t)v);
    }
    if ((int)poly.size() != m + 1) throw InvalidInput("field_poly must have length field_degree + 1");
    FieldTower tw(p, poly);
    Fq K(tw, 0);
    int e = j["e"].get<int>();
    int h = j["h"].get<int>();
    std::int64_t prec = j["precision"].get<std::int64_t>();
    FE cbar0 = fe_from_json(j["cbar0"], m, p);
    if (!j["A"].is_array() || (int)j["A"].size() != h) throw InvalidInput("A must have h rows");
    SeriesMatrix A(K, h, h, prec);
    for (int i = 0; i < h; ++i) {
        const auto& row = j["A"][i];
        if (!row.is_array() || (int)row.size() != h) throw InvalidInput("A row has wrong length");
        for (int jj = 0; jj < h; ++jj) {
            TruncSeries s(K, prec);
            for (const auto& term : row[jj]) {
                if (!term.is_array() || term.size() != 2) throw InvalidInput("bad series term");
                std::int64_t exp = term[0].get<std::int64_t>();
                s.set_coeff(exp, fe_from_json(term[1], m, p));
            }
            A.at(i, jj) = s;
        }
    }
    return KisinModule(K, e, cbar0, A, prec);
}

ordered_json invariants_to_json(const KisinModule& M) {
    ordered_json j;
    j["p"] = M.p();
    j["m"] = M.m();
    j["e"] = M.e();
    j["h"] = M.h();
    Bt1Check chk = validate_bt1(M);
    j["bt1"] = chk.ok;
    ordered_json dv = ordered_json::array();
    for (auto d : chk.divisors) dv.push_back(d);
    j["elementary_divisor_valuations"] = dv;
    j["degree"] = degree(M).str();
    if (chk.ok && chk.d > 0 && chk.d < M.h()) {
        j["d"] = chk.d;
        j["hodge_height"] = hodge_height(M).str();
    } else if (chk.ok) {
        j["d"] = chk.d;
    }
    return j;
}

namespace {
ordered_json matrix_to_json(const SeriesMatrix& M) {
    ordered_json rows = ordered_json::array();
    for (int i = 0; i < M.rows(); ++i) {
        ordered_json row = ordered_json::array();
        for (int j = 0; j < M.cols(); ++j) row.push_back(series_to_json(M.at(i, j)));
        rows.push_back(row);
    }
    return rows;
}
} // namespace

ordered_json cansub_to_json(const KisinModule& M, const CanSubResult& res) {
    ordered_json j;
    j["w"] = res.w.str();
    j["gamma"] = res.gamma;
    j["iterations"] = res.iterations;
    j["residual_val"] = res.residual_val;
    j["B"] = matrix_to_json(res.B.truncated(M.precision()));
    j["D"] = matrix_to_json(res.D);
    j["L_basis"] = matrix_to_json(res.L_basis);
    j["N_matrix"] = matrix_to_json(res.N_matrix);
    return j;
}

ordered_json points_to_json(const KisinModule& M, const PointSet& ps) {
    ordered_json j;
    j["count"] = ps.total;
    j["resolution"] = ps.resolution.str();
    // tower levels used by coordinates
    ordered_json tower = ordered_json::array();
    const FieldTower* deepest = &M.field().tower();
    for (const auto& r : ps.pts)
        for (const auto& s : r.x)
            if (s.field().tower().num_levels() > deepest->num_levels())
                deepest = &s.field().tower();
    for (int l = 0; l < deepest->num_levels(); ++l) {
        ordered_json lv;
        lv["degree"] = deepest->level(l).degree;
        ordered_json mp = ordered_json::array();
        for (auto c : deepest->level(l).minpoly) mp.push_back((long)c);
        lv["poly"] = mp;
        tower.push_back(lv);
    }
    j["tower"] = tower;
    ordered_json pts = ordered_json::array();
    for (const auto& r : ps.pts) {
        ordered_json o;
        o["mult"] = r.mult;
        o["prec"] = r.honest_prec.str();
        ordered_json coords = ordered_json::array();
        for (const auto& s : r.x) coords.push_back(puiseux_to_json(s));
        o["coords"] = coords;
        pts.push_back(o);
    }
    j["points"] = pts;
    return j;
}

ordered_json ramify_to_json(const KisinModule& M, const PointSet& ps) {
    RamificationReport rep = lower_breaks(M, ps);
    ordered_json j;
    j["order"] = rep.order;
    j["e"] = rep.e;
    ordered_json br = ordered_json::array();
    for (const auto& [v, mult] : rep.breaks)
        br.push_back(ordered_json::array({v.str(), mult}));
    j["breaks"] = br;
    return j;
}

std::string breaks_csv(const KisinModule& M, const RamificationReport& rep, const Rat& w) {
    std::ostringstream os;
    os << "w,break,multiplicity\n";
    for (const auto& [v, mult] : rep.breaks) os << w.str() << "," << v.str() << "," << mult << "\n";
    (void)M;
    return os.str();
}

ordered_json report_to_json(const VerifyReport& rep, const std::string& module_sha256,
                            bool with_timings) {
    ordered_json j;
    j["module_sha256"] = module_sha256;
    j["p"] = rep.p;
    j["m"] = rep.m;
    j["e"] = rep.e;
    j["h"] = rep.h;
    j["bt1"] = rep.bt1_ok;
    if (rep.d >= 0) j["d"] = rep.d;
    j["degree"] = rep.deg.str();
    j["w"] = rep.w.str();
    ordered_json cl;
    for (const auto& [name, c] : rep.clauses) {
        ordered_json o;
        o["applicable"] = c.applicable;
        o["pass"] = c.applicable ? c.pass : false;
        if (c.errored) o["errored"] = true;
        o["details"] = c.details;
        if (!c.value.empty()) o["value"] = c.value;
        if (!c.expected.empty()) o["expected"] = c.expected;
        cl[name] = o;
    }
    j["clauses"] = cl;
    j["exit_code"] = rep.exit_code();
    if (with_timings) {
        ordered_json t;
        for (const auto& [k, v] : rep.timing_ms) t[k] = v;
        j["timing_ms"] = t;
    }
    return j;
}

} // namespace cansub
