// Command line front end: module generation, invariants, canonical subgroup,
// duality, point enumeration, ramification reports, whole-theorem verification
// and parameter sweeps. Exit codes: 0 pass, 1 clause failure, 2 engine error,
// 3 invalid input.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "cansub/generate.hpp"
#include "cansub/json_io.hpp"

using namespace cansub;

namespace {

std::string read_input(const std::string& path) {
    if (path == "-") {
        std::ostringstream os;
        os << std::cin.rdbuf();
        return os.str();
    }
    std::ifstream f(path);
    if (!f) throw InvalidInput("cannot open input file: " + path);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

void write_output(const std::string& path, const std::string& data) {
    if (path.empty() || path == "-") {
        std::cout << data << "\n";
        return;
    }
    std::ofstream f(path);
    if (!f) throw InvalidInput("cannot open output file: " + path);
    f << data << "\n";
}

KisinModule load_module(const std::string& path) {
    ordered_json j;
    try {
        j = ordered_json::parse(read_input(path));
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(std::string("bad module JSON: ") + e.what());
    }
    return module_from_json(j);
}

struct Common {
    std::string in = "-";
    std::string out;
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact-arithmetic toolkit for mod-p Kisin modules of E-height <= 1: "
                 "canonical subgroups, ramification and duality verification"};
    app.require_subcommand(1);

    // ---- gen ----
    GenSpec spec;
    std::string w_str = "0";
    std::string gen_out;
    auto* gen = app.add_subcommand("gen", "generate a BT1 module with prescribed invariants");
    gen->add_option("--p", spec.p, "odd prime");
    gen->add_option("--m", spec.m, "residue field degree over F_p");
    gen->add_option("--e", spec.e, "absolute ramification index");
    gen->add_option("--h", spec.h, "height");
    gen->add_option("--d", spec.d, "dimension (0 < d < h)");
    gen->add_option("--w", w_str, "Hodge height, rational like 1/4 (e*w integral)");
    gen->add_option("--seed", spec.seed, "RNG seed");
    gen->add_option("--precision", spec.precision, "working precision in u-digits");
    gen->add_flag("--triangular", spec.triangular_hint, "upper-triangular presentation");
    gen->add_option("-o,--out", gen_out, "output file (default stdout)");

    // ---- module-input subcommands ----
    Common ci, cc, cd, cp, cr, cv;
    auto* inv = app.add_subcommand("invariants", "BT1 check, degree, dimension, Hodge height");
    inv->add_option("module", ci.in, "module JSON ('-' for stdin)");
    inv->add_option("-o,--out", ci.out, "output file");

    auto* can = app.add_subcommand("cansub", "solve for the canonical subgroup");
    can->add_option("module", cc.in, "module JSON ('-' for stdin)");
    can->add_option("-o,--out", cc.out, "output file");

    auto* du = app.add_subcommand("dual", "dual module");
    du->add_option("module", cd.in, "module JSON ('-' for stdin)");
    du->add_option("-o,--out", cd.out, "output file");

    int max_h_points = 3;
    auto* pts = app.add_subcommand("points", "enumerate the p^h tilt-ring points");
    pts->add_option("module", cp.in, "module JSON ('-' for stdin)");
    pts->add_option("-o,--out", cp.out, "output file");
    pts->add_option("--max-h-points", max_h_points, "rank cap for enumeration");

    std::string ram_csv;
    auto* ram = app.add_subcommand("ramify", "lower ramification breaks");
    ram->add_option("module", cr.in, "module JSON ('-' for stdin)");
    ram->add_option("-o,--out", cr.out, "output file");
    ram->add_option("--csv", ram_csv, "also write breaks as CSV (w,break,multiplicity)");
    ram->add_option("--max-h-points", max_h_points, "rank cap for enumeration");

    int grid_points = 5;
    bool with_timings = false;
    auto* ver = app.add_subcommand("verify", "check every applicable theorem clause");
    ver->add_option("module", cv.in, "module JSON ('-' for stdin)");
    ver->add_option("-o,--out", cv.out, "output file");
    ver->add_option("--grid", grid_points, "sample points per clause range");
    ver->add_option("--max-h-points", max_h_points, "rank cap for point-level clauses");
    ver->add_flag("--timings", with_timings, "include timing_ms in the report");

    // ---- sweep ----
    GenSpec sw;
    std::string sweep_csv = "-";
    int sweep_count = 1;
    auto* swp = app.add_subcommand("sweep", "verify across the w grid {0, 1/e, ...}");
    swp->add_option("--p", sw.p, "odd prime");
    swp->add_option("--m", sw.m, "residue field degree");
    swp->add_option("--e", sw.e, "ramification index");
    swp->add_option("--h", sw.h, "height");
    swp->add_option("--d", sw.d, "dimension");
    swp->add_option("--seed", sw.seed, "base RNG seed");
    swp->add_option("--count", sweep_count, "seeds per w value");
    swp->add_option("--precision", sw.precision, "working precision");
    swp->add_option("--csv", sweep_csv, "output CSV path (default stdout)");
    swp->add_option("--max-h-points", max_h_points, "rank cap for point-level clauses");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 3;
    }

    try {
        if (*gen) {
            spec.w = Rat::parse(w_str);
            spec.validate();
            KisinModule M = gen_bt1(spec);
            write_output(gen_out, module_to_json(M).dump());
            return 0;
        }
        if (*inv) {
            KisinModule M = load_module(ci.in);
            write_output(ci.out, invariants_to_json(M).dump());
            return 0;
        }
        if (*can) {
            KisinModule M = load_module(cc.in);
            CanSubResult res = solve_canonical(M);
            write_output(cc.out, cansub_to_json(M, res).dump());
            return 0;
        }
        if (*du) {
            KisinModule M = load_module(cd.in);
            write_output(cd.out, module_to_json(dual(M)).dump());
            return 0;
        }
        if (*pts) {
            KisinModule M = load_module(cp.in);
            PointConfig cfg = PointConfig::defaults(M);
            cfg.max_h = max_h_points;
            PointSet ps = enumerate_points(M, cfg);
            write_output(cp.out, points_to_json(M, ps).dump());
            return 0;
        }
        if (*ram) {
            KisinModule M = load_module(cr.in);
            PointConfig cfg = PointConfig::defaults(M);
            cfg.max_h = max_h_points;
            PointSet ps = enumerate_points(M, cfg);
            write_output(cr.out, ramify_to_json(M, ps).dump());
            if (!ram_csv.empty()) {
                Bt1Check chk = validate_bt1(M);
                Rat w = (chk.ok && chk.d > 0 && chk.d < M.h()) ? hodge_height(M) : Rat(0);
                write_output(ram_csv, breaks_csv(M, lower_breaks(M, ps), w));
            }
            return 0;
        }
        if (*ver) {
            KisinModule M = load_module(cv.in);
            std::string sha = sha256_hex(module_to_json(M).dump());
            VerifyOptions opt;
            opt.grid_points = grid_points;
            opt.max_h_points = max_h_points;
            VerifyReport rep = verify_instance(M, opt);
            write_output(cv.out, report_to_json(rep, sha, with_timings).dump());
            return rep.exit_code();
        }
        if (*swp) {
            std::ostringstream csv;
            csv << "p,m,e,h,d,w,seed,clause,applicable,pass,value,expected\n";
            int worst = 0;
            for (int ew = 0; ew < sw.e; ++ew) {
                for (int c = 0; c < sweep_count; ++c) {
                    GenSpec s = sw;
                    s.w = Rat(ew, sw.e);
                    s.seed = sw.seed + (std::uint64_t)c;
                    std::string prefix;
                    {
                        std::ostringstream os;
                        os << s.p << "," << s.m << "," << s.e << "," << s.h << "," << s.d << ","
                           << s.w.str() << "," << s.seed << ",";
                        prefix = os.str();
                    }
                    try {
                        KisinModule M = gen_bt1(s);
                        VerifyOptions opt;
                        opt.grid_points = grid_points;
                        opt.max_h_points = max_h_points;
                        VerifyReport rep = verify_instance(M, opt);
                        worst = std::max(worst, rep.exit_code());
                        for (const auto& [name, cl] : rep.clauses) {
                            csv << prefix << name << "," << (cl.applicable ? "true" : "false")
                                << "," << (cl.applicable && cl.pass ? "true" : "false") << ","
                                << (cl.errored ? "errored" : cl.value) << "," << cl.expected
                                << "\n";
                        }
                    } catch (const std::exception&) {
                        csv << prefix << "engine,true,false,errored,\n";
                        worst = std::max(worst, 2);
                    }
                }
            }
            write_output(sweep_csv, csv.str());
            return worst;
        }
    } catch (const InvalidInput& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 3;
}
