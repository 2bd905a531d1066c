// Command line front end: reads product or sequence specs as JSON, runs the
// requested computation, and writes a deterministic report (17 significant
// digits, sorted keys) so reruns are byte-identical.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <blaschke/bergman.hpp>
#include <blaschke/continuation.hpp>
#include <blaschke/io.hpp>
#include <blaschke/monodromy.hpp>
#include <blaschke/thin.hpp>

namespace bl = blaschke;

namespace {

constexpr double tau = 6.283185307179586476925287;

std::string csv_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

bl::cplx parse_cplx_arg(const std::string& s) {
    const auto comma = s.find(',');
    char* endp = nullptr;
    const std::string re_s = comma == std::string::npos ? s : s.substr(0, comma);
    const double re = std::strtod(re_s.c_str(), &endp);
    if (endp == re_s.c_str() || *endp != '\0')
        throw bl::spec_error("cannot parse complex value: " + s);
    double im = 0.0;
    if (comma != std::string::npos) {
        const std::string im_s = s.substr(comma + 1);
        im = std::strtod(im_s.c_str(), &endp);
        if (endp == im_s.c_str() || *endp != '\0')
            throw bl::spec_error("cannot parse complex value: " + s);
    }
    return {re, im};
}

struct Options {
    std::string input;
    std::string output;
    std::string track_dump;
    std::vector<std::string> exempt;
    std::string rule = "factorial";
    std::string pool = "factorial";
    long seed = 0;
    int stages = 5;
    std::size_t count = 0;
    std::size_t truncation = 0;
    double ratio_c = 0.5;
    double start_decrement = 0.5;
    double t = 0.5;
    int samples = 0;
    int radial = 24;
    int test_degree = 6;
};

bl::ZeroSequence sequence_from_options(const Options& opt, const bl::Tolerances& tol,
                                       std::size_t default_count, const std::string& rule) {
    if (!opt.input.empty())
        return bl::generate_thin_sequence(bl::read_sequence_spec(bl::load_json(opt.input)), tol);
    bl::ThinSpec spec;
    spec.rule = rule;
    spec.N = opt.count > 0 ? opt.count : default_count;
    if (spec.N == 0) throw bl::spec_error("need --count or --input");
    spec.ratio_c = opt.ratio_c;
    spec.start_decrement = opt.start_decrement;
    return bl::generate_thin_sequence(spec, tol);
}

void run_analyze(const Options& opt, const bl::Tolerances& tol) {
    const bl::FiniteBlaschke B = bl::read_product(bl::load_json(opt.input), tol);
    std::vector<bl::cplx> exempt;
    for (const std::string& s : opt.exempt) exempt.push_back(parse_cplx_arg(s));
    bl::json rep = bl::report_analyze(B, exempt, tol);
    rep["seed"] = opt.seed;
    bl::write_text(opt.output, bl::json_dump(rep));

    if (opt.track_dump.empty()) return;
    std::string csv = "t,re,im,dmod\n";
    const bl::CriticalData cd = bl::critical_data(B, tol);
    if (B.degree() >= 2 && !cd.exceptional.empty()) {
        const bl::cplx w0 = bl::pick_basepoint(B, cd, tol);
        const bl::LoopSet ls = bl::generator_loops(cd.exceptional, w0, tol);
        const bl::Fiber base = bl::fiber(B, w0, tol);
        for (const bl::PlanePath& loop : ls.loops) {
            const std::vector<bl::FiberTrack> tracks = bl::lift_fiber(B, loop, base.points, tol);
            for (const bl::FiberTrack& tr : tracks)
                for (const bl::TrackSample& s : tr.samples)
                    csv += csv_num(s.t) + "," + csv_num(s.z.real()) + "," +
                           csv_num(s.z.imag()) + "," + csv_num(s.dmod) + "\n";
        }
    }
    bl::write_text(opt.track_dump, csv);
}

void run_glue(const Options& opt, const bl::Tolerances& tol) {
    const bl::FiniteBlaschke B = bl::read_product(bl::load_json(opt.input), tol);
    bl::json rep = bl::report_glue(B, tol);
    rep["seed"] = opt.seed;
    bl::write_text(opt.output, bl::json_dump(rep));
}

void run_thin_gen(const Options& opt, const bl::Tolerances& tol) {
    const bl::ZeroSequence seq = sequence_from_options(opt, tol, 0, opt.rule);
    bl::json rep{{"seed", opt.seed}, {"sequence", bl::sequence_json(seq)}};
    if (opt.truncation > 0) {
        rep["thinness"] = bl::thinness_json(bl::thinness_profile(seq, opt.truncation, tol));
        bool representable = opt.truncation <= seq.points.size();
        for (std::size_t k = 0; representable && k < opt.truncation; ++k)
            if (seq.points[k].decrement < tol.interior_margin) representable = false;
        if (representable)
            rep["product"] = bl::product_json(seq.to_product(opt.truncation, tol));
    }
    bl::write_text(opt.output, bl::json_dump(rep));
}

void run_thin_extract(const Options& opt, const bl::Tolerances& tol) {
    if (opt.input.empty()) throw bl::spec_error("thin-extract needs --input");
    const bl::ZeroSequence seq =
        bl::generate_thin_sequence(bl::read_sequence_spec(bl::load_json(opt.input)), tol);
    const std::size_t K = opt.count > 0 ? opt.count : 20;
    bl::json rep = bl::report_extraction(bl::extract_thin_subsequence(seq, K, tol));
    rep["seed"] = opt.seed;
    bl::write_text(opt.output, bl::json_dump(rep));
}

void run_thin_construct(const Options& opt, const bl::Tolerances& tol) {
    const std::size_t fallback = opt.pool == "factorial" ? 170 : 400;
    const bl::ZeroSequence pool = sequence_from_options(opt, tol, fallback, opt.pool);
    const bl::ConstructionResult cr = bl::construct_irreducible_stages(pool, opt.stages, tol);
    bl::json rep = bl::report_construction(cr, tol);
    rep["seed"] = opt.seed;
    bl::write_text(opt.output, bl::json_dump(rep));
}

void run_bergman_check(const Options& opt, const bl::Tolerances& tol) {
    const bl::FiniteBlaschke B = bl::read_product(bl::load_json(opt.input), tol);
    bl::BranchAtlas atlas(B, tol);
    const int q = atlas.report().q;
    const int angular = opt.samples > 0 ? opt.samples : 96;
    const bl::DiskQuadrature quad = bl::DiskQuadrature::build(opt.radial, angular);

    std::vector<bl::field_fn> mono;
    std::vector<double> norm;
    for (int n = 0; n <= opt.test_degree; ++n) {
        mono.push_back([n](bl::cplx z) { return std::pow(z, n); });
        norm.push_back(std::sqrt(1.0 / (n + 1.0)));
    }

    const std::vector<bl::cplx> lam_cands = {
        {0.31, 0.12},  {-0.22, 0.27}, {0.05, -0.36}, {0.41, -0.07}, {-0.33, -0.18},
        {0.17, 0.33},  {-0.08, -0.41}, {0.26, -0.24}, {-0.39, 0.06}, {0.12, 0.44}};
    const std::vector<bl::cplx> z_cands = {
        {0.15, -0.3},  {-0.4, 0.05},  {0.3, 0.3},    {-0.1, -0.45}, {0.45, 0.1},
        {-0.27, 0.33}, {0.02, 0.49},  {0.37, -0.21}, {-0.44, -0.12}, {0.2, 0.05}};
    std::vector<bl::cplx> lams, zs;
    for (const bl::cplx& c : lam_cands)
        if (lams.size() < 2 && atlas.usable(c)) lams.push_back(c);
    for (const bl::cplx& c : z_cands)
        if (zs.size() < 3 && atlas.usable(c)) zs.push_back(c);
    if (lams.empty() || zs.empty())
        throw bl::numeric_error("quadrature_coverage", "no usable kernel sample points");

    bool identity_ok = true;
    for (const bl::cplx& z : zs) {
        const bl::cplx diff = atlas.apply(0, mono[2], z) - z * z;
        if (std::abs(diff) > 1e-10) identity_ok = false;
    }

    double max_forfeit = 0.0;
    bl::json adjoint = bl::json::array();
    bl::json kernels = bl::json::array();
    bl::json derivs = bl::json::array();
    for (int cls = 0; cls < q; ++cls) {
        double worst_adj = 0.0;
        for (std::size_t m = 0; m < mono.size(); ++m)
            for (std::size_t n = 0; n < mono.size(); ++n) {
                const bl::AdjointCheck ck =
                    bl::adjoint_residual(atlas, cls, mono[m], mono[n], quad, tol);
                worst_adj = std::max(worst_adj, ck.residual / (norm[m] * norm[n]));
                max_forfeit = std::max(max_forfeit, ck.forfeited_weight);
            }
        adjoint.push_back(bl::report_real(worst_adj));

        double worst_ker = 0.0;
        for (const bl::cplx& lam : lams)
            for (const bl::cplx& z : zs)
                worst_ker = std::max(worst_ker,
                                     bl::kernel_identity_residual(atlas, cls, lam, z, tol).residual);
        kernels.push_back(bl::report_real(worst_ker));

        double worst_der = 0.0;
        int used = 0;
        for (const bl::cplx& lam : lams) {
            try {
                worst_der = std::max(worst_der,
                                     bl::derivative_identity_residual(atlas, cls, lam, tol));
                ++used;
            } catch (const bl::numeric_error& e) {
                if (std::string(e.gate()) != "route_blocked") throw;
            }
        }
        if (used == 0)
            throw bl::numeric_error("quadrature_coverage",
                                    "every derivative sample point was blocked");
        derivs.push_back(bl::report_real(worst_der));
    }

    bl::json sym;
    const std::optional<bl::RotationStructure> rot = bl::detect_rotational_structure(B, tol);
    if (rot && rot->n >= 2) {
        const bl::cplx mu = rot->mu;
        const auto make_rho = [&](int n_try) {
            const bl::cplx xi = std::exp(bl::cplx(0.0, tau / n_try));
            return bl::auto_map([mu, xi, &tol](bl::cplx z) {
                const bl::MoebiusEval a = bl::moebius_apply(mu, z, tol);
                const bl::MoebiusEval b = bl::moebius_apply(mu, xi * a.value, tol);
                return bl::MoebiusEval{b.value, b.derivative * xi * a.derivative};
            });
        };
        // the detected order fixes the zero multiset; composition can still
        // change the constant, so drop to the largest order that fixes B itself
        int n_use = 0;
        for (int n_try = rot->n; n_try >= 2 && n_use == 0; --n_try) {
            const bl::auto_map rho = make_rho(n_try);
            double pre = 0.0;
            for (int k = 0; k < 16; ++k) {
                const bl::cplx z = 0.8 * std::exp(bl::cplx(0.0, tau * k / 16.0));
                pre = std::max(pre, std::abs(B.eval(rho(z).value, tol) - B.eval(z, tol)));
            }
            if (pre <= tol.symmetry_check) n_use = n_try;
        }
        if (n_use >= 2) {
            const bl::SymmetryCheck sc =
                bl::symmetry_unitary_check(B, make_rho(n_use), mono[1], mono[2], quad, tol);
            sym = bl::json{{"applicable", true},
                           {"found", true},
                           {"inner_fg", bl::carr(sc.inner_fg)},
                           {"inner_transformed", bl::carr(sc.inner_transformed)},
                           {"mu", bl::carr(mu)},
                           {"n", n_use},
                           {"precondition_residual", bl::report_real(sc.precondition_residual)},
                           {"residual", bl::report_real(sc.residual)}};
        } else {
            sym = bl::json{{"applicable", false},
                           {"found", true},
                           {"mu", bl::carr(mu)},
                           {"n", rot->n}};
        }
    } else {
        sym = bl::json{{"found", false}};
    }

    const bl::json rep{{"adjoint_residuals", adjoint},
                       {"derivative_identity_residuals", derivs},
                       {"forfeited_weight", bl::report_real(max_forfeit)},
                       {"identity_class_ok", identity_ok},
                       {"kernel_identity_residuals", kernels},
                       {"q", q},
                       {"seed", opt.seed},
                       {"symmetry", sym}};
    bl::write_text(opt.output, bl::json_dump(rep));
}

void run_levelset(const Options& opt, const bl::Tolerances& tol) {
    const bl::FiniteBlaschke B = bl::read_product(bl::load_json(opt.input), tol);
    if (!(opt.t > 0.0 && opt.t < 1.0)) throw bl::spec_error("level radius must be in (0,1)");
    const int S = opt.samples > 0 ? opt.samples : 256;
    if (S < 2) throw bl::spec_error("levelset needs at least two samples");

    const bl::Fiber f0 = bl::fiber(B, bl::cplx(opt.t, 0.0), tol);
    const std::size_t n = f0.points.size();
    std::vector<bl::cplx> cur = f0.points;
    std::vector<std::vector<bl::cplx>> rows(n);
    for (std::size_t b = 0; b < n; ++b) rows[b].push_back(cur[b]);
    for (int s = 1; s < S; ++s) {
        const bl::PlanePath arc = bl::PlanePath::circle(
            bl::cplx(0.0, 0.0), opt.t, tau * (s - 1) / S, tau * s / S);
        const std::vector<bl::FiberTrack> tracks = bl::lift_fiber(B, arc, cur, tol);
        for (std::size_t b = 0; b < n; ++b) {
            cur[b] = tracks[b].end;
            rows[b].push_back(cur[b]);
        }
    }
    std::string csv = "branch_id,t_param,re,im\n";
    for (std::size_t b = 0; b < n; ++b)
        for (int s = 0; s < S; ++s)
            csv += std::to_string(b) + "," + csv_num(static_cast<double>(s) / S) + "," +
                   csv_num(rows[b][static_cast<std::size_t>(s)].real()) + "," +
                   csv_num(rows[b][static_cast<std::size_t>(s)].imag()) + "\n";
    bl::write_text(opt.output, csv);
}

} // namespace

int main(int argc, char** argv) {
    bl::Tolerances tol = bl::Tolerances::defaults();
    std::vector<std::string> args;
    try {
        for (int i = 1; i < argc; ++i) {
            const std::string a = argv[i];
            if (a.rfind("--tol.", 0) == 0) {
                const std::string rest = a.substr(6);
                const auto eq = rest.find('=');
                std::string name, val;
                if (eq == std::string::npos) {
                    name = rest;
                    if (i + 1 >= argc) throw bl::spec_error("--tol." + name + " needs a value");
                    val = argv[++i];
                } else {
                    name = rest.substr(0, eq);
                    val = rest.substr(eq + 1);
                }
                char* endp = nullptr;
                const double x = std::strtod(val.c_str(), &endp);
                if (endp == val.c_str() || *endp != '\0')
                    throw bl::spec_error("cannot parse tolerance value: " + val);
                tol.set(name, x);
            } else {
                args.push_back(a);
            }
        }
    } catch (const bl::spec_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }

    Options opt;
    CLI::App app{"geometric invariants of finite Blaschke products"};
    app.require_subcommand(1);
    app.footer("Tolerances are overridden with --tol.<name>=<value>.");

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--output", opt.output, "report destination ('-' or empty for stdout)");
        sub->add_option("--seed", opt.seed, "seed recorded in the report");
    };

    CLI::App* analyze = app.add_subcommand(
        "analyze", "critical data, monodromy, components, and gluing of a product");
    analyze->add_option("--input", opt.input, "product JSON")->required();
    analyze->add_option("--exempt", opt.exempt,
                        "critical value 're,im' the regularity check may ignore");
    analyze->add_option("--track-dump", opt.track_dump,
                        "write generator loop lifts as CSV t,re,im,dmod");
    add_common(analyze);

    CLI::App* glue = app.add_subcommand("glue", "sheet identifications over critical values");
    glue->add_option("--input", opt.input, "product JSON")->required();
    add_common(glue);

    CLI::App* thin_gen = app.add_subcommand("thin-gen", "generate a zero sequence");
    thin_gen->add_option("--input", opt.input, "sequence spec JSON (overrides rule flags)");
    thin_gen->add_option("--rule", opt.rule, "factorial, ratio, or explicit");
    thin_gen->add_option("--count", opt.count, "sequence length");
    thin_gen->add_option("--ratio-c", opt.ratio_c, "decrement ratio for the ratio rule");
    thin_gen->add_option("--start", opt.start_decrement, "first decrement for the ratio rule");
    thin_gen->add_option("--truncation", opt.truncation,
                         "also profile (and build, when representable) the first N points");
    add_common(thin_gen);

    CLI::App* thin_extract =
        app.add_subcommand("thin-extract", "greedy well-separated subsequence with certificates");
    thin_extract->add_option("--input", opt.input, "sequence spec JSON")->required();
    thin_extract->add_option("--count", opt.count, "target subsequence length (default 20)");
    add_common(thin_extract);

    CLI::App* thin_construct =
        app.add_subcommand("thin-construct", "stagewise irreducible product from a zero pool");
    thin_construct->add_option("--input", opt.input, "pool spec JSON (overrides --pool)");
    thin_construct->add_option("--pool", opt.pool, "pool rule: factorial or ratio");
    thin_construct->add_option("--stages", opt.stages, "number of stages");
    thin_construct->add_option("--count", opt.count, "pool length");
    thin_construct->add_option("--ratio-c", opt.ratio_c, "decrement ratio for the ratio pool");
    thin_construct->add_option("--start", opt.start_decrement, "first decrement for the ratio pool");
    add_common(thin_construct);

    CLI::App* bergman = app.add_subcommand(
        "bergman-check", "composition operator identities on the Bergman space");
    bergman->add_option("--input", opt.input, "product JSON")->required();
    bergman->add_option("--radial", opt.radial, "radial quadrature order");
    bergman->add_option("--samples", opt.samples, "angular quadrature count (default 96)");
    bergman->add_option("--degree", opt.test_degree, "monomial test space degree");
    add_common(bergman);

    CLI::App* levelset = app.add_subcommand("levelset", "trace |B| = t as CSV polylines");
    levelset->add_option("--input", opt.input, "product JSON")->required();
    levelset->add_option("--t", opt.t, "level radius in (0,1)");
    levelset->add_option("--samples", opt.samples, "points per branch (default 256)");
    add_common(levelset);

    std::reverse(args.begin(), args.end());
    try {
        app.parse(std::move(args));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    const std::string cmd = app.get_subcommands().front()->get_name();
    try {
        if (cmd == "analyze") run_analyze(opt, tol);
        else if (cmd == "glue") run_glue(opt, tol);
        else if (cmd == "thin-gen") run_thin_gen(opt, tol);
        else if (cmd == "thin-extract") run_thin_extract(opt, tol);
        else if (cmd == "thin-construct") run_thin_construct(opt, tol);
        else if (cmd == "bergman-check") run_bergman_check(opt, tol);
        else if (cmd == "levelset") run_levelset(opt, tol);
        return 0;
    } catch (const bl::spec_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const bl::numeric_error& e) {
        std::fprintf(stderr, "numerical failure [%s]: %s\n", e.gate().c_str(), e.what());
        try {
            bl::write_text(opt.output, bl::json_dump(bl::failure_document(e.gate(), e.what(), cmd)));
        } catch (const bl::spec_error& io) {
            std::fprintf(stderr, "error: %s\n", io.what());
        }
        return 2;
    }
}
