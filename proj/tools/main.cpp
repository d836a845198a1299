// ergolab: batch experiments over the sequence/nilsystem/arithmetic modules,
// emitting CSV tables with JSON sidecars.  Identical resolved configurations
// replay to byte-identical CSV bodies.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ergolab/core.hpp"
#include "ergolab/csv.hpp"
#include "ergolab/decompose.hpp"
#include "ergolab/experiment.hpp"
#include "ergolab/fejer.hpp"
#include "ergolab/gowers.hpp"
#include "ergolab/nil_reports.hpp"

using namespace ergolab;
using nlohmann::json;

namespace {

struct RunContext {
    ExperimentConfig cfg;
    std::string command;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    std::string out() const {
        std::string o = cfg.get("out");
        require(!o.empty(), ErrorCode::validation, "an output path is required (--out)");
        return o;
    }

    void write_sidecar(const json& units, const json& extra = json::object()) const {
        double wall_ms = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - start)
                             .count();
        json j;
        j["version"] = kVersion;
        j["command"] = command;
        j["wall_ms"] = wall_ms;
        j["config"] = json::object();
        for (auto& [k, v] : cfg.entries()) j["config"][k] = v;
        j["units"] = units;
        for (auto& [k, v] : extra.items()) j[k] = v;
        std::ofstream f(out() + ".json", std::ios::binary);
        require(f.good(), ErrorCode::io_error, "cannot open sidecar for writing");
        f << j.dump(2) << "\n";
    }
};

std::shared_ptr<FactorSieve> obtain_sieve(const ExperimentConfig& cfg, int64_t needed) {
    std::string cache = cfg.get("sieve_cache");
    int64_t n_max = cfg.get_int("sieve_max", needed);
    require(n_max >= needed, ErrorCode::validation, "sieve_max is below what the run needs");
    if (!cache.empty()) {
        auto loaded = FactorSieve::load_cache(cache);
        if (loaded && loaded->n_max() >= n_max) return loaded;
    }
    auto sieve = std::make_shared<FactorSieve>(n_max);
    if (!cache.empty()) sieve->save_cache(cache);
    return sieve;
}

FiniteGridFn grid_for_spec(const std::string& spec, int64_t n_mod) {
    auto tok = parse_spec_token(spec);
    if (tok.name == "const")
        return grid_from_fn(n_mod, 1, [](std::span<const int64_t>) { return cplx(1.0, 0.0); });
    if (tok.name == "char") {
        int64_t k = ExperimentConfig::parse_int(tok.arg("k", "1"));
        return grid_from_fn(n_mod, 1, [n_mod, k](std::span<const int64_t> n) {
            return e((double)((k * n[0]) % n_mod) / (double)n_mod);
        });
    }
    if (tok.name == "quad")
        return grid_from_fn(n_mod, 1, [n_mod](std::span<const int64_t> n) {
            return e((double)((n[0] * n[0]) % n_mod) / (double)n_mod);
        });
    if (tok.name == "random") {
        uint64_t seed = (uint64_t)ExperimentConfig::parse_int(tok.arg("seed", "1"));
        return grid_from_fn(n_mod, 1, [seed](std::span<const int64_t> n) {
            Rng r(seed ^ (uint64_t)(n[0] * 1000003LL));
            return r.disk();
        });
    }
    throw Error(ErrorCode::validation, "unknown grid function spec: " + spec);
}

// fills a CorrelationSpec from config keys (system, q, f0, f, p)
CorrelationSpec correlation_from_config(const ExperimentConfig& cfg) {
    int64_t grid_q = cfg.get_int("q", 32);
    auto sys = std::make_shared<CommutingTorusSystem>(
        parse_system(cfg.get("system", "rotation:alpha=golden"), grid_q));
    CorrelationSpec cs;
    cs.system = sys;
    cs.window_arity = 1;
    cs.f0 = parse_observable(cfg.get("f0", "char:k=-1"), sys->dim());
    auto fparts = split(cfg.get("f", "char:k=1"), ';');
    auto pparts = split(cfg.get("p", "T1:n"), ';');
    require(fparts.size() == pparts.size(), ErrorCode::validation,
            "need matching counts of functions and iterates");
    for (auto& fp : fparts) cs.functions.push_back(parse_observable(fp, sys->dim()));
    for (auto& pp : pparts) cs.iterates.push_back(parse_iterate(pp, sys->num_maps()));
    return cs;
}

// --- gowers ----------------------------------------------------------------

int run_gowers(RunContext& ctx) {
    auto ns = parse_int_list(ctx.cfg.get("N"));
    require(!ns.empty(), ErrorCode::validation, "gowers needs a nonempty N list");
    int s_max = (int)ctx.cfg.get_int("s", 2);
    require(s_max >= 1, ErrorCode::validation, "s must be >= 1");
    std::string fspec = ctx.cfg.get("f", "char:k=1");
    int64_t budget = ctx.cfg.get_int("budget", kDefaultGowersOpBudget);

    CsvWriter csv({"N", "s", "method", "value"});
    for (int64_t n_mod : ns) {
        require(n_mod >= 1, ErrorCode::validation, "grid modulus must be >= 1");
        auto f = grid_for_spec(fspec, n_mod);
        for (int s = 1; s <= s_max; ++s) {
            csv.row({CsvWriter::num(n_mod), CsvWriter::num((int64_t)s), "cube",
                     CsvWriter::num(gowers_norm(f, s, budget))});
            if (s == 2)
                csv.row({CsvWriter::num(n_mod), CsvWriter::num((int64_t)s), "spectral",
                         CsvWriter::num(gowers_u2_spectral(f))});
        }
    }
    csv.write(ctx.out());
    ctx.write_sidecar({{"value", "Gowers U^s(Z_N) norm, dimensionless in [0, sup|f|]"}});
    return 0;
}

// --- average ----------------------------------------------------------------

int run_average(RunContext& ctx) {
    int64_t grid_q = ctx.cfg.get_int("q", 32);
    auto sys = parse_system(ctx.cfg.get("system", "rotation:alpha=golden"), grid_q);
    auto fparts = split(ctx.cfg.get("f", "char:k=1"), ';');
    auto pparts = split(ctx.cfg.get("p", "T1:n"), ';');
    require(fparts.size() == pparts.size(), ErrorCode::validation,
            "need matching counts of functions and iterates");
    AverageSpec spec;
    spec.system = &sys;
    spec.window_arity = 1;
    for (auto& fp : fparts) spec.functions.push_back(parse_observable(fp, sys.dim()));
    for (auto& pp : pparts) spec.iterates.push_back(parse_iterate(pp, sys.num_maps()));

    int64_t horizon = ctx.cfg.get_int("N", 0);
    require(horizon >= 1, ErrorCode::validation, "average needs a window horizon N >= 1");
    bool probe = ctx.cfg.get_int("probe", 0) == 1;
    std::shared_ptr<FactorSieve> sieve;
    std::string wspec = ctx.cfg.get("weight", "const");
    if (parse_spec_token(wspec).name == "mult")
        sieve = obtain_sieve(ctx.cfg, (probe ? 4 : 1) * horizon + 1);
    auto weight = parse_weight(wspec, sieve);

    CsvWriter csv({"quantity", "horizon", "value"});
    auto res = weighted_multiple_average(spec, weight, FolnerWindow::box1(horizon));
    csv.row({"l2_exact", CsvWriter::num(horizon), CsvWriter::num(res.l2_exact)});
    csv.row({"l2_quadrature", CsvWriter::num(horizon), CsvWriter::num(res.l2_quadrature)});
    if (probe) {
        auto pr = cauchy_convergence_probe(spec, weight, horizon);
        csv.row({"delta", CsvWriter::num(horizon), CsvWriter::num(pr.delta_n)});
        csv.row({"delta", CsvWriter::num(2 * horizon), CsvWriter::num(pr.delta_2n)});
        csv.row({"cauchy_trend", CsvWriter::num(horizon), pr.cauchy_trend ? "1" : "0"});
    }
    csv.write(ctx.out());
    ctx.write_sidecar({{"l2_exact", "Parseval L2(mu) norm of the averaged observable"},
                       {"l2_quadrature", "midpoint-grid quadrature L2 norm"},
                       {"delta", "||A_N - A_2N||_{L2(mu)}"}});
    return 0;
}

// --- correlate ---------------------------------------------------------------

int run_correlate(RunContext& ctx) {
    auto cs = correlation_from_config(ctx.cfg);
    auto a = correlation_sequence(cs);
    int64_t n_max = ctx.cfg.get_int("nmax", 0);
    require(n_max >= 1, ErrorCode::validation, "correlate needs nmax >= 1");
    CsvWriter csv({"n", "re", "im"});
    for (int64_t n = 1; n <= n_max; ++n) {
        cplx v = a.at1(n);
        csv.row({CsvWriter::num(n), CsvWriter::num(v.real()), CsvWriter::num(v.imag())});
    }
    csv.write(ctx.out());
    ctx.write_sidecar({{"re_im", "integral of f0 . prod_i T^{p_i(n)} f_i over Haar"}},
                      {{"bound", a.bound}});
    return 0;
}

// --- decompose ---------------------------------------------------------------

int run_decompose(RunContext& ctx) {
    int64_t window_n = ctx.cfg.get_int("window", 0);
    require(window_n >= 1, ErrorCode::validation, "decompose needs window >= 1");
    ComplexSeqNd target;
    std::string source = ctx.cfg.get("source", "");
    require(!source.empty(), ErrorCode::validation, "decompose needs a source sequence");
    if (source == "correlate") {
        target = correlation_sequence(correlation_from_config(ctx.cfg));
    } else {
        std::shared_ptr<FactorSieve> sieve;
        if (parse_spec_token(source).name == "mult") sieve = obtain_sieve(ctx.cfg, window_n + 1);
        target = parse_weight(source, sieve);
    }

    NilDictionary dict(1);
    for (double t : farey_fractions((int)ctx.cfg.get_int("farey", 8))) dict.add_linear({t});
    for (double t : parse_real_list(ctx.cfg.get("extra", ""))) dict.add_linear({frac(t)});
    for (double t : parse_real_list(ctx.cfg.get("quad", ""))) dict.add_quadratic(0, 0, t);

    auto window = FolnerWindow::box1(window_n);
    auto rep = fit_structured(target, window, dict, (int)ctx.cfg.get_int("max_terms", 4),
                              ctx.cfg.get_real("tol", 1e-6));

    CsvWriter csv({"rank", "index", "label", "coeff_re", "coeff_im"});
    for (size_t i = 0; i < rep.atoms.size(); ++i)
        csv.row({CsvWriter::num((int64_t)i), CsvWriter::num((int64_t)rep.atoms[i].index),
                 rep.atoms[i].label, CsvWriter::num(rep.atoms[i].coeff.real()),
                 CsvWriter::num(rep.atoms[i].coeff.imag())});
    csv.write(ctx.out());

    json extra;
    extra["report"] = report_to_json(rep);
    if (dict.size() <= 64) {
        auto gram = dictionary_gram(dict, window);
        extra["dictionary_gram"] = {{"atoms", gram.atoms},
                                    {"max_offdiag", gram.max_offdiag},
                                    {"min_diag", gram.min_diag}};
    }
    int uk = (int)ctx.cfg.get_int("uk", 0);
    if (uk >= 1) {
        auto ru = residual_uniformity(rep, window, uk,
                                      ctx.cfg.get_int("nwrap", std::min<int64_t>(window_n, 64)));
        extra["residual_uniformity"] = {{"k", uk},
                                        {"value", ru.value},
                                        {"boundary_estimate", ru.boundary_estimate},
                                        {"wrap_is_proxy", ru.wrap_is_proxy}};
    }
    ctx.write_sidecar({{"coeff", "complex coefficient of the selected atom"}}, extra);
    return 0;
}

// --- arith -------------------------------------------------------------------

int run_arith(RunContext& ctx) {
    std::string mode = ctx.cfg.get("mode", "density");
    if (mode == "density") {
        int a = (int)ctx.cfg.get_int("a", 0);
        int b = (int)ctx.cfg.get_int("b", 2);
        int64_t c = ctx.cfg.get_int("c", 0);
        int64_t n = ctx.cfg.get_int("N", 0);
        require(n >= 1, ErrorCode::validation, "density needs N >= 1");
        auto sieve = obtain_sieve(ctx.cfg, std::max<int64_t>(n, 2));
        double d = s_ab_density(a, b, c, n, *sieve);
        CsvWriter csv({"a", "b", "c", "N", "density"});
        csv.row({CsvWriter::num((int64_t)a), CsvWriter::num((int64_t)b), CsvWriter::num(c),
                 CsvWriter::num(n), CsvWriter::num(d)});
        csv.write(ctx.out());
        ctx.write_sidecar({{"density", "|{n <= N : n - c in S_{a,b}}| / N"}});
        return 0;
    }
    if (mode == "keycheck") {
        int64_t n_max = ctx.cfg.get_int("N", 100000);
        int b_max = (int)ctx.cfg.get_int("bmax", 6);
        auto sieve = obtain_sieve(ctx.cfg, std::max<int64_t>(n_max, 2));
        double worst = 0.0;
        for (int64_t n = 1; n <= n_max; ++n)
            for (int b = 1; b <= b_max; ++b)
                for (int a = 0; a < b; ++a)
                    worst = std::max(worst,
                                     std::abs(key_identity_eval(n, a, b, *sieve) -
                                              cplx((double)s_ab_indicator(n, a, b, *sieve), 0.0)));
        CsvWriter csv({"N", "bmax", "max_defect"});
        csv.row({CsvWriter::num(n_max), CsvWriter::num((int64_t)b_max), CsvWriter::num(worst)});
        csv.write(ctx.out());
        ctx.write_sidecar({{"max_defect", "max |root-of-unity average - indicator|"}});
        return 0;
    }
    if (mode == "ddist") {
        auto phi1 = parse_multiplicative(ctx.cfg.get("phi1", "liouville"));
        auto phi2 = parse_multiplicative(ctx.cfg.get("phi2", "one"));
        auto cutoffs = parse_int_list(ctx.cfg.get("P", "1000"));
        require(!cutoffs.empty(), ErrorCode::validation, "ddist needs a prime cutoff list P");
        int64_t biggest = 2;
        for (auto p : cutoffs) biggest = std::max(biggest, p);
        auto sieve = obtain_sieve(ctx.cfg, biggest);
        CsvWriter csv({"P", "squared", "value", "primes"});
        for (auto p : cutoffs) {
            auto d = d_distance_partial(phi1, phi2, p, *sieve);
            csv.row({CsvWriter::num(p), CsvWriter::num(d.squared), CsvWriter::num(d.value),
                     CsvWriter::num(d.primes_used)});
        }
        csv.write(ctx.out());
        ctx.write_sidecar(
            {{"squared", "sum over p <= P of (1 - Re phi1(p) conj phi2(p)) / p"}},
            {{"note", "partial sums only; divergence shows as monotone growth in P"}});
        return 0;
    }
    if (mode == "apscan") {
        auto phi = parse_multiplicative(ctx.cfg.get("phi", "fb:b=2"));
        int64_t a_max = ctx.cfg.get_int("amax", 4);
        int64_t n = ctx.cfg.get_int("N", 0);
        require(n >= 1, ErrorCode::validation, "apscan needs N >= 1");
        auto sieve = obtain_sieve(ctx.cfg, a_max * n + a_max);
        auto scan = aperiodicity_scan(phi, a_max, n, *sieve);
        CsvWriter csv({"a", "b", "re", "im", "modulus"});
        for (auto& row : scan.rows)
            csv.row({CsvWriter::num(row.a), CsvWriter::num(row.b),
                     CsvWriter::num(row.average.real()), CsvWriter::num(row.average.imag()),
                     CsvWriter::num(std::abs(row.average))});
        csv.write(ctx.out());
        ctx.write_sidecar({{"modulus", "|N^-1 sum phi(an+b)|"}},
                          {{"max_modulus", scan.max_modulus},
                           {"argmax_a", scan.argmax_a},
                           {"argmax_b", scan.argmax_b}});
        return 0;
    }
    if (mode == "katai") {
        std::string kspec = ctx.cfg.get("kseq", "quad2:gamma=golden");
        auto tok = parse_spec_token(kspec);
        ComplexSeqNd seq;
        seq.arity = 2;
        seq.bound = 1.0;
        seq.label = tok.name;
        if (tok.name == "quad2") {
            double gamma = ExperimentConfig::parse_real(tok.arg("gamma", "golden"));
            seq.eval = [gamma](std::span<const int64_t> n) {
                return e_l((long double)n[0] * (long double)n[0] * (long double)gamma);
            };
        } else if (tok.name == "prodchar") {
            double alpha = ExperimentConfig::parse_real(tok.arg("alpha", "golden"));
            double beta = ExperimentConfig::parse_real(tok.arg("beta", "root2m1"));
            seq.eval = [alpha, beta](std::span<const int64_t> n) {
                return e_l((long double)n[0] * (long double)alpha +
                           (long double)n[1] * (long double)beta);
            };
        } else {
            throw Error(ErrorCode::validation, "unknown katai sequence spec: " + kspec);
        }
        auto primes = parse_int_list(ctx.cfg.get("primes", "2,3,5,7"));
        int64_t n1 = ctx.cfg.get_int("N1", 200);
        int64_t n2 = ctx.cfg.get_int("N2", 200);
        auto grid = katai_grid(seq, primes, n1, n2, ctx.cfg.get_int("max_tuples", 1000));
        CsvWriter csv({"p1", "p2", "p1p", "p2p", "re", "im", "modulus"});
        for (auto& row : grid.rows)
            csv.row({CsvWriter::num(row.p1), CsvWriter::num(row.p2), CsvWriter::num(row.p1p),
                     CsvWriter::num(row.p2p), CsvWriter::num(row.value.real()),
                     CsvWriter::num(row.value.imag()), CsvWriter::num(std::abs(row.value))});
        csv.write(ctx.out());
        ctx.write_sidecar(
            {{"modulus", "|(N1 N2)^-1 sum a(p1 n1, p2 n2) conj a(p1' n1, p2' n2)|"}},
            {{"max_modulus", grid.max_modulus}});
        return 0;
    }
    throw Error(ErrorCode::validation, "unknown arith mode: " + mode);
}

// --- hardy -------------------------------------------------------------------

int run_hardy(RunContext& ctx) {
    std::string mode = ctx.cfg.get("mode", "levelset");
    if (mode == "fejer") {
        double c = ctx.cfg.get_real("c", 0.2);
        double d = ctx.cfg.get_real("d", 0.4);
        double eps = ctx.cfg.get_real("eps", 0.1);
        auto s = fejer_sandwich(c, d, eps);
        verify_sandwich(s, c, d, eps);
        CsvWriter csv({"c", "d", "eps", "degree", "margin_lower", "margin_upper"});
        csv.row({CsvWriter::num(c), CsvWriter::num(d), CsvWriter::num(eps),
                 CsvWriter::num((int64_t)s.degree), CsvWriter::num(s.grid_margin_lower),
                 CsvWriter::num(s.grid_margin_upper)});
        csv.write(ctx.out());
        ctx.write_sidecar({{"margin", "worst slack of the sandwich inequality on the grid"}});
        return 0;
    }

    auto f = parse_hardy(ctx.cfg.get("f", "t^1.5"), ctx.cfg.get_real("t0", 1.5));
    if (mode == "levelset") {
        double a = ctx.cfg.get_real("a", 0.25);
        double b = ctx.cfg.get_real("b", 0.5);
        int64_t n = ctx.cfg.get_int("N", 0);
        require(n >= 1, ErrorCode::validation, "levelset needs N >= 1");
        auto s = level_set(f, a, b, n);
        CsvWriter csv({"a", "b", "N", "count", "density", "stays_away"});
        csv.row({CsvWriter::num(a), CsvWriter::num(b), CsvWriter::num(n),
                 CsvWriter::num((int64_t)s.members.size()), CsvWriter::num(s.density),
                 f.stays_away_from_polynomials() ? "1" : "0"});
        csv.write(ctx.out());
        if (ctx.cfg.get_int("emit_members", 0) == 1) {
            CsvWriter members({"n"});
            for (auto m : s.members) members.row({CsvWriter::num(m)});
            members.write(ctx.out() + ".members.csv");
        }
        ctx.write_sidecar({{"density", "|S cap [N]| / N with ||f(n)|| in [a,b]"}});
        return 0;
    }
    if (mode == "localize") {
        int64_t center = ctx.cfg.get_int("N", 10000);
        int k = (int)ctx.cfg.get_int("k", 2);
        double theta = ctx.cfg.get_real("theta", -1.0);
        auto loc = taylor_localization(f, center, k, theta);
        CsvWriter csv({"N", "k", "theta", "alpha", "L", "L_over_N", "Lk_alpha", "max_residual",
                       "stays_away"});
        csv.row({CsvWriter::num(center), CsvWriter::num((int64_t)k), CsvWriter::num(loc.theta),
                 CsvWriter::num(loc.alpha), CsvWriter::num(loc.window_length),
                 CsvWriter::num(loc.ratio_window_center), CsvWriter::num(loc.growth_lk_alpha),
                 CsvWriter::num(loc.max_residual),
                 f.stays_away_from_polynomials() ? "1" : "0"});
        csv.write(ctx.out());
        ctx.write_sidecar(
            {{"max_residual", "max over the window of |f(N+n) - n^k alpha - q_N(n)|"}});
        return 0;
    }
    if (mode == "decay") {
        int k_max = (int)ctx.cfg.get_int("K", 2);
        int64_t n = ctx.cfg.get_int("N", 0);
        require(n >= 1, ErrorCode::validation, "decay needs N >= 1");
        double alpha = ctx.cfg.get_real("alpha", (std::sqrt(5.0) - 1.0) / 2.0);
        int64_t start = (int64_t)std::ceil(f.domain_cutoff());
        require(n >= start, ErrorCode::validation, "decay horizon below the domain cutoff");
        CsvWriter csv({"k", "N", "modulus"});
        for (int k = 0; k <= k_max; ++k) {
            cplx sum = block_sum(n - start + 1, [&](int64_t i) {
                int64_t m = start + i;
                return hardy_weight(f, m) *
                       e_l((long double)k * (long double)m * (long double)alpha);
            });
            csv.row({CsvWriter::num((int64_t)k), CsvWriter::num(n),
                     CsvWriter::num(std::abs(sum) / (double)n)});
        }
        csv.write(ctx.out());
        ctx.write_sidecar({{"modulus", "|N^-1 sum e(f(n)) e(k n alpha)|"}});
        return 0;
    }
    throw Error(ErrorCode::validation, "unknown hardy mode: " + mode);
}

// --- seminorm ------------------------------------------------------------------

int run_seminorm(RunContext& ctx) {
    std::string mode = ctx.cfg.get("mode", "unif");
    if (mode == "unif") {
        std::string sspec = ctx.cfg.get("seq", "char:alpha=golden");
        int64_t n = ctx.cfg.get_int("N", 0);
        require(n >= 1, ErrorCode::validation, "unif needs a window N >= 1");
        int k = (int)ctx.cfg.get_int("k", 1);
        int64_t h = ctx.cfg.get_int("H", 16);
        std::shared_ptr<FactorSieve> sieve;
        if (parse_spec_token(sspec).name == "mult")
            sieve = obtain_sieve(ctx.cfg, ctx.cfg.get_int("offset", 0) + n + 2 * k * h + 2);
        auto seq = parse_weight(sspec, sieve);
        auto window = FolnerWindow::box1(n, ctx.cfg.get_int("offset", 0));
        auto probe = uniformity_seminorm_probe(seq, window, k, h);
        CsvWriter csv({"k", "H", "value", "im_residual", "clamp"});
        csv.row({CsvWriter::num((int64_t)k), CsvWriter::num(h),
                 CsvWriter::num(probe.at_h.value), CsvWriter::num(probe.at_h.diag.im_residual),
                 CsvWriter::num(probe.at_h.diag.clamp)});
        csv.row({CsvWriter::num((int64_t)k), CsvWriter::num(2 * h),
                 CsvWriter::num(probe.at_2h.value),
                 CsvWriter::num(probe.at_2h.diag.im_residual),
                 CsvWriter::num(probe.at_2h.diag.clamp)});
        csv.write(ctx.out());
        ctx.write_sidecar({{"value", "windowed uniformity seminorm estimate ||a||_{I,k}"},
                           {"clamp", "negative real mass removed before the 2^-k root"}});
        return 0;
    }
    if (mode == "hk") {
        int64_t grid_q = ctx.cfg.get_int("q", 16);
        auto sys = parse_system(ctx.cfg.get("system", "rotation:alpha=golden"), grid_q);
        auto f = parse_observable(ctx.cfg.get("f", "char:k=1"), sys.dim());
        int k_max = (int)ctx.cfg.get_int("k", 2);
        int64_t n_av = ctx.cfg.get_int("Nav", 1000);
        CsvWriter csv({"k", "Nav", "value"});
        for (int k = 1; k <= k_max; ++k) {
            auto r = hk_seminorm(sys, f, k, n_av);
            csv.row({CsvWriter::num((int64_t)k), CsvWriter::num(n_av), CsvWriter::num(r.value)});
        }
        csv.write(ctx.out());
        ctx.write_sidecar({{"value", "Host-Kra seminorm estimate |||f|||_k at horizon Nav"}});
        return 0;
    }
    throw Error(ErrorCode::validation, "unknown seminorm mode: " + mode);
}

int exit_code_for(const Error& err) {
    switch (err.code()) {
        case ErrorCode::window_too_large:
        case ErrorCode::shift_budget_exceeded:
        case ErrorCode::gowers_budget_exceeded:
        case ErrorCode::budget_exceeded:
        case ErrorCode::degree_cap:
            return 3;
        case ErrorCode::bound_violation:
        case ErrorCode::frequency_overflow:
            return 4;
        default:
            return 2;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ergolab: desk-scale experiments with weighted ergodic averages,"
                 " uniformity norms, and arithmetic weights"};
    app.require_subcommand(1);

    RunContext ctx;
    std::string config_path, out_path;
    std::vector<std::string> overrides;
    int threads = 1;

    std::map<std::string, int (*)(RunContext&)> runners = {
        {"gowers", run_gowers},       {"average", run_average},
        {"correlate", run_correlate}, {"decompose", run_decompose},
        {"arith", run_arith},         {"hardy", run_hardy},
        {"seminorm", run_seminorm}};

    // direct flags are sugar for --set key=value; both beat the config file
    std::vector<std::pair<std::string, std::string>> flag_values;
    auto key_option = [&](CLI::App* sub, const std::string& flag, const std::string& key,
                          const std::string& help) {
        sub->add_option_function<std::string>(
            flag, [&flag_values, key](const std::string& v) { flag_values.push_back({key, v}); },
            help);
    };
    auto mode_flag = [&](CLI::App* sub, const std::string& flag, const std::string& mode) {
        sub->add_flag_callback(
            flag, [&flag_values, mode]() { flag_values.push_back({"mode", mode}); },
            "shorthand for --set mode=" + mode);
    };

    for (auto& [name, fn] : runners) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "key=value config file");
        sub->add_option("--out", out_path, "output CSV path (sidecar at <out>.json)");
        sub->add_option("--set", overrides,
                        "config override key=value (repeatable; flags beat the file)");
        sub->add_option("--threads", threads, "worker threads (must not change results)");
        key_option(sub, "--N", "N", "horizon / grid size");
        key_option(sub, "--f", "f", "observable or grid-function spec");
        if (name == "gowers") {
            key_option(sub, "--s", "s", "largest Gowers order");
        } else if (name == "average" || name == "correlate" || name == "decompose" ||
                   name == "seminorm") {
            key_option(sub, "--system", "system", "system spec");
            key_option(sub, "--p", "p", "iterate spec list");
            key_option(sub, "--weight", "weight", "weight sequence spec");
            key_option(sub, "--f0", "f0", "conjugated observable f0");
            if (name == "average") sub->add_flag_callback("--probe", [&flag_values]() {
                flag_values.push_back({"probe", "1"});
            }, "run the N/2N/4N Cauchy probe");
            if (name == "correlate") key_option(sub, "--nmax", "nmax", "sequence length");
            if (name == "decompose") {
                key_option(sub, "--source", "source", "target sequence spec or 'correlate'");
                key_option(sub, "--window", "window", "fit window length");
                key_option(sub, "--farey", "farey", "Farey order of the linear grid");
                key_option(sub, "--extra", "extra", "extra linear frequencies");
                key_option(sub, "--max-terms", "max_terms", "greedy step cap");
                key_option(sub, "--tol", "tol", "correlation stopping tolerance");
            }
            if (name == "seminorm") {
                key_option(sub, "--seq", "seq", "sequence spec");
                key_option(sub, "--k", "k", "seminorm order");
                key_option(sub, "--H", "H", "shift range (also probed at 2H)");
                key_option(sub, "--Nav", "Nav", "Birkhoff horizon for hk mode");
                mode_flag(sub, "--unif", "unif");
                mode_flag(sub, "--hk", "hk");
            }
        } else if (name == "arith") {
            mode_flag(sub, "--density", "density");
            mode_flag(sub, "--keycheck", "keycheck");
            mode_flag(sub, "--ddist", "ddist");
            mode_flag(sub, "--apscan", "apscan");
            mode_flag(sub, "--katai", "katai");
            key_option(sub, "--a", "a", "residue a");
            key_option(sub, "--b", "b", "modulus b");
            key_option(sub, "--c", "c", "shift c");
            key_option(sub, "--phi", "phi", "multiplicative function spec");
            key_option(sub, "--P", "P", "prime cutoff list");
            key_option(sub, "--sieve-cache", "sieve_cache", "binary spf cache path");
        } else if (name == "hardy") {
            mode_flag(sub, "--levelset", "levelset");
            mode_flag(sub, "--localize", "localize");
            mode_flag(sub, "--decay", "decay");
            mode_flag(sub, "--fejer", "fejer");
            key_option(sub, "--a", "a", "interval left end");
            key_option(sub, "--b", "b", "interval right end");
            key_option(sub, "--k", "k", "localization order");
            key_option(sub, "--theta", "theta", "window exponent (default: feasible band)");
            key_option(sub, "--K", "K", "largest character multiple");
            key_option(sub, "--alpha", "alpha", "character frequency");
            key_option(sub, "--eps", "eps", "sandwich accuracy");
        }
    }

    CLI11_PARSE(app, argc, argv);

    auto* chosen = app.get_subcommands().front();
    ctx.command = chosen->get_name();
    try {
        if (!config_path.empty()) ctx.cfg.load_file(config_path);
        for (auto& [key, value] : flag_values) ctx.cfg.set(key, value);
        for (auto& kv : overrides) {
            auto eq = kv.find('=');
            require(eq != std::string::npos, ErrorCode::validation,
                    "--set expects key=value, got: " + kv);
            ctx.cfg.set(ExperimentConfig::trim(kv.substr(0, eq)),
                        ExperimentConfig::trim(kv.substr(eq + 1)));
        }
        if (!out_path.empty()) ctx.cfg.set("out", out_path);
        set_thread_count(threads);
        return runners[ctx.command](ctx);
    } catch (const Error& err) {
        int code = exit_code_for(err);
        std::cerr << "error (" << error_code_name(err.code()) << "): " << err.what() << "\n";
        if (code == 4) {
            json diag;
            diag["error"] = error_code_name(err.code());
            diag["what"] = err.what();
            diag["command"] = ctx.command;
            std::string out = ctx.cfg.get("out");
            if (!out.empty()) {
                std::ofstream f(out + ".error.json", std::ios::binary);
                f << diag.dump(2) << "\n";
            }
            std::cerr << diag.dump() << "\n";
        }
        return code;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    }
}
