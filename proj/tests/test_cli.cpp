#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ergolab/csv.hpp"
#include "ergolab/experiment.hpp"

using namespace ergolab;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// parser units
// ---------------------------------------------------------------------------

TEST_CASE("config files: comments, trimming, overrides") {
    auto path = fs::temp_directory_path() / "ergolab_cfg_test.cfg";
    {
        std::ofstream f(path);
        f << "# a comment line\n";
        f << "  N = 100  # trailing comment\n";
        f << "alpha= golden\n";
        f << "not a key value line\n";
    }
    ExperimentConfig cfg;
    cfg.load_file(path.string());
    CHECK(cfg.get_int("N", 0) == 100);
    CHECK(cfg.get_real("alpha", 0.0) == doctest::Approx((std::sqrt(5.0) - 1.0) / 2.0));
    cfg.set("N", "250");
    CHECK(cfg.get_int("N", 0) == 250);
    fs::remove(path);
}

TEST_CASE("spec tokens and numeric literals") {
    auto tok = parse_spec_token("fb:b=3,mult=1");
    CHECK(tok.name == "fb");
    CHECK(tok.arg("b") == "3");
    CHECK(tok.arg("mult") == "1");
    CHECK(tok.arg("missing", "x") == "x");
    auto lists = parse_spec_token("rotations:alphas=golden,root2m1,0.25");
    CHECK(lists.arg("alphas") == "golden,root2m1,0.25");
    CHECK_THROWS_AS(parse_spec_token("x:novalue"), Error);
    CHECK(ExperimentConfig::parse_real("root2m1") == doctest::Approx(std::sqrt(2.0) - 1.0));
    CHECK_THROWS_AS(ExperimentConfig::parse_real("12abc"), Error);
    CHECK_THROWS_AS(ExperimentConfig::parse_int("7.5"), Error);
}

TEST_CASE("polynomial parser") {
    auto p = parse_polynomial("3n^2 - n + 7");
    REQUIRE(p.terms.size() == 3);
    CHECK(p.terms[0] == std::pair<int64_t, int>{3, 2});
    CHECK(p.terms[1] == std::pair<int64_t, int>{-1, 1});
    CHECK(p.terms[2] == std::pair<int64_t, int>{7, 0});
    CHECK(p.degree() == 2);
    CHECK(parse_polynomial("n").terms[0] == std::pair<int64_t, int>{1, 1});
    CHECK(parse_polynomial("-2*n^3").terms[0] == std::pair<int64_t, int>{-2, 3});
    CHECK_THROWS_AS(parse_polynomial("n^"), Error);
    CHECK_THROWS_AS(parse_polynomial("x+1"), Error);
}

TEST_CASE("iterate parser maps polynomials onto the chosen transformation") {
    auto p = parse_iterate("T2:n^2", 3);
    int64_t n[1] = {5};
    int64_t out[3];
    p.eval(std::span<const int64_t>(n, 1), std::span<int64_t>(out, 3));
    CHECK(out[0] == 0);
    CHECK(out[1] == 25);
    CHECK(out[2] == 0);
    auto q = parse_iterate("T1:n,T3:2n", 3);
    q.eval(std::span<const int64_t>(n, 1), std::span<int64_t>(out, 3));
    CHECK(out[0] == 5);
    CHECK(out[2] == 10);
    CHECK_THROWS_AS(parse_iterate("T9:n", 3), Error);
    CHECK_THROWS_AS(parse_iterate("n", 3), Error);
}

TEST_CASE("hardy spec parser") {
    auto f = parse_hardy("t^1.5");
    REQUIRE(f.terms().size() == 1);
    CHECK(f.terms()[0].power == doctest::Approx(1.5));
    auto g = parse_hardy("2*t^0.5*log^2 - log^1 + t");
    REQUIRE(g.terms().size() == 3);
    CHECK(g.eval(100.0) == doctest::Approx(2.0 * 10.0 * std::pow(std::log(100.0), 2) -
                                           std::log(100.0) + 100.0));
    CHECK_THROWS_AS(parse_hardy(""), Error);
}

TEST_CASE("weight parser covers the documented families") {
    auto one = parse_weight("const");
    CHECK(std::abs(one.at1(3) - cplx(1.0, 0.0)) < 1e-15);
    auto alt = parse_weight("alt");
    CHECK(alt.at1(3).real() == doctest::Approx(-1.0));
    auto ch = parse_weight("char:alpha=0.25");
    CHECK(std::abs(ch.at1(1) - cplx(0.0, 1.0)) < 1e-12);
    auto rnd1 = parse_weight("random:seed=9");
    auto rnd2 = parse_weight("random:seed=9");
    CHECK(rnd1.at1(17) == rnd2.at1(17));  // same seed, same stream
    auto sieve = std::make_shared<FactorSieve>(1000);
    auto liou = parse_weight("mult:spec=liouville", sieve);
    CHECK(liou.at1(12).real() == doctest::Approx(-1.0));
    CHECK_THROWS_AS(parse_weight("mult:spec=liouville"), Error);  // needs a sieve
    CHECK_THROWS_AS(parse_weight("nonsense"), Error);
}

TEST_CASE("csv writer: quoting and shortest round-trip numbers") {
    CsvWriter csv({"name", "value"});
    csv.row({"plain", CsvWriter::num(0.1)});
    csv.row({"with,comma", CsvWriter::num((int64_t)42)});
    csv.row({"with\"quote", "x"});
    std::string body = csv.body();
    CHECK(body == "name,value\r\nplain,0.1\r\n\"with,comma\",42\r\n\"with\"\"quote\",x\r\n");
    CHECK(format_double(1.0 / 3.0) == "0.3333333333333333");
    CHECK(format_double(1e300) == "1e+300");
}

// ---------------------------------------------------------------------------
// end-to-end: drive the built binary (path in ERGOLAB_BIN)
// ---------------------------------------------------------------------------

namespace {

std::string binary_path() {
    const char* p = std::getenv("ERGOLAB_BIN");
    return p ? p : "";
}

int run_cli(const std::string& args) {
    std::string cmd = binary_path() + " " + args + " > /dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace

TEST_SUITE("cli-binary") {
    TEST_CASE("gowers subcommand: character norms land in the CSV") {
        if (binary_path().empty()) return;
        auto out = fs::temp_directory_path() / "ergolab_gowers.csv";
        int rc = run_cli("gowers --set N=16 --set s=2 --set f=char:k=3 --out " + out.string());
        CHECK(rc == 0);
        std::string body = slurp(out);
        CHECK(body.find("N,s,method,value") == 0);
        // U^1 = 0 (subject to float printing) and U^2 = 1
        CHECK(body.find("16,1,cube,") != std::string::npos);
        CHECK(body.find("16,2,cube,1\r\n") != std::string::npos);
        CHECK(body.find("16,2,spectral,") != std::string::npos);
        CHECK(fs::exists(out.string() + ".json"));
        fs::remove(out);
        fs::remove(out.string() + ".json");
    }

    TEST_CASE("replay determinism: identical configs produce identical CSV bodies") {
        if (binary_path().empty()) return;
        auto out1 = fs::temp_directory_path() / "ergolab_rep1.csv";
        auto out2 = fs::temp_directory_path() / "ergolab_rep2.csv";
        std::string args = "decompose --set source=random:seed=5 --set window=256"
                           " --set farey=5 --set max_terms=3 --set tol=0.05 --set uk=2"
                           " --set nwrap=64";
        CHECK(run_cli(args + " --out " + out1.string()) == 0);
        CHECK(run_cli(args + " --threads 3 --out " + out2.string()) == 0);
        CHECK(slurp(out1) == slurp(out2));
        CHECK(!slurp(out1).empty());
        for (auto& p : {out1, out2}) {
            fs::remove(p);
            fs::remove(p.string() + ".json");
        }
    }

    TEST_CASE("arith density lands on the 1/b limit through the CLI") {
        if (binary_path().empty()) return;
        auto out = fs::temp_directory_path() / "ergolab_density.csv";
        int rc = run_cli("arith --set mode=density --set a=0 --set b=2 --set N=100000 --out " +
                         out.string());
        CHECK(rc == 0);
        std::string body = slurp(out);
        auto last_comma = body.find_last_of(',');
        double density = std::stod(body.substr(last_comma + 1));
        CHECK(std::abs(density - 0.5) < 0.02);
        fs::remove(out);
        fs::remove(out.string() + ".json");
    }

    TEST_CASE("validation and budget exit codes") {
        if (binary_path().empty()) return;
        auto out = fs::temp_directory_path() / "ergolab_err.csv";
        // missing required N -> validation error
        CHECK(run_cli("average --out " + out.string()) == 2);
        // unknown weight family -> validation error
        CHECK(run_cli("average --set N=10 --set weight=bogus --out " + out.string()) == 2);
        // gowers budget -> exit 3
        CHECK(run_cli("gowers --set N=4096 --set s=3 --set f=quad --set budget=1000 --out " +
                      out.string()) == 3);
        // no subcommand -> CLI11 usage error (not our codes)
        CHECK(run_cli("") != 0);
        fs::remove(out);
    }

    TEST_CASE("config file plus --set override") {
        if (binary_path().empty()) return;
        auto cfg = fs::temp_directory_path() / "ergolab_cli.cfg";
        auto out = fs::temp_directory_path() / "ergolab_cfgrun.csv";
        {
            std::ofstream f(cfg);
            f << "mode = localize\n";
            f << "f = t^1.5\n";
            f << "N = 100\n";
            f << "k = 2\n";
        }
        int rc = run_cli("hardy --config " + cfg.string() + " --set N=10000 --out " +
                         out.string());
        CHECK(rc == 0);
        std::string body = slurp(out);
        CHECK(body.find("\r\n10000,2,") != std::string::npos);  // override won
        fs::remove(cfg);
        fs::remove(out);
        fs::remove(out.string() + ".json");
    }

    TEST_CASE("spec-style direct flags match the --set spelling") {
        if (binary_path().empty()) return;
        auto out1 = fs::temp_directory_path() / "ergolab_flags1.csv";
        auto out2 = fs::temp_directory_path() / "ergolab_flags2.csv";
        CHECK(run_cli("gowers --N 16 --s 2 --f char:k=3 --out " + out1.string()) == 0);
        CHECK(run_cli("gowers --set N=16 --set s=2 --set f=char:k=3 --out " + out2.string()) == 0);
        CHECK(slurp(out1) == slurp(out2));
        auto out3 = fs::temp_directory_path() / "ergolab_flags3.csv";
        CHECK(run_cli("arith --density --a 0 --b 2 --N 20000 --out " + out3.string()) == 0);
        CHECK(slurp(out3).find("0,2,0,20000,") != std::string::npos);
        for (auto& p : {out1, out2, out3}) {
            fs::remove(p);
            fs::remove(p.string() + ".json");
        }
    }

    TEST_CASE("numerical-invariant violations exit 4 with a diagnostic json") {
        if (binary_path().empty()) return;
        auto out = fs::temp_directory_path() / "ergolab_overflow.csv";
        // n^9 at n ~ 1e4 overflows the exact frequency arithmetic
        int rc = run_cli("average --system rotation:alpha=golden --f char:k=1"
                         " --p T1:n^9 --N 10000 --out " + out.string());
        CHECK(rc == 4);
        CHECK(fs::exists(out.string() + ".error.json"));
        std::string diag = slurp(out.string() + ".error.json");
        CHECK(diag.find("frequency_overflow") != std::string::npos);
        fs::remove(out.string() + ".error.json");
    }

    TEST_CASE("sieve cache file is written once and reused") {
        if (binary_path().empty()) return;
        auto cache = fs::temp_directory_path() / "ergolab_cli_sieve.bin";
        auto out1 = fs::temp_directory_path() / "ergolab_cache1.csv";
        auto out2 = fs::temp_directory_path() / "ergolab_cache2.csv";
        fs::remove(cache);
        std::string base = "arith --density --a 0 --b 2 --N 30000 --sieve-cache " +
                           cache.string() + " --out ";
        CHECK(run_cli(base + out1.string()) == 0);
        CHECK(fs::exists(cache));
        auto stamp = fs::last_write_time(cache);
        CHECK(run_cli(base + out2.string()) == 0);
        CHECK(fs::last_write_time(cache) == stamp);  // reused, not rebuilt
        CHECK(slurp(out1) == slurp(out2));
        for (auto& p : {out1, out2}) {
            fs::remove(p);
            fs::remove(p.string() + ".json");
        }
        fs::remove(cache);
    }

    TEST_CASE("seminorm subcommand reports the H and 2H probe rows") {
        if (binary_path().empty()) return;
        auto out = fs::temp_directory_path() / "ergolab_semi.csv";
        int rc = run_cli(
            "seminorm --set mode=unif --set seq=char:alpha=golden --set N=2000 --set k=1"
            " --set H=8 --out " + out.string());
        CHECK(rc == 0);
        std::string body = slurp(out);
        CHECK(body.find("k,H,value,im_residual,clamp") == 0);
        CHECK(body.find("\r\n1,8,") != std::string::npos);
        CHECK(body.find("\r\n1,16,") != std::string::npos);
        fs::remove(out);
        fs::remove(out.string() + ".json");
    }
}
