#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "ergolab/arith.hpp"
#include "support/oracles.hpp"

using namespace ergolab;

namespace {
const double golden = (std::sqrt(5.0) - 1.0) / 2.0;

const FactorSieve& shared_sieve() {
    static FactorSieve sieve(200000);
    return sieve;
}
}  // namespace

TEST_CASE("sieve: spf correctness and prime detection") {
    const auto& sv = shared_sieve();
    CHECK(sv.spf(2) == 2);
    CHECK(sv.spf(9) == 3);
    CHECK(sv.spf(91) == 7);
    CHECK(sv.is_prime(97));
    CHECK(!sv.is_prime(91));
    for (int64_t n = 2; n <= 2000; ++n) {
        uint32_t p = sv.spf(n);
        CHECK(n % p == 0);
        CHECK(sv.is_prime(p));
    }
    CHECK_THROWS_AS(sv.spf(300000), Error);
}

TEST_CASE("omega and big_omega against trial division") {
    const auto& sv = shared_sieve();
    CHECK(omega(12, sv) == 2);
    CHECK(big_omega(12, sv) == 3);
    CHECK(omega(30, sv) == 3);
    CHECK(omega(1, sv) == 0);
    CHECK(big_omega(1, sv) == 0);
    for (int64_t n = 1; n <= 5000; ++n) {
        CHECK(omega(n, sv) == oracles::omega_trial(n));
        CHECK(big_omega(n, sv) == oracles::big_omega_trial(n));
    }
}

TEST_CASE("multiplicative evaluation: liouville, f_b, the constant one") {
    const auto& sv = shared_sieve();
    auto liou = mult_liouville();
    CHECK(liou.eval(12, sv).real() == doctest::Approx(-1.0));
    CHECK(liou.eval(1, sv).real() == doctest::Approx(1.0));
    auto f2 = mult_fb(2);
    CHECK(f2.eval(12, sv).real() == doctest::Approx(1.0));  // omega(12) = 2 even
    CHECK(f2.eval(30, sv).real() == doctest::Approx(-1.0));
    auto one = mult_one();
    for (int64_t n : {1, 17, 360}) CHECK(std::abs(one.eval(n, sv) - cplx(1.0, 0.0)) < 1e-15);
    // the with-multiplicity variant of f_2 is the Liouville function
    auto f2m = mult_fb(2, true);
    for (int64_t n = 1; n <= 500; ++n)
        CHECK(std::abs(f2m.eval(n, sv) - liou.eval(n, sv)) < 1e-12);
}

TEST_CASE("multiplicativity on random coprime pairs") {
    const auto& sv = shared_sieve();
    Rng rng(5);
    auto f3 = mult_fb(3);
    auto liou = mult_liouville();
    int done = 0;
    while (done < 10000) {
        int64_t m = 2 + (int64_t)rng.below(400);
        int64_t n = 2 + (int64_t)rng.below(400);
        if (std::gcd(m, n) != 1) continue;
        ++done;
        CHECK(std::abs(f3.eval(m * n, sv) - f3.eval(m, sv) * f3.eval(n, sv)) < 1e-12);
        CHECK(std::abs(liou.eval(m * n, sv) - liou.eval(m, sv) * liou.eval(n, sv)) < 1e-12);
    }
}

TEST_CASE("dirichlet characters: principal and legendre validate; table invariants hold") {
    const auto& sv = shared_sieve();
    auto chi0 = principal_character(6);
    chi0.validate(sv);
    CHECK(std::abs(chi0.eval(5) - cplx(1.0, 0.0)) < 1e-15);
    CHECK(std::abs(chi0.eval(4)) < 1e-15);
    auto leg = legendre_character(7);
    leg.validate(sv);
    CHECK(leg.eval(1).real() == doctest::Approx(1.0));
    CHECK(leg.eval(3).real() == doctest::Approx(-1.0));  // 3 is not a QR mod 7
    CHECK(std::abs(leg.eval(14)) < 1e-15);
    // as_multiplicative agrees with the table
    auto as_mult = leg.as_multiplicative();
    for (int64_t n = 1; n <= 300; ++n)
        CHECK(std::abs(as_mult.eval(n, sv) - leg.eval(n)) < 1e-12);
}

TEST_CASE("S_{a,b} indicator, partition over residues, densities") {
    const auto& sv = shared_sieve();
    CHECK(s_ab_indicator(12, 0, 2, sv) == 1);  // omega even
    CHECK(s_ab_indicator(12, 1, 2, sv) == 0);
    for (int64_t n = 1; n <= 2000; ++n) {
        for (int b : {1, 2, 3, 5}) {
            int total = 0;
            for (int a = 0; a < b; ++a) total += s_ab_indicator(n, a, b, sv);
            CHECK(total == 1);
        }
    }
    CHECK(s_ab_density(0, 1, 0, 5000, sv) == doctest::Approx(1.0));
    // shifted sets: n - c must land in N
    double d_shift = s_ab_density(0, 2, 3, 1000, sv);
    int64_t manual = 0;
    for (int64_t n = 4; n <= 1000; ++n)
        if (oracles::omega_trial(n - 3) % 2 == 0) ++manual;
    CHECK(d_shift == doctest::Approx((double)manual / 1000.0));
}

TEST_CASE("key identity: the root-of-unity average equals the S_{a,b} indicator") {
    const auto& sv = shared_sieve();
    // worked examples
    CHECK(std::abs(key_identity_eval(12, 1, 2, sv)) < 1e-12);
    CHECK(key_identity_eval(12, 0, 2, sv).real() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(key_identity_eval(30, 0, 3, sv).real() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(key_identity_eval(100, 0, 1, sv).real() == doctest::Approx(1.0).epsilon(1e-12));
    for (int64_t n = 1; n <= 3000; ++n)
        for (int b = 1; b <= 6; ++b)
            for (int a = 0; a < b; ++a) {
                cplx lhs = key_identity_eval(n, a, b, sv);
                double rhs = (double)s_ab_indicator(n, a, b, sv);
                CHECK(std::abs(lhs - cplx(rhs, 0.0)) < 1e-12);
            }
    // with-multiplicity variant against big_omega
    for (int64_t n = 1; n <= 500; ++n)
        for (int b : {2, 4}) {
            cplx lhs = key_identity_eval(n, 1, b, sv, true);
            double rhs = (sv.big_omega(n) % b == 1) ? 1.0 : 0.0;
            CHECK(std::abs(lhs - cplx(rhs, 0.0)) < 1e-12);
        }
}

TEST_CASE("pretentious distance partials") {
    const auto& sv = shared_sieve();
    auto one = mult_one();
    auto minus = MultiplicativeFunctionSpec{[](int64_t, int) { return cplx(-1.0, 0.0); }, true,
                                            "minus-one"};
    // D(phi, phi) = 0
    CHECK(d_distance_partial(one, one, 1000, sv).squared == doctest::Approx(0.0));
    // four-term worked example: 2 (1/2 + 1/3 + 1/5 + 1/7)
    auto d = d_distance_partial(minus, one, 10, sv);
    CHECK(d.squared == doctest::Approx(2.0 * (0.5 + 1.0 / 3 + 0.2 + 1.0 / 7)).epsilon(1e-12));
    CHECK(d.primes_used == 4);
    // monotone nondecreasing in the cutoff
    double last = 0.0;
    for (int64_t p : {10, 100, 1000, 10000}) {
        double cur = d_distance_partial(minus, one, p, sv).squared;
        CHECK(cur >= last - 1e-15);
        last = cur;
    }
    // unimodular identity: squared distance = sum |phi1(p)-phi2(p)|^2 / (2p)
    auto nit = mult_nit(0.7);
    auto d1 = d_distance_partial(nit, one, 500, sv);
    Kahan alt;
    for (int64_t p = 2; p <= 500; ++p) {
        if (!sv.is_prime(p)) continue;
        alt.add(std::norm(nit.on_prime_power(p, 1) - cplx(1.0, 0.0)) / (2.0 * (double)p));
    }
    CHECK(d1.squared == doctest::Approx(alt.sum).epsilon(1e-12));
}

TEST_CASE("progression averages: constants, periodic characters, aperiodic decay trend") {
    const auto& sv = shared_sieve();
    auto one = mult_one();
    CHECK(std::abs(ap_average(one, 3, 2, 1000, sv) - cplx(1.0, 0.0)) < 1e-15);
    // a 3-periodic character seen at modulus 3 recovers the period
    auto leg3 = legendre_character(3).as_multiplicative();
    CHECK(std::abs(ap_average(leg3, 3, 1, 5000, sv)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(ap_average(leg3, 3, 0, 5000, sv)) < 1e-12);
    // aperiodic f_2: the scan maximum decays with the horizon
    auto f2 = mult_fb(2);
    auto scan4 = aperiodicity_scan(f2, 4, 10000, sv);
    auto scan5 = aperiodicity_scan(f2, 4, 40000, sv);
    CHECK(scan4.rows.size() == 1 + 2 + 3 + 4);
    CHECK(scan5.max_modulus < scan4.max_modulus);
    CHECK_THROWS_AS(ap_average(f2, 3, 0, 100000, sv), Error);  // beyond the sieve
}

TEST_CASE("katai correlations: constants, product phases, quadratic phases") {
    ComplexSeqNd one2 = seq_constant(2, 1.0);
    CHECK(std::abs(katai_correlation(one2, 2, 3, 5, 7, 50, 50) - cplx(1.0, 0.0)) < 1e-13);
    CHECK_THROWS_AS(katai_correlation(one2, 2, 3, 2, 7, 50, 50), Error);

    // product of linear phases: |value| <= product of geometric sums
    ComplexSeqNd phases;
    phases.arity = 2;
    phases.bound = 1.0;
    phases.eval = [](std::span<const int64_t> n) {
        return e_l((long double)n[0] * (long double)golden) *
               e_l((long double)n[1] * (long double)(std::sqrt(2.0) - 1.0));
    };
    int64_t n1 = 400, n2 = 400;
    cplx got = katai_correlation(phases, 2, 3, 5, 7, n1, n2);
    double bound = (2.0 / ((double)n1 * dist_to_int((2.0 - 5.0) * golden))) *
                   (2.0 / ((double)n2 * dist_to_int((3.0 - 7.0) * (std::sqrt(2.0) - 1.0))));
    CHECK(std::abs(got) <= bound);

    // quadratic phase in the first variable (oracle-frozen threshold)
    ComplexSeqNd quad;
    quad.arity = 2;
    quad.bound = 1.0;
    quad.eval = [](std::span<const int64_t> n) {
        return e_l((long double)n[0] * (long double)n[0] * (long double)golden);
    };
    cplx kq = katai_correlation(quad, 2, 3, 5, 7, 1000, 10);
    CHECK(std::abs(kq) < 0.05);

    auto grid = katai_grid(quad, {2, 3, 5, 7}, 200, 5);
    CHECK(grid.rows.size() == 24);
    CHECK(grid.max_modulus < 0.2);
}

TEST_CASE("sieve cache round-trips byte-exactly") {
    auto path = std::filesystem::temp_directory_path() / "ergolab_sieve_test.bin";
    FactorSieve small(5000);
    small.save_cache(path.string());
    auto loaded = FactorSieve::load_cache(path.string());
    REQUIRE(loaded != nullptr);
    CHECK(loaded->n_max() == 5000);
    for (int64_t n = 2; n <= 5000; ++n) CHECK(loaded->spf(n) == small.spf(n));
    // corrupt magic is rejected
    {
        std::FILE* f = std::fopen(path.string().c_str(), "r+b");
        std::fputc('X', f);
        std::fclose(f);
    }
    CHECK(FactorSieve::load_cache(path.string()) == nullptr);
    std::filesystem::remove(path);
}

TEST_CASE("mult_product and the two-adic obstruction scan") {
    const auto& sv = shared_sieve();
    auto liou = mult_liouville();
    auto chi = legendre_character(5);
    auto prod = mult_product(liou, chi.as_multiplicative());
    for (int64_t n = 1; n <= 300; ++n)
        CHECK(std::abs(prod.eval(n, sv) - liou.eval(n, sv) * chi.eval(n)) < 1e-12);
    // twisted distance machinery composes: D(phi chi, n^{it}) as partial sums
    auto d = d_distance_partial(prod, mult_nit(0.3), 1000, sv);
    CHECK(d.squared >= 0.0);
    CHECK(std::isfinite(d.value));

    // liouville with the principal character mod 1 at t = 0:
    // chi(2)^k lambda(2^k) = (-1)^k, and the obstruction wants -1 for all k,
    // so even k show defect 2 and odd k match
    auto scan = halasz_two_adic_scan(liou, principal_character(1), 0.0, 6);
    CHECK(scan.max_defect == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(scan.k_checked == 6);
    // a function engineered to satisfy the obstruction at t = 0 exactly
    MultiplicativeFunctionSpec minus_at_2{
        [](int64_t p, int k) { return cplx(p == 2 ? -1.0 : ((k % 2) ? -1.0 : 1.0), 0.0); },
        false, "minus-at-2"};
    auto scan2 = halasz_two_adic_scan(minus_at_2, principal_character(1), 0.0, 8);
    CHECK(scan2.max_defect < 1e-12);
}
