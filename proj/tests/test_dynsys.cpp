#include "doctest.h"

#include <cmath>

#include "ergolab/gowers.hpp"
#include "ergolab/torus_systems.hpp"
#include "support/oracles.hpp"

using namespace ergolab;

namespace {
const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
const double root2m1 = std::sqrt(2.0) - 1.0;
const double root3m1 = std::sqrt(3.0) - 1.0;

PolynomialMapping iterate_linear(int component, int codim) {
    return PolynomialMapping::coordinate(1, codim, component, 0, 1);
}
PolynomialMapping iterate_power(int component, int codim, int power) {
    return PolynomialMapping::coordinate(1, codim, component, 0, power);
}
}  // namespace

TEST_CASE("system validation rejects bad inputs") {
    AffineTorusMap bad;
    bad.a = {{2, 0}, {0, 1}};
    bad.b = {0.0, 0.0};
    CHECK_THROWS_AS(CommutingTorusSystem(2, {bad}, 16), Error);
    // non-commuting skews: c1 a2 != c2 a1 mod 1
    AffineTorusMap s1, s2;
    s1.a = {{1, 0}, {1, 1}};
    s1.b = {golden, 0.0};
    s2.a = {{1, 0}, {1, 1}};
    s2.b = {root2m1, 0.0};
    CHECK_THROWS_AS(CommutingTorusSystem(2, {s1, s2}, 16), Error);
    CHECK_NOTHROW(CommutingTorusSystem(2, {s1, s1}, 16));
}

TEST_CASE("unipotent powers: closed form vs repeated multiplication, negative powers") {
    IntMat a = {{1, 0, 0}, {2, 1, 0}, {1, 3, 1}};
    IntMat acc = int_identity(3);
    for (int n = 0; n <= 7; ++n) {
        CHECK(int_equal(unipotent_pow(a, n), acc));
        acc = int_mul(acc, a);
    }
    CHECK(int_equal(int_mul(unipotent_pow(a, -3), unipotent_pow(a, 3)), int_identity(3)));
    // geometric sum cocycle: G(n+1) = G(n) + A^n
    for (int n : {-4, -1, 0, 1, 5}) {
        IntMat lhs = unipotent_geom(a, n + 1);
        IntMat rhs = unipotent_geom(a, n);
        IntMat an = unipotent_pow(a, n);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                CHECK(lhs[(size_t)i][(size_t)j] ==
                      rhs[(size_t)i][(size_t)j] + an[(size_t)i][(size_t)j]);
    }
}

TEST_CASE("compose_iterate: rotation character picks up the phase e(n alpha)") {
    auto sys = CommutingTorusSystem::rotation1(golden);
    auto f = TrigPoly::character({1});
    int64_t nv[1] = {41};
    TrigPoly g = compose_iterate(sys, f, std::span<const int64_t>(nv, 1));
    CHECK(g.term_count() == 1);
    cplx c = g.coeffs().begin()->second;
    CHECK(std::abs(c - oracles::unit_phase(41.0L * (long double)golden)) < 1e-12);
    CHECK(g.coeffs().begin()->first == std::vector<int64_t>{1});
    int64_t zero[1] = {0};
    TrigPoly same = compose_iterate(sys, f, std::span<const int64_t>(zero, 1));
    CHECK(same.coeffs() == f.coeffs());
}

TEST_CASE("compose_iterate: the skew grows the x-frequency linearly") {
    auto sys = CommutingTorusSystem::skew(0.0);  // T(x,y) = (x, y+x)
    auto f = TrigPoly::character({0, 1});        // e(y)
    int64_t nv[1] = {6};
    TrigPoly g = compose_iterate(sys, f, std::span<const int64_t>(nv, 1));
    REQUIRE(g.term_count() == 1);
    CHECK(g.coeffs().begin()->first == std::vector<int64_t>{6, 1});
    CHECK(std::abs(g.coeffs().begin()->second - cplx(1.0, 0.0)) < 1e-12);
}

TEST_CASE("measure preservation at quadrature level") {
    auto sys = CommutingTorusSystem::skew(golden, 0.3, 32);
    TrigPoly f(2);
    f.add_term({1, 0}, cplx(0.5, 0.0));
    f.add_term({0, 2}, cplx(0.0, 0.3));
    f.add_term({0, 0}, cplx(0.25, 0.0));
    int64_t one[1] = {1};
    TrigPoly g = compose_iterate(sys, f, std::span<const int64_t>(one, 1));
    auto grid_f = render_grid(f, 32);
    auto grid_g = render_grid(g, 32);
    CHECK(std::abs(grid_f.quadrature_mean() - grid_g.quadrature_mean()) < 1e-12);
    CHECK(std::abs(f.integral() - g.integral()) < 1e-15);
}

TEST_CASE("weighted average: single rotation with unit weight reduces to the geometric sum") {
    auto sys = CommutingTorusSystem::rotation1(golden, 16);
    AverageSpec spec;
    spec.system = &sys;
    spec.functions = {TrigPoly::character({1})};
    spec.iterates = {iterate_linear(0, 1)};
    spec.window_arity = 1;
    auto w = seq_constant(1, 1.0);
    auto res = weighted_multiple_average(spec, w, FolnerWindow::box1(5000));
    cplx expect = oracles::geometric_average(golden, 5000);
    CHECK(res.l2_exact == doctest::Approx(std::abs(expect)).epsilon(1e-10));
    CHECK(res.l2_quadrature == doctest::Approx(res.l2_exact).epsilon(1e-9));
    CHECK(res.l2_exact <= 2.0 / (5000.0 * dist_to_int(golden)));
}

TEST_CASE("weighted average: constant function gives back the weight average") {
    auto sys = CommutingTorusSystem::rotation1(golden, 8);
    AverageSpec spec;
    spec.system = &sys;
    spec.functions = {TrigPoly::constant(1, 1.0)};
    spec.iterates = {iterate_linear(0, 1)};
    spec.window_arity = 1;
    auto res = weighted_multiple_average(spec, seq_constant(1, 1.0), FolnerWindow::box1(100));
    CHECK(res.l2_exact == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("weighted average: (-1)^n against the half rotation aligns phases") {
    auto sys = CommutingTorusSystem::rotation1(0.5, 16);
    AverageSpec spec;
    spec.system = &sys;
    spec.functions = {TrigPoly::character({1})};
    spec.iterates = {iterate_linear(0, 1)};
    spec.window_arity = 1;
    auto alt = make_seq1([](int64_t n) { return cplx((n % 2) ? -1.0 : 1.0, 0.0); }, 1.0);
    auto res = weighted_multiple_average(spec, alt, FolnerWindow::box1(2000));
    // (-1)^n e(n/2) = 1, so the average is exactly e(x)
    CHECK(res.l2_exact == doctest::Approx(1.0).epsilon(1e-12));
    REQUIRE(res.average.term_count() == 1);
    CHECK(res.average.coeffs().begin()->first == std::vector<int64_t>{1});
}

TEST_CASE("weighted average bound: L2 norm never exceeds sup|w| prod sup|f_i|") {
    Rng rng(31);
    auto sys = CommutingTorusSystem::rotations({golden, root2m1}, 8);
    AverageSpec spec;
    spec.system = &sys;
    TrigPoly f1(2), f2(2);
    f1.add_term({1, 0}, cplx(0.7, 0.1));
    f1.add_term({0, 1}, cplx(0.0, 0.4));
    f2.add_term({2, -1}, cplx(0.3, 0.0));
    f2.add_term({0, 0}, cplx(0.5, 0.0));
    spec.functions = {f1, f2};
    spec.iterates = {iterate_linear(0, 2), iterate_power(1, 2, 2)};
    spec.window_arity = 1;
    uint64_t seed = rng.next_u64();
    auto noise = make_seq1([seed](int64_t n) { Rng r(seed ^ (uint64_t)n); return r.disk(); }, 1.0);
    auto res = weighted_multiple_average(spec, noise, FolnerWindow::box1(500));
    CHECK(res.l2_exact <= 1.0 * f1.sup_bound() * f2.sup_bound() + 1e-12);
}

TEST_CASE("correlation sequence of a rotation is the pure phase e(n alpha)") {
    CorrelationSpec cs;
    cs.system = std::make_shared<CommutingTorusSystem>(CommutingTorusSystem::rotation1(golden, 16));
    cs.f0 = TrigPoly::character({-1});  // e(-x)
    cs.functions = {TrigPoly::character({1})};
    cs.iterates = {iterate_linear(0, 1)};
    cs.window_arity = 1;
    auto a = correlation_sequence(cs);
    CHECK(a.bound == doctest::Approx(1.0));
    for (int64_t n : {1, 7, 1000})
        CHECK(std::abs(a.at1(n) - oracles::unit_phase((long double)n * (long double)golden)) <
              1e-12);
}

TEST_CASE("correlation sequence vanishes for zero-mean data under a single rotation") {
    CorrelationSpec cs;
    cs.system = std::make_shared<CommutingTorusSystem>(CommutingTorusSystem::rotation1(golden, 16));
    cs.f0 = TrigPoly::constant(1, 1.0);
    cs.functions = {TrigPoly::character({3})};
    cs.iterates = {iterate_linear(0, 1)};
    cs.window_arity = 1;
    auto a = correlation_sequence(cs);
    for (int64_t n : {1, 2, 50}) CHECK(std::abs(a.at1(n)) < 1e-15);
}

TEST_CASE("three commuting rotations: the 3-variable correlation is an exact product of phases") {
    CorrelationSpec cs;
    cs.system = std::make_shared<CommutingTorusSystem>(
        CommutingTorusSystem::rotations({golden, root2m1, root3m1}, 8));
    cs.f0 = TrigPoly::character({-1, -1, -1});
    cs.functions = {TrigPoly::character({1, 0, 0}), TrigPoly::character({0, 1, 0}),
                    TrigPoly::character({0, 0, 1})};
    cs.iterates = {PolynomialMapping::coordinate(3, 3, 0, 0),
                   PolynomialMapping::coordinate(3, 3, 1, 1),
                   PolynomialMapping::coordinate(3, 3, 2, 2)};
    cs.window_arity = 3;
    auto a = correlation_sequence(cs);
    int64_t n[3] = {5, 7, 11};
    cplx got = a.eval(std::span<const int64_t>(n, 3));
    cplx expect = oracles::unit_phase(5.0L * (long double)golden + 7.0L * (long double)root2m1 +
                                      11.0L * (long double)root3m1);
    CHECK(std::abs(got - expect) < 1e-12);
}

TEST_CASE("correlation sequence agrees with grid quadrature when Q clears the frequencies") {
    CorrelationSpec cs;
    cs.system = std::make_shared<CommutingTorusSystem>(CommutingTorusSystem::skew(golden, 0.0, 64));
    cs.f0 = TrigPoly::character({1, -1});
    cs.functions = {TrigPoly::character({0, 1})};
    cs.iterates = {iterate_linear(0, 1)};
    cs.window_arity = 1;
    auto a = correlation_sequence(cs);
    for (int64_t n : {1, 3, 9}) {
        int64_t nv[1] = {n};
        TrigPoly composed =
            compose_iterate(*cs.system, cs.functions[0], std::span<const int64_t>(nv, 1));
        TrigPoly prod = cs.f0 * composed;
        auto grid = render_grid(prod, 64);
        CHECK(std::abs(grid.quadrature_mean() - a.at1(n)) < 1e-10);
    }
}

TEST_CASE("hk seminorm: rotation closed forms") {
    auto sys = CommutingTorusSystem::rotation1(golden, 16);
    auto f = TrigPoly::character({1});
    auto r1 = hk_seminorm(sys, f, 1, 10000);
    CHECK(r1.value < 1e-3);
    auto r2 = hk_seminorm(sys, f, 2, 10000);
    CHECK(r2.value == doctest::Approx(1.0).epsilon(1e-2));
    auto c = TrigPoly::constant(1, cplx(0.0, -0.7));
    for (int k = 1; k <= 3; ++k)
        CHECK(hk_seminorm(sys, c, k, 200).value == doctest::Approx(0.7).epsilon(1e-9));
}

TEST_CASE("hk seminorm: recursion matches the spectral closed form for rotations") {
    auto sys = CommutingTorusSystem::rotation1(golden, 16);
    TrigPoly f(1);
    f.add_term({1}, cplx(0.8, 0.0));
    f.add_term({2}, cplx(0.0, 0.5));
    f.add_term({-1}, cplx(0.2, 0.1));
    double sum4 = 0.0;
    for (auto& [k, c] : f.coeffs()) sum4 += std::norm(c) * std::norm(c);
    double expect = std::pow(sum4, 0.25);
    auto r2 = hk_seminorm(sys, f, 2, 10000);
    CHECK(r2.value == doctest::Approx(expect).epsilon(1e-2));
}

TEST_CASE("hk seminorm monotonicity in k and domination by the sup bound") {
    auto sys = CommutingTorusSystem::rotation1(golden, 16);
    TrigPoly f(1);
    f.add_term({1}, cplx(0.6, 0.0));
    f.add_term({0}, cplx(0.3, 0.0));
    f.add_term({-2}, cplx(0.0, 0.2));
    auto r1 = hk_seminorm(sys, f, 1, 2000);
    auto r2 = hk_seminorm(sys, f, 2, 2000);
    auto r3 = hk_seminorm(sys, f, 3, 900);
    CHECK(r1.value <= r2.value + 1e-3);
    CHECK(r2.value <= r3.value + 1e-2);
    CHECK(r3.value <= f.sup_bound() + 1e-9);
    CHECK(r1.clamp == 0.0);
}

TEST_CASE("hk seminorm budget guard") {
    auto sys = CommutingTorusSystem::rotation1(golden, 16);
    auto f = TrigPoly::character({1});
    CHECK_THROWS_AS(hk_seminorm(sys, f, 3, 10000), Error);
}

TEST_CASE("cauchy probe: zero-mean character under one rotation decays like 1/N") {
    auto sys = CommutingTorusSystem::rotation1(golden, 8);
    AverageSpec spec;
    spec.system = &sys;
    spec.functions = {TrigPoly::character({1})};
    spec.iterates = {iterate_linear(0, 1)};
    spec.window_arity = 1;
    // the deltas oscillate with N as the geometric sums beat against the
    // continued-fraction convergents; N = 300 is a horizon where the trend
    // holds cleanly (frozen after probing the oracle)
    auto probe = cauchy_convergence_probe(spec, seq_constant(1, 1.0), 300);
    CHECK(probe.cauchy_trend);
    cplx a1 = oracles::geometric_average(golden, 300);
    cplx a2 = oracles::geometric_average(golden, 600);
    cplx a4 = oracles::geometric_average(golden, 1200);
    CHECK(probe.delta_n == doctest::Approx(std::abs(a1 - a2)).epsilon(1e-9));
    CHECK(probe.delta_2n == doctest::Approx(std::abs(a2 - a4)).epsilon(1e-9));
}

TEST_CASE("cauchy probe: constants give zero deltas") {
    auto sys = CommutingTorusSystem::rotation1(golden, 8);
    AverageSpec spec;
    spec.system = &sys;
    spec.functions = {TrigPoly::constant(1, 1.0)};
    spec.iterates = {iterate_linear(0, 1)};
    spec.window_arity = 1;
    auto probe = cauchy_convergence_probe(spec, seq_constant(1, 1.0), 200);
    CHECK(probe.delta_n < 1e-13);
    CHECK(probe.delta_2n < 1e-13);
}

TEST_CASE("cauchy probe: commuting rotations with iterates n and n^2 (frozen instance)") {
    auto sys = CommutingTorusSystem::rotations({root2m1, root3m1}, 8);
    AverageSpec spec;
    spec.system = &sys;
    spec.functions = {TrigPoly::character({1, 0}), TrigPoly::character({0, 1})};
    spec.iterates = {iterate_linear(0, 2), iterate_power(1, 2, 2)};
    spec.window_arity = 1;
    auto probe = cauchy_convergence_probe(spec, seq_constant(1, 1.0), 1000);
    CHECK(probe.delta_2n < probe.delta_n);
    auto weyl = [&](int64_t N) {
        cplx s = 0.0;
        for (int64_t n = 1; n <= N; ++n)
            s += oracles::unit_phase((long double)n * (long double)root2m1 +
                                     (long double)n * (long double)n * (long double)root3m1);
        return s / (double)N;
    };
    CHECK(probe.delta_n == doctest::Approx(std::abs(weyl(1000) - weyl(2000))).epsilon(1e-8));
}

TEST_CASE("desk analogue of the uniformity-controls-averages bound on wrapped instances") {
    // Z_N-wrapped weight, linear iterates, k = s: the L2 norm of the
    // weighted average is at most 4 ||w||_{U^{s+1}(Z_N)} plus grid slack
    const int64_t n_mod = 32;
    Rng rng(77);
    for (int rep = 0; rep < 4; ++rep) {
        uint64_t seed = rng.next_u64();
        auto grid = grid_from_fn(n_mod, 1, [seed](std::span<const int64_t> n) {
            Rng r(seed ^ (uint64_t)(1000003 * n[0]));
            return r.disk();
        });
        auto w = make_seq1(
            [grid](int64_t n) {
                int64_t idx[1] = {n};
                return grid.at(std::span<const int64_t>(idx, 1));
            },
            1.0, "wrapped");

        const int s = 2;
        auto sys = CommutingTorusSystem::rotations({3.0 / (double)n_mod, 5.0 / (double)n_mod}, 8);
        AverageSpec spec;
        spec.system = &sys;
        spec.functions = {TrigPoly::character({1, 0}), TrigPoly::character({0, 1})};
        spec.iterates = {iterate_linear(0, 2), iterate_linear(1, 2)};
        spec.window_arity = 1;
        auto res = weighted_multiple_average_poly(spec, w, FolnerWindow::box1(n_mod));
        double lhs = res.l2_norm();
        double rhs = 4.0 * gowers_norm(grid, s + 1);
        CHECK(lhs <= rhs + 1e-9);
    }
}

TEST_CASE("frequency overflow guards throw the typed error") {
    // a 4-step nilpotent chain makes C(n,3) appear in A^n; n = 2^40 overflows
    IntMat chain = int_identity(4);
    chain[1][0] = chain[2][1] = chain[3][2] = 1;
    CHECK_THROWS_AS(unipotent_pow(chain, (int64_t)1 << 40), Error);
    try {
        unipotent_pow(chain, (int64_t)1 << 40);
    } catch (const Error& err) {
        CHECK(err.code() == ErrorCode::frequency_overflow);
    }
    // polynomial iterate evaluation overflows the same way
    auto p = PolynomialMapping::coordinate(1, 1, 0, 0, 9);
    int64_t n[1] = {10000};
    int64_t out[1];
    CHECK_THROWS_AS(p.eval(std::span<const int64_t>(n, 1), std::span<int64_t>(out, 1)), Error);
}
