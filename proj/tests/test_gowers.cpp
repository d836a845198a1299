#include "doctest.h"

#include <cmath>

#include "ergolab/gowers.hpp"
#include "support/oracles.hpp"

using namespace ergolab;

namespace {

FiniteGridFn character_grid(int64_t n_mod, int64_t k) {
    return grid_from_fn(n_mod, 1, [n_mod, k](std::span<const int64_t> n) {
        return e((double)((k * n[0]) % n_mod) / (double)n_mod);
    });
}

FiniteGridFn random_grid(int64_t n_mod, int d, uint64_t seed) {
    return grid_from_fn(n_mod, d, [seed](std::span<const int64_t> n) {
        uint64_t h = seed;
        for (auto c : n) h = h * 1000003ULL + (uint64_t)c + 1;
        Rng r(h);
        return r.disk();
    });
}

}  // namespace

TEST_CASE("gowers norm of the constant function is 1 at every order") {
    auto f = grid_from_fn(12, 1, [](std::span<const int64_t>) { return cplx(1.0, 0.0); });
    for (int s = 1; s <= 3; ++s) CHECK(gowers_norm(f, s) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("character: U^1 vanishes, U^s = 1 for s >= 2, against the direct cube sum") {
    auto f = character_grid(16, 3);
    CHECK(gowers_norm(f, 1) < 1e-12);
    CHECK(gowers_norm(f, 2) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(gowers_norm(f, 3) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(oracles::gowers_cube_direct(f.values(), 3) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("quadratic phase at prime modulus: U^2 = N^{-1/4} via the Gauss sum") {
    const int64_t n_mod = 17;
    auto f = grid_from_fn(n_mod, 1, [n_mod](std::span<const int64_t> n) {
        return e((double)((n[0] * n[0]) % n_mod) / (double)n_mod);
    });
    double expect = std::pow((double)n_mod, -0.25);
    CHECK(gowers_norm(f, 2) == doctest::Approx(expect).epsilon(1e-9));
    CHECK(gowers_u2_spectral(f) == doctest::Approx(expect).epsilon(1e-9));
    // the Gauss-sum modulus itself: |fhat(xi)| = sqrt(N) for every xi
    auto hat = oracles::dft_naive(f.values());
    for (auto v : hat) CHECK(std::abs(v) == doctest::Approx(std::sqrt((double)n_mod)).epsilon(1e-9));
}

TEST_CASE("recursive and direct cube evaluations agree on random grids") {
    for (uint64_t seed : {7ULL, 8ULL}) {
        auto f = random_grid(9, 1, seed);
        for (int s = 2; s <= 3; ++s)
            CHECK(gowers_norm(f, s) ==
                  doctest::Approx(oracles::gowers_cube_direct(f.values(), s)).epsilon(1e-10));
    }
}

TEST_CASE("U^2 cube path and spectral path agree to 1e-9 relative on the corpus") {
    for (int64_t n_mod : {5, 8, 17, 32}) {
        auto f = random_grid(n_mod, 1, 100 + (uint64_t)n_mod);
        double cube = gowers_norm(f, 2);
        double spec = gowers_u2_spectral(f);
        CHECK(std::abs(cube - spec) <= 1e-9 * std::max(1.0, std::abs(cube)));
    }
    auto f2 = random_grid(7, 2, 42);
    CHECK(std::abs(gowers_norm(f2, 2) - gowers_u2_spectral(f2)) < 1e-9);
}

TEST_CASE("gowers monotonicity U^s <= U^{s+1} on the random corpus") {
    for (uint64_t seed = 1; seed <= 6; ++seed) {
        auto f = random_grid(seed % 2 ? 16 : 13, 1, seed * 17);
        double u1 = gowers_norm(f, 1), u2 = gowers_norm(f, 2), u3 = gowers_norm(f, 3);
        CHECK(u1 <= u2 + 1e-9);
        CHECK(u2 <= u3 + 1e-9);
    }
    auto f2 = random_grid(6, 2, 5);
    CHECK(gowers_norm(f2, 1) <= gowers_norm(f2, 2) + 1e-9);
    CHECK(gowers_norm(f2, 2) <= gowers_norm(f2, 3) + 1e-9);
}

TEST_CASE("norm axioms: subadditivity, homogeneity, and the U^1 kernel") {
    for (uint64_t seed = 1; seed <= 4; ++seed) {
        auto f = random_grid(11, 1, seed);
        auto g = random_grid(11, 1, seed + 100);
        FiniteGridFn sum(11, 1);
        for (int64_t i = 0; i < sum.size(); ++i)
            sum.at_linear(i) = f.at_linear(i) + g.at_linear(i);
        for (int s = 1; s <= 3; ++s)
            CHECK(gowers_norm(sum, s) <= gowers_norm(f, s) + gowers_norm(g, s) + 1e-9);

        cplx c(0.3, -1.1);
        FiniteGridFn scaled(11, 1);
        for (int64_t i = 0; i < scaled.size(); ++i) scaled.at_linear(i) = c * f.at_linear(i);
        for (int s = 1; s <= 3; ++s)
            CHECK(gowers_norm(scaled, s) ==
                  doctest::Approx(std::abs(c) * gowers_norm(f, s)).epsilon(1e-9));
    }
    // U^s(f) = 0 for s >= 2 forces f = 0; a mean-zero character has U^1 = 0
    // while U^2 = 1, so only the zero function sits in the higher kernels
    auto chi = character_grid(16, 5);
    CHECK(gowers_norm(chi, 1) < 1e-12);
    CHECK(gowers_norm(chi, 2) > 0.99);
    FiniteGridFn zero(16, 1);
    CHECK(gowers_norm(zero, 2) < 1e-12);
    CHECK(gowers_norm(zero, 3) < 1e-12);
}

TEST_CASE("exact van der Corput identity on Z_N^d") {
    for (uint64_t seed = 1; seed <= 8; ++seed) {
        auto f = (seed % 2) ? random_grid(31, 1, seed) : random_grid(9, 2, seed);
        auto id = van_der_corput_identity(f);
        CHECK(std::abs(id.rhs_signed - cplx(id.lhs, 0.0)) < 1e-12);
        CHECK(id.lhs <= id.rhs_abs + 1e-12);
    }
}

TEST_CASE("cube budget raises the typed error and the spectral path still runs") {
    auto f = random_grid(64, 2, 3);
    CHECK_THROWS_AS(gowers_norm(f, 3, /*op_budget=*/1 << 20), Error);
    CHECK(gowers_u2_spectral(f) > 0.0);
}
