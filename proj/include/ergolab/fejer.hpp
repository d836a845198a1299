#pragma once

#include <vector>

#include "ergolab/core.hpp"
#include "ergolab/fft.hpp"

namespace ergolab {

// ---------------------------------------------------------------------------
// Fejer sandwich: 1-periodic trigonometric polynomials P1, P2 with zero
// constant terms and
//   P1(t) - eps <= 1_{[c,d]}(t) - (d - c) <= P2(t) + eps   on [0,1].
//
// Construction: convolve the indicators of the shrunk interval [c+delta,
// d-delta] and the expanded interval [c-delta, d+delta] with the Fejer
// kernel of degree D, subtract the means.  With delta = eps/6 the kernel
// tail bound 1/(2(D+1)delta) <= eps/2 forces D + 1 >= 6/eps^2, so the degree
// grows like 6/eps^2, which is what the L^1 tail of the Fejer kernel gives.
// ---------------------------------------------------------------------------

// real 1-variable trig polynomial sum_{0<|j|<=D} c_j e(jt), c_{-j} = conj c_j
struct TrigPoly1 {
    int degree = 0;
    std::vector<cplx> coeff;  // index j-(-D)..: c_{-D}..c_{D}; c_0 = 0

    cplx c(int j) const { return coeff[(size_t)(j + degree)]; }

    double eval(double t) const {
        KahanC acc;
        for (int j = -degree; j <= degree; ++j) acc.add(c(j) * e((double)j * t));
        return acc.value().real();
    }

    // values at the M uniform points i/M (M a power of two > 2*degree)
    std::vector<double> eval_uniform(size_t m) const {
        auto vals = eval_on_uniform_grid(coeff, degree, m);
        std::vector<double> out(m);
        for (size_t i = 0; i < m; ++i) out[i] = vals[i].real();
        return out;
    }
};

struct FejerSandwich {
    TrigPoly1 lower;   // P1
    TrigPoly1 upper;   // P2
    int degree = 0;
    double delta = 0.0;
    double grid_margin_lower = 0.0;  // worst slack of the lower inequality on the check grid
    double grid_margin_upper = 0.0;
};

inline constexpr int kDefaultFejerDegreeCap = 20000;

namespace detail {

// coefficients of 1_{[l,r]} * F_D minus its mean (zero constant term)
inline TrigPoly1 fejer_smoothed_indicator(double l, double r, int deg) {
    TrigPoly1 p;
    p.degree = deg;
    p.coeff.assign((size_t)(2 * deg + 1), cplx(0.0, 0.0));
    if (r <= l) return p;  // empty interval: the zero polynomial
    for (int j = 1; j <= deg; ++j) {
        // Fourier coefficient of the indicator: (e(-jl) - e(-jr)) / (2 pi i j)
        cplx ind = (e(-(double)j * l) - e(-(double)j * r)) / cplx(0.0, 2.0 * M_PI * (double)j);
        double taper = 1.0 - (double)j / ((double)deg + 1.0);
        p.coeff[(size_t)(j + deg)] = ind * taper;
        p.coeff[(size_t)(deg - j)] = std::conj(ind * taper);
    }
    return p;
}

}  // namespace detail

// eps > 0, 0 <= c < d < 1, plus the limiting full interval [0,1) for which
// the zero polynomials already work.  Throws DegreeCap when 6/eps^2 exceeds
// the cap.
inline FejerSandwich fejer_sandwich(double c, double d, double eps,
                                    int degree_cap = kDefaultFejerDegreeCap) {
    require(eps > 0.0, ErrorCode::validation, "eps must be positive");
    if (c == 0.0 && d == 1.0) {
        FejerSandwich s;
        s.degree = 1;
        s.lower.degree = s.upper.degree = 1;
        s.lower.coeff.assign(3, cplx(0.0, 0.0));
        s.upper.coeff.assign(3, cplx(0.0, 0.0));
        return s;
    }
    require(0.0 <= c && c < d && d < 1.0, ErrorCode::validation,
            "interval must satisfy 0 <= c < d < 1");
    double delta = eps / 6.0;
    double need = 6.0 / (eps * eps);
    require(need <= (double)degree_cap, ErrorCode::degree_cap,
            "required Fejer degree exceeds the cap");
    int deg = (int)std::ceil(need);

    FejerSandwich s;
    s.degree = deg;
    s.delta = delta;
    s.lower = detail::fejer_smoothed_indicator(c + delta, d - delta, deg);
    s.upper = detail::fejer_smoothed_indicator(std::max(0.0, c - delta),
                                               std::min(1.0 - 1e-15, d + delta), deg);
    return s;
}

// Hard verification of the sandwich on a uniform grid of at least
// `min_points` points (rounded up to a power of two): returns the worst
// margins; both must be >= -1e-12 for the construction to stand.
inline void verify_sandwich(FejerSandwich& s, double c, double d, double eps,
                            size_t min_points = 0) {
    if (min_points == 0) min_points = (size_t)10000 * (size_t)s.degree;
    size_t m = 1;
    while (m < min_points || m <= 2 * (size_t)s.degree) m <<= 1;
    auto lo = s.lower.eval_uniform(m);
    auto up = s.upper.eval_uniform(m);
    double margin_lo = 1e300, margin_up = 1e300;
    double len = d - c;
    for (size_t i = 0; i < m; ++i) {
        double t = (double)i / (double)m;
        double target = ((t >= c && t <= d) ? 1.0 : 0.0) - len;
        margin_lo = std::min(margin_lo, target - (lo[i] - eps));
        margin_up = std::min(margin_up, (up[i] + eps) - target);
    }
    s.grid_margin_lower = margin_lo;
    s.grid_margin_upper = margin_up;
}

}  // namespace ergolab
