#pragma once

#include <array>
#include <cmath>

#include "ergolab/core.hpp"

namespace ergolab {

// Element of the 3-dimensional Heisenberg group, coordinates (x, y, z) of
// the upper-unitriangular matrix [[1,x,z],[0,1,y],[0,0,1]].  Group law:
//   (x,y,z).(x',y',z') = (x+x', y+y', z+z'+x*y').
// The scalar is a template parameter so the same code runs in double and in
// the exact-rational test mode.
template <typename S>
struct HeisenbergElementT {
    S x{}, y{}, z{};

    friend HeisenbergElementT operator*(const HeisenbergElementT& a, const HeisenbergElementT& b) {
        return {a.x + b.x, a.y + b.y, a.z + b.z + a.x * b.y};
    }
    HeisenbergElementT inverse() const { return {-x, -y, -z + x * y}; }
    static HeisenbergElementT identity() { return {S(0), S(0), S(0)}; }
};

using HeisenbergElement = HeisenbergElementT<double>;
using HeisenbergElementQ = HeisenbergElementT<Rational>;

// tau^n in closed form: (n a, n b, n c + C(n,2) a b) for tau = (a, b, c).
// Valid for all integers n (C(n,2) = n(n-1)/2), so tau^{-1} matches the
// inverse formula.
template <typename S>
HeisenbergElementT<S> heisenberg_pow(const HeisenbergElementT<S>& tau, int64_t n) {
    S nn = S((double)n);
    S c2 = S((double)binom2(n));
    return {nn * tau.x, nn * tau.y, nn * tau.z + c2 * (tau.x * tau.y)};
}

template <>
inline HeisenbergElementQ heisenberg_pow<Rational>(const HeisenbergElementQ& tau, int64_t n) {
    Rational nn(n);
    Rational c2(binom2(n));
    return {nn * tau.x, nn * tau.y, nn * tau.z + c2 * (tau.x * tau.y)};
}

// two translations commute iff the commutator z-component x1*y2 - x2*y1 vanishes
inline double heisenberg_commutator_defect(const HeisenbergElement& a, const HeisenbergElement& b) {
    return std::abs(a.x * b.y - b.x * a.y);
}

// Reduction to the fundamental domain [0,1)^3 of G/Gamma, Gamma the integer
// lattice.  Deterministic order: q = -floor(y) first, then p = -floor(x),
// then r chosen to land the z-coordinate of g.(p,q,r) in [0,1).  Returns the
// reduced point and the lattice element gamma with g.gamma = point.
struct ReducedPoint {
    std::array<double, 3> point;
    std::array<int64_t, 3> gamma;
};

inline ReducedPoint reduce_fundamental(const HeisenbergElement& g) {
    auto fl = [](double t) { return (int64_t)std::floor(t); };
    // each guard catches rounding onto the closed end of [0,1)
    int64_t q = -fl(g.y);
    double v = g.y + (double)q;
    if (v >= 1.0) { v -= 1.0; q -= 1; }
    if (v < 0.0) { v += 1.0; q += 1; }
    int64_t p = -fl(g.x);
    double u = g.x + (double)p;
    if (u >= 1.0) { u -= 1.0; p -= 1; }
    if (u < 0.0) { u += 1.0; p += 1; }
    double z_pre = g.z + g.x * (double)q;  // z-coordinate of g.(p,q,0)
    int64_t r = -fl(z_pre);
    double w = z_pre + (double)r;
    if (w >= 1.0) { w -= 1.0; r -= 1; }
    if (w < 0.0) { w += 1.0; r += 1; }
    return {{u, v, w}, {p, q, r}};
}

}  // namespace ergolab
