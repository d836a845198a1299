#pragma once

#include <vector>

#include "ergolab/core.hpp"

namespace ergolab {

// In-place iterative radix-2 FFT.  sign = -1 gives the forward transform
// sum_n f(n) e(-n xi / N), sign = +1 the unnormalized inverse.
inline void fft_pow2(std::vector<cplx>& a, int sign) {
    size_t n = a.size();
    require(n && (n & (n - 1)) == 0, ErrorCode::validation, "fft size must be a power of 2");
    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (size_t len = 2; len <= n; len <<= 1) {
        double ang = sign * 2.0 * M_PI / (double)len;
        cplx wl(std::cos(ang), std::sin(ang));
        for (size_t i = 0; i < n; i += len) {
            cplx w(1.0, 0.0);
            for (size_t j = 0; j < len / 2; ++j) {
                cplx u = a[i + j];
                cplx v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

// Evaluates P(t) = sum_{|j|<=D} c_j e(j t) at the M uniform points t = i/M,
// M a power of two with M > 2D, via one inverse FFT.  coeff[k] holds c_{k-D}
// for k = 0..2D.
inline std::vector<cplx> eval_on_uniform_grid(const std::vector<cplx>& coeff, int D, size_t M) {
    require((int)coeff.size() == 2 * D + 1, ErrorCode::validation, "coefficient size mismatch");
    require(M > 2 * (size_t)D && (M & (M - 1)) == 0, ErrorCode::validation,
            "grid must be a power of 2 exceeding twice the degree");
    std::vector<cplx> spec(M, cplx(0.0, 0.0));
    for (int j = -D; j <= D; ++j) {
        size_t slot = (j >= 0) ? (size_t)j : M - (size_t)(-j);
        spec[slot] += coeff[(size_t)(j + D)];
    }
    fft_pow2(spec, +1);  // sum_j spec[j] e(+i j / M) at position i
    return spec;
}

}  // namespace ergolab
