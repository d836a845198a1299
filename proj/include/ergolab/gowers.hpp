#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "ergolab/core.hpp"
#include "ergolab/sequences.hpp"

namespace ergolab {

// A function Z_N^d -> C stored densely; index arithmetic is componentwise
// mod N, coordinates 0-based, last coordinate fastest.
class FiniteGridFn {
public:
    FiniteGridFn(int64_t modulus, int arity)
        : modulus_(modulus), arity_(arity) {
        require(modulus >= 1, ErrorCode::validation, "grid modulus must be >= 1");
        require(arity >= 1 && arity <= kMaxArity, ErrorCode::validation,
                "grid arity out of range");
        __int128 sz = 1;
        for (int i = 0; i < arity; ++i) {
            sz *= modulus;
            require(sz <= (1LL << 32), ErrorCode::validation, "grid too large");
        }
        values_.assign((size_t)sz, cplx(0.0, 0.0));
    }

    int64_t modulus() const { return modulus_; }
    int arity() const { return arity_; }
    int64_t size() const { return (int64_t)values_.size(); }

    std::vector<cplx>& values() { return values_; }
    const std::vector<cplx>& values() const { return values_; }

    cplx& at_linear(int64_t i) { return values_[(size_t)i]; }
    cplx at_linear(int64_t i) const { return values_[(size_t)i]; }

    // value at an arbitrary integer point, reduced mod N componentwise
    cplx at(std::span<const int64_t> n) const {
        return values_[(size_t)linear_mod(n)];
    }
    void set(std::span<const int64_t> n, cplx v) { values_[(size_t)linear_mod(n)] = v; }

    int64_t linear_mod(std::span<const int64_t> n) const {
        int64_t idx = 0;
        for (int i = 0; i < arity_; ++i) {
            int64_t c = n[(size_t)i] % modulus_;
            if (c < 0) c += modulus_;
            idx = idx * modulus_ + c;
        }
        return idx;
    }

    cplx mean() const {
        KahanC acc;
        for (auto v : values_) acc.add(v);
        return acc.value() / (double)values_.size();
    }

    // pointwise f(n) * conj(f(n+h)), h given as a linear description
    FiniteGridFn mul_conj_shift(std::span<const int64_t> h) const {
        FiniteGridFn g(modulus_, arity_);
        int64_t n[kMaxArity], m[kMaxArity];
        for (int64_t i = 0; i < size(); ++i) {
            decompose(i, n);
            for (int c = 0; c < arity_; ++c) m[c] = n[c] + h[(size_t)c];
            g.at_linear(i) = values_[(size_t)i] * std::conj(at(std::span<const int64_t>(m, (size_t)arity_)));
        }
        return g;
    }

    void decompose(int64_t linear, int64_t* out) const {
        for (int i = arity_ - 1; i >= 0; --i) {
            out[i] = linear % modulus_;
            linear /= modulus_;
        }
    }

private:
    int64_t modulus_;
    int arity_;
    std::vector<cplx> values_;
};

inline FiniteGridFn grid_from_fn(int64_t N, int d, const std::function<cplx(std::span<const int64_t>)>& f) {
    FiniteGridFn g(N, d);
    int64_t n[kMaxArity];
    for (int64_t i = 0; i < g.size(); ++i) {
        g.decompose(i, n);
        g.at_linear(i) = f(std::span<const int64_t>(n, (size_t)d));
    }
    return g;
}

inline constexpr int64_t kDefaultGowersOpBudget = (int64_t)1 << 30;

namespace detail {

// U^s(f)^{2^s} via the inductive definition; always a nonnegative real
// because the base case is |E f|^2 and every level averages those.
inline double gowers_pow(const FiniteGridFn& f, int s) {
    if (s == 1) {
        cplx m = f.mean();
        return std::norm(m);
    }
    const int64_t S = f.size();
    int64_t h[kMaxArity];
    Kahan acc;
    for (int64_t i = 0; i < S; ++i) {
        f.decompose(i, h);
        FiniteGridFn g = f.mul_conj_shift(std::span<const int64_t>(h, (size_t)f.arity()));
        acc.add(gowers_pow(g, s - 1));
    }
    return acc.sum / (double)S;
}

}  // namespace detail

// cost model of the inductive cube evaluation: N^{d(s+1)} multiply-adds
inline __int128 gowers_cost(int64_t N, int d, int s) {
    __int128 c = 1;
    for (int i = 0; i < d * (s + 1); ++i) {
        c *= N;
        if (c > ((__int128)1 << 100)) return c;
    }
    return c;
}

// Gowers U^s(Z_N^d) norm by the inductive definition
//   U^1(f) = |E_n f(n)|,   U^{s+1}(f)^{2^{s+1}} = E_h U^s(f . conj f_h)^{2^s}.
inline double gowers_norm(const FiniteGridFn& f, int s,
                          int64_t op_budget = kDefaultGowersOpBudget) {
    require(s >= 1 && s <= 20, ErrorCode::validation, "gowers order out of range");
    require(gowers_cost(f.modulus(), f.arity(), s) <= op_budget,
            ErrorCode::gowers_budget_exceeded,
            "gowers cube evaluation budget exceeded (the U^2 spectral path may still fit)");
    double p = detail::gowers_pow(f, s);
    return std::pow(std::max(0.0, p), 1.0 / (double)(1LL << s));
}

// Exact spectral evaluation of U^2:
//   U^2(f)^4 = N^{-4d} * sum_xi |fhat(xi)|^4,
// fhat(xi) = sum_n f(n) e(-n.xi/N) computed dimension by dimension.
inline double gowers_u2_spectral(const FiniteGridFn& f) {
    const int64_t N = f.modulus();
    const int d = f.arity();
    std::vector<cplx> data(f.values());
    // one-dimensional DFTs along each axis
    std::vector<cplx> twiddle((size_t)N * (size_t)N);
    for (int64_t k = 0; k < N; ++k)
        for (int64_t n = 0; n < N; ++n)
            twiddle[(size_t)(k * N + n)] = e(-(double)((k * n) % N) / (double)N);
    int64_t total = f.size();
    std::vector<cplx> line((size_t)N), out((size_t)N);
    for (int axis = d - 1; axis >= 0; --axis) {
        // stride of this axis in the linear layout (last axis fastest)
        int64_t stride = 1;
        for (int i = axis + 1; i < d; ++i) stride *= N;
        int64_t nlines = total / N;
        for (int64_t l = 0; l < nlines; ++l) {
            // base index of the l-th line along `axis`
            int64_t inner = l % stride;
            int64_t outer = l / stride;
            int64_t base = outer * stride * N + inner;
            for (int64_t n = 0; n < N; ++n) line[(size_t)n] = data[(size_t)(base + n * stride)];
            for (int64_t k = 0; k < N; ++k) {
                KahanC s;
                const cplx* tw = &twiddle[(size_t)(k * N)];
                for (int64_t n = 0; n < N; ++n) s.add(line[(size_t)n] * tw[n]);
                out[(size_t)k] = s.value();
            }
            for (int64_t k = 0; k < N; ++k) data[(size_t)(base + k * stride)] = out[(size_t)k];
        }
    }
    Kahan sum4;
    for (auto v : data) {
        double m2 = std::norm(v);
        sum4.add(m2 * m2);
    }
    double scale = std::pow((double)N, 4.0 * d);
    return std::pow(sum4.sum / scale, 0.25);
}

// |E_n a|^2 and E_h E_n a(n+h) conj a(n): on Z_N^d these agree exactly, and
// |E a|^2 <= E_h |E_n a(n+h) conj a(n)| follows.  Both sides are returned so
// tests and reports can assert the identity at float precision.
struct VdcIdentity {
    double lhs;        // |E_n a|^2
    cplx rhs_signed;   // E_h E_n a(n+h) conj a(n)
    double rhs_abs;    // E_h |E_n a(n+h) conj a(n)|
};

inline VdcIdentity van_der_corput_identity(const FiniteGridFn& f) {
    const int64_t S = f.size();
    VdcIdentity r{};
    r.lhs = std::norm(f.mean());
    int64_t h[kMaxArity];
    KahanC signed_acc;
    Kahan abs_acc;
    for (int64_t i = 0; i < S; ++i) {
        f.decompose(i, h);
        // E_n a(n+h) conj a(n)
        int64_t n[kMaxArity], m[kMaxArity];
        KahanC inner;
        for (int64_t j = 0; j < S; ++j) {
            f.decompose(j, n);
            for (int c = 0; c < f.arity(); ++c) m[c] = n[c] + h[c];
            inner.add(f.at(std::span<const int64_t>(m, (size_t)f.arity())) * std::conj(f.at_linear(j)));
        }
        cplx v = inner.value() / (double)S;
        signed_acc.add(v);
        abs_acc.add(std::abs(v));
    }
    r.rhs_signed = signed_acc.value() / (double)S;
    r.rhs_abs = abs_acc.sum / (double)S;
    return r;
}

}  // namespace ergolab
