#pragma once

#include <algorithm>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ergolab/core.hpp"

namespace ergolab {

// Windowed ops support up to this many variables; enough for every system in
// this laboratory while letting the inner loops use stack buffers.
inline constexpr int kMaxArity = 8;

// A bounded complex-valued sequence on N^d, evaluated lazily.  Evaluation
// must be pure: the same index always yields the same value.  The declared
// sup-bound is checked opportunistically while averaging and a violation
// beyond `bound_tol` is an error, not a clamp.
struct ComplexSeqNd {
    int arity = 1;
    double bound = 1.0;
    std::function<cplx(std::span<const int64_t>)> eval;
    std::string label;

    static constexpr double bound_tol = 1e-9;

    cplx operator()(std::span<const int64_t> n) const { return eval(n); }
    cplx at1(int64_t n) const {
        int64_t buf[1] = {n};
        return eval(std::span<const int64_t>(buf, 1));
    }
    cplx checked_eval(std::span<const int64_t> n) const {
        cplx v = eval(n);
        require(std::abs(v) <= bound + bound_tol, ErrorCode::bound_violation,
                "sequence '" + label + "' exceeds its declared bound");
        return v;
    }
};

inline ComplexSeqNd make_seq1(std::function<cplx(int64_t)> f, double bound,
                              std::string label = "") {
    ComplexSeqNd s;
    s.arity = 1;
    s.bound = bound;
    s.label = std::move(label);
    s.eval = [f = std::move(f)](std::span<const int64_t> n) { return f(n[0]); };
    return s;
}

inline ComplexSeqNd seq_constant(int arity, cplx c) {
    ComplexSeqNd s;
    s.arity = arity;
    s.bound = std::abs(c);
    s.label = "const";
    s.eval = [c](std::span<const int64_t>) { return c; };
    return s;
}

// a(n + h) for a fixed shift h
inline ComplexSeqNd seq_shift(const ComplexSeqNd& a, std::vector<int64_t> h) {
    require((int)h.size() == a.arity, ErrorCode::validation, "shift arity mismatch");
    ComplexSeqNd s;
    s.arity = a.arity;
    s.bound = a.bound;
    s.label = a.label + "+shift";
    s.eval = [a, h = std::move(h)](std::span<const int64_t> n) {
        int64_t m[kMaxArity];
        for (size_t i = 0; i < n.size(); ++i) m[i] = n[i] + h[i];
        return a.eval(std::span<const int64_t>(m, n.size()));
    };
    return s;
}

// a(n) * conj(a(n+h)); the building block of the seminorm recursion
inline ComplexSeqNd seq_mul_conj_shift(const ComplexSeqNd& a, std::vector<int64_t> h) {
    require((int)h.size() == a.arity, ErrorCode::validation, "shift arity mismatch");
    ComplexSeqNd s;
    s.arity = a.arity;
    s.bound = a.bound * a.bound;
    s.label = a.label + "*conj-shift";
    s.eval = [a, h = std::move(h)](std::span<const int64_t> n) {
        int64_t m[kMaxArity];
        for (size_t i = 0; i < n.size(); ++i) m[i] = n[i] + h[i];
        return a.eval(n) * std::conj(a.eval(std::span<const int64_t>(m, n.size())));
    };
    return s;
}

// ---------------------------------------------------------------------------
// FolnerWindow: the offset box  offset + [N_1] x ... x [N_d]  (1-based sides,
// matching the convention [N] = {1,...,N}).  Enumeration is lexicographic
// with the last coordinate varying fastest, and deterministic.
// ---------------------------------------------------------------------------

class FolnerWindow {
public:
    FolnerWindow(std::vector<int64_t> offset, std::vector<int64_t> sides)
        : offset_(std::move(offset)), sides_(std::move(sides)) {
        require(offset_.size() == sides_.size(), ErrorCode::validation,
                "window offset/sides arity mismatch");
        require(!sides_.empty(), ErrorCode::validation, "window needs at least one side");
        require((int)sides_.size() <= kMaxArity, ErrorCode::validation,
                "window arity exceeds supported maximum");
        for (auto o : offset_)
            require(o >= 0, ErrorCode::validation, "window offset must be >= 0");
        for (auto s : sides_)
            require(s >= 1, ErrorCode::validation, "window sides must be >= 1");
    }

    // the box [N] in one dimension
    static FolnerWindow box1(int64_t n, int64_t offset = 0) {
        return FolnerWindow({offset}, {n});
    }
    // the box [N]^d
    static FolnerWindow boxd(int d, int64_t n) {
        return FolnerWindow(std::vector<int64_t>((size_t)d, 0),
                            std::vector<int64_t>((size_t)d, n));
    }

    int arity() const { return (int)sides_.size(); }
    const std::vector<int64_t>& offset() const { return offset_; }
    const std::vector<int64_t>& sides() const { return sides_; }

    int64_t cardinality() const {
        __int128 c = 1;
        for (auto s : sides_) {
            c *= s;
            require(c <= INT64_MAX, ErrorCode::window_too_large, "window cardinality overflow");
        }
        return (int64_t)c;
    }

    // linear index -> point (lexicographic, last coordinate fastest);
    // writes into `out` which must have length arity()
    void point(int64_t linear, std::span<int64_t> out) const {
        for (int i = arity() - 1; i >= 0; --i) {
            int64_t s = sides_[(size_t)i];
            out[(size_t)i] = offset_[(size_t)i] + 1 + (linear % s);
            linear /= s;
        }
    }

private:
    std::vector<int64_t> offset_;
    std::vector<int64_t> sides_;
};

inline constexpr int64_t kDefaultMaxWindowPoints = 1000000000;  // 1e9

// ---------------------------------------------------------------------------
// Windowed averages
// ---------------------------------------------------------------------------

// (1/|w|) sum_{n in w} a(n), compensated summation in lexicographic order.
inline cplx cesaro_average(const ComplexSeqNd& a, const FolnerWindow& w,
                           int64_t max_points = kDefaultMaxWindowPoints) {
    require(w.arity() == a.arity, ErrorCode::validation, "window/sequence arity mismatch");
    int64_t card = w.cardinality();
    require(card <= max_points, ErrorCode::window_too_large,
            "window cardinality exceeds configured maximum");
    const int d = w.arity();
    cplx total = block_sum(card, [&](int64_t i) {
        int64_t n[kMaxArity];
        w.point(i, std::span<int64_t>(n, (size_t)d));
        return a.checked_eval(std::span<const int64_t>(n, (size_t)d));
    });
    return total / (double)card;
}

// sqrt of the windowed average of |a|^2
inline double besicovitch_norm(const ComplexSeqNd& a, const FolnerWindow& w,
                               int64_t max_points = kDefaultMaxWindowPoints) {
    require(w.arity() == a.arity, ErrorCode::validation, "window/sequence arity mismatch");
    int64_t card = w.cardinality();
    require(card <= max_points, ErrorCode::window_too_large,
            "window cardinality exceeds configured maximum");
    const int d = w.arity();
    cplx total = block_sum(card, [&](int64_t i) {
        int64_t n[kMaxArity];
        w.point(i, std::span<int64_t>(n, (size_t)d));
        cplx v = a.checked_eval(std::span<const int64_t>(n, (size_t)d));
        return cplx(std::norm(v), 0.0);
    });
    return std::sqrt(std::max(0.0, total.real() / (double)card));
}

// ---------------------------------------------------------------------------
// Cube correlations and uniformity seminorms
// ---------------------------------------------------------------------------

// order-k tuple of shifts in N^d (all components >= 0)
struct CubeShiftTuple {
    std::vector<std::vector<int64_t>> shifts;  // k shifts, each of length d

    int order() const { return (int)shifts.size(); }

    void validate(int d) const {
        require(!shifts.empty(), ErrorCode::validation, "cube shift tuple of order 0");
        for (auto& h : shifts) {
            require((int)h.size() == d, ErrorCode::validation, "shift arity mismatch");
            for (auto c : h)
                require(c >= 0, ErrorCode::validation, "cube shifts must be componentwise >= 0");
        }
    }
};

// Finite truncation of cor(a; h_1..h_k):
//   (1/|w|) sum_{n in w} prod_{eps in {0,1}^k} conj^{|eps|} a(n + eps.h)
inline cplx correlation_cube(const ComplexSeqNd& a, const FolnerWindow& w,
                             const CubeShiftTuple& h,
                             int64_t max_points = kDefaultMaxWindowPoints) {
    require(w.arity() == a.arity, ErrorCode::validation, "window/sequence arity mismatch");
    h.validate(a.arity);
    const int k = h.order();
    const int d = a.arity;
    require(k <= 20, ErrorCode::validation, "cube order too large");
    int64_t card = w.cardinality();
    require(card <= max_points, ErrorCode::window_too_large,
            "window cardinality exceeds configured maximum");

    // eps.h for all 2^k vertices
    const uint64_t corners = 1ULL << k;
    std::vector<int64_t> vshift(corners * (size_t)d, 0);
    std::vector<int> vparity(corners, 0);
    for (uint64_t eps = 0; eps < corners; ++eps) {
        int par = 0;
        for (int j = 0; j < k; ++j) {
            if (eps & (1ULL << j)) {
                ++par;
                for (int c = 0; c < d; ++c)
                    vshift[eps * (size_t)d + (size_t)c] += h.shifts[(size_t)j][(size_t)c];
            }
        }
        vparity[eps] = par & 1;
    }

    cplx total = block_sum(card, [&](int64_t i) {
        int64_t n[kMaxArity], m[kMaxArity];
        w.point(i, std::span<int64_t>(n, (size_t)d));
        cplx prod = 1.0;
        for (uint64_t eps = 0; eps < corners; ++eps) {
            for (int c = 0; c < d; ++c) m[c] = n[c] + vshift[eps * (size_t)d + (size_t)c];
            cplx v = a.checked_eval(std::span<const int64_t>(m, (size_t)d));
            prod *= vparity[eps] ? std::conj(v) : v;
        }
        return prod;
    });
    return total / (double)card;
}

struct SeminormDiagnostics {
    cplx raw_mean;         // shift-averaged cube correlation before clamping
    double im_residual;    // |Im| of the raw mean
    double clamp;          // amount removed by clamping Re at 0
    int64_t shift_tuples;  // number of shift tuples averaged
};

struct SeminormResult {
    double value = 0.0;
    SeminormDiagnostics diag{};
};

inline constexpr int64_t kDefaultSeminormOpBudget = 2000000000;  // evaluation ops

// Finite estimate of the order-k uniformity seminorm along the window:
//   ( H^{-dk} sum_{h_1..h_k in [H]^d} cor_w(a; h) )^{1/2^k},
// shifts running over {1,...,H}^d.  The limit is real nonnegative; the
// finite estimate need not be, so Re is clamped at 0 and the clamped mass
// plus the imaginary residual are surfaced in the diagnostics.
inline SeminormResult uniformity_seminorm(const ComplexSeqNd& a, const FolnerWindow& w,
                                          int k, int64_t H,
                                          int64_t op_budget = kDefaultSeminormOpBudget) {
    require(k >= 1 && k <= 20, ErrorCode::validation, "seminorm order out of range");
    require(H >= 1, ErrorCode::validation, "shift range must be >= 1");
    require(w.arity() == a.arity, ErrorCode::validation, "window/sequence arity mismatch");
    const int d = a.arity;

    __int128 tuples = 1;
    for (int i = 0; i < d * k; ++i) {
        tuples *= H;
        require(tuples <= (__int128)1 << 62, ErrorCode::shift_budget_exceeded,
                "shift tuple count overflows budget");
    }
    int64_t ntuples = (int64_t)tuples;
    int64_t card = w.cardinality();
    __int128 ops = (__int128)ntuples * card * ((__int128)1 << k);
    require(ops <= op_budget, ErrorCode::shift_budget_exceeded,
            "uniformity seminorm evaluation budget exceeded");

    // materialize a on the bounding box window + [0, kH]^d so the inner loop
    // is pure array arithmetic
    std::vector<int64_t> ext_sides(w.sides());
    for (auto& s : ext_sides) s += (int64_t)k * H;
    FolnerWindow ext(w.offset(), ext_sides);
    int64_t ext_card = ext.cardinality();
    std::vector<cplx> cache((size_t)ext_card);
    {
        int64_t n[kMaxArity];
        for (int64_t i = 0; i < ext_card; ++i) {
            ext.point(i, std::span<int64_t>(n, (size_t)d));
            cache[(size_t)i] = a.checked_eval(std::span<const int64_t>(n, (size_t)d));
        }
    }
    // strides of the extended box (last coordinate fastest)
    int64_t stride[kMaxArity];
    stride[d - 1] = 1;
    for (int i = d - 2; i >= 0; --i) stride[i] = stride[i + 1] * ext_sides[(size_t)i + 1];

    // base linear index of every window point inside the extended box
    std::vector<int64_t> base((size_t)card);
    {
        int64_t n[kMaxArity];
        for (int64_t i = 0; i < card; ++i) {
            w.point(i, std::span<int64_t>(n, (size_t)d));
            int64_t b = 0;
            for (int c = 0; c < d; ++c) b += (n[c] - ext.offset()[(size_t)c] - 1) * stride[c];
            base[(size_t)i] = b;
        }
    }

    const uint64_t corners = 1ULL << k;
    std::vector<int64_t> hbuf((size_t)(k * d));
    std::vector<int64_t> corner_off(corners);
    std::vector<int> corner_par(corners);
    KahanC mean;
    for (int64_t t = 0; t < ntuples; ++t) {
        int64_t rem = t;
        for (int j = k * d - 1; j >= 0; --j) {
            hbuf[(size_t)j] = 1 + (rem % H);
            rem /= H;
        }
        for (uint64_t eps = 0; eps < corners; ++eps) {
            int64_t off = 0;
            int par = 0;
            for (int j = 0; j < k; ++j) {
                if (eps & (1ULL << j)) {
                    ++par;
                    for (int c = 0; c < d; ++c) off += hbuf[(size_t)(j * d + c)] * stride[c];
                }
            }
            corner_off[eps] = off;
            corner_par[eps] = par & 1;
        }
        cplx corr = block_sum(card, [&](int64_t i) {
            int64_t b = base[(size_t)i];
            cplx prod = 1.0;
            for (uint64_t eps = 0; eps < corners; ++eps) {
                cplx v = cache[(size_t)(b + corner_off[eps])];
                prod *= corner_par[eps] ? std::conj(v) : v;
            }
            return prod;
        });
        mean.add(corr / (double)card);
    }
    cplx raw = mean.value() / (double)ntuples;

    SeminormResult r;
    r.diag.raw_mean = raw;
    r.diag.im_residual = std::abs(raw.imag());
    r.diag.clamp = std::max(0.0, -raw.real());
    r.diag.shift_tuples = ntuples;
    double re = std::max(0.0, raw.real());
    r.value = std::pow(re, 1.0 / (double)(1ULL << k));
    return r;
}

// Two-point probe: the seminorm estimate at H and at 2H, a crude convergence
// indicator for the H -> infinity limit.
struct SeminormProbe {
    SeminormResult at_h;
    SeminormResult at_2h;
};

inline SeminormProbe uniformity_seminorm_probe(const ComplexSeqNd& a, const FolnerWindow& w,
                                               int k, int64_t H,
                                               int64_t op_budget = kDefaultSeminormOpBudget) {
    SeminormProbe p;
    p.at_h = uniformity_seminorm(a, w, k, H, op_budget);
    p.at_2h = uniformity_seminorm(a, w, k, 2 * H, op_budget);
    return p;
}

}  // namespace ergolab
