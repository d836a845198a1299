#pragma once

#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <future>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace ergolab {

inline constexpr const char* kVersion = "0.1.0";

using cplx = std::complex<double>;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

enum class ErrorCode {
    validation,
    bound_violation,
    window_too_large,
    shift_budget_exceeded,
    gowers_budget_exceeded,
    budget_exceeded,
    frequency_overflow,
    sieve_range,
    prime_clash,
    domain_error,
    order_too_small,
    degree_cap,
    gram_ill_conditioned,
    io_error,
};

inline const char* error_code_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::validation: return "validation";
        case ErrorCode::bound_violation: return "bound_violation";
        case ErrorCode::window_too_large: return "window_too_large";
        case ErrorCode::shift_budget_exceeded: return "shift_budget_exceeded";
        case ErrorCode::gowers_budget_exceeded: return "gowers_budget_exceeded";
        case ErrorCode::budget_exceeded: return "budget_exceeded";
        case ErrorCode::frequency_overflow: return "frequency_overflow";
        case ErrorCode::sieve_range: return "sieve_range";
        case ErrorCode::prime_clash: return "prime_clash";
        case ErrorCode::domain_error: return "domain_error";
        case ErrorCode::order_too_small: return "order_too_small";
        case ErrorCode::degree_cap: return "degree_cap";
        case ErrorCode::gram_ill_conditioned: return "gram_ill_conditioned";
        case ErrorCode::io_error: return "io_error";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}
    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

inline void require(bool cond, ErrorCode code, const std::string& what) {
    if (!cond) throw Error(code, what);
}

// ---------------------------------------------------------------------------
// Unit-circle helpers.  e(t) = exp(2*pi*i*t); the argument is reduced mod 1
// before scaling so that large phases do not lose the fractional part.
// ---------------------------------------------------------------------------

inline double frac(double t) {
    double f = t - std::floor(t);
    return (f >= 1.0) ? 0.0 : f;  // guard against floor rounding at the seam
}

inline long double frac_l(long double t) {
    long double f = t - std::floor(t);
    return (f >= 1.0L) ? 0.0L : f;
}

inline cplx e(double t) {
    double th = 2.0 * M_PI * frac(t);
    return {std::cos(th), std::sin(th)};
}

// Extended-precision phase reduction: the fractional part of t is taken in
// long double (64-bit mantissa on x86-64) before the trig call.
inline cplx e_l(long double t) {
    double th = 2.0 * M_PI * (double)frac_l(t);
    return {std::cos(th), std::sin(th)};
}

// distance from t to the nearest integer
inline double dist_to_int(double t) {
    double f = frac(t);
    return std::min(f, 1.0 - f);
}

// ---------------------------------------------------------------------------
// Compensated (Kahan) accumulation and a deterministic blocked reduction.
// Block boundaries are fixed (independent of thread count), each block is
// accumulated in index order, and block results are folded in block order,
// so sums are bit-reproducible for any thread count.
// ---------------------------------------------------------------------------

struct Kahan {
    double sum = 0.0, comp = 0.0;
    void add(double x) {
        double y = x - comp;
        double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
};

struct KahanC {
    Kahan re, im;
    void add(cplx z) {
        re.add(z.real());
        im.add(z.imag());
    }
    cplx value() const { return {re.sum, im.sum}; }
};

inline std::atomic<int>& thread_count_ref() {
    static std::atomic<int> n{1};
    return n;
}
inline void set_thread_count(int n) { thread_count_ref().store(n < 1 ? 1 : n); }
inline int thread_count() { return thread_count_ref().load(); }

inline constexpr int64_t kReduceBlock = 4096;

// Sums f(i) for i in [0, n) with fixed 4096-element Kahan blocks folded in
// block order.  f must be pure.
template <typename F>
cplx block_sum(int64_t n, F&& f) {
    if (n <= 0) return {0.0, 0.0};
    int64_t nblocks = (n + kReduceBlock - 1) / kReduceBlock;
    auto eval_block = [&](int64_t b) {
        KahanC acc;
        int64_t lo = b * kReduceBlock;
        int64_t hi = std::min(n, lo + kReduceBlock);
        for (int64_t i = lo; i < hi; ++i) acc.add(f(i));
        return acc.value();
    };
    std::vector<cplx> partial((size_t)nblocks);
    int threads = thread_count();
    if (threads <= 1 || nblocks == 1) {
        for (int64_t b = 0; b < nblocks; ++b) partial[(size_t)b] = eval_block(b);
    } else {
        int nt = (int)std::min<int64_t>(threads, nblocks);
        std::vector<std::future<void>> jobs;
        jobs.reserve((size_t)nt);
        for (int t = 0; t < nt; ++t) {
            jobs.push_back(std::async(std::launch::async, [&, t]() {
                for (int64_t b = t; b < nblocks; b += nt) partial[(size_t)b] = eval_block(b);
            }));
        }
        for (auto& j : jobs) j.get();
    }
    KahanC total;
    for (auto z : partial) total.add(z);
    return total.value();
}

// ---------------------------------------------------------------------------
// splitmix64: the project-wide seeded generator.  Chosen because its output
// is fully specified by the recurrence below, so streams replicate across
// platforms and standard-library versions.
// ---------------------------------------------------------------------------

struct Rng {
    uint64_t state;

    explicit Rng(uint64_t seed) : state(seed) {}

    uint64_t next_u64() {
        uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    // uniform in [0,1) with 53 random bits
    double uniform01() { return (double)(next_u64() >> 11) * 0x1.0p-53; }
    // uniform integer in [0, m)
    uint64_t below(uint64_t m) { return next_u64() % m; }
    // uniform point on the unit circle
    cplx unit() { return e(uniform01()); }
    // uniform in the closed unit disk
    cplx disk() { return std::sqrt(uniform01()) * unit(); }
    // +1 or -1
    double sign() { return (next_u64() & 1) ? 1.0 : -1.0; }
};

// ---------------------------------------------------------------------------
// Exact int64 rational, used by the exact-arithmetic test mode of the
// Heisenberg group.  Intermediate products run through __int128 and overflow
// beyond int64 throws rather than wrapping.
// ---------------------------------------------------------------------------

class Rational {
public:
    Rational() : num_(0), den_(1) {}
    Rational(int64_t n) : num_(n), den_(1) {}
    Rational(int64_t n, int64_t d) : num_(n), den_(d) {
        require(d != 0, ErrorCode::validation, "rational with zero denominator");
        normalize();
    }

    int64_t num() const { return num_; }
    int64_t den() const { return den_; }

    friend Rational operator+(const Rational& a, const Rational& b) {
        __int128 n = (__int128)a.num_ * b.den_ + (__int128)b.num_ * a.den_;
        __int128 d = (__int128)a.den_ * b.den_;
        return from128(n, d);
    }
    friend Rational operator-(const Rational& a, const Rational& b) {
        __int128 n = (__int128)a.num_ * b.den_ - (__int128)b.num_ * a.den_;
        __int128 d = (__int128)a.den_ * b.den_;
        return from128(n, d);
    }
    friend Rational operator*(const Rational& a, const Rational& b) {
        return from128((__int128)a.num_ * b.num_, (__int128)a.den_ * b.den_);
    }
    Rational operator-() const { return Rational(-num_, den_); }
    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }

    double to_double() const { return (double)num_ / (double)den_; }

private:
    static Rational from128(__int128 n, __int128 d) {
        if (d < 0) { n = -n; d = -d; }
        __int128 g = gcd128(n < 0 ? -n : n, d);
        if (g > 1) { n /= g; d /= g; }
        require(n <= INT64_MAX && n >= INT64_MIN && d <= INT64_MAX,
                ErrorCode::validation, "rational overflow");
        Rational r;
        r.num_ = (int64_t)n;
        r.den_ = (int64_t)d;
        return r;
    }
    static __int128 gcd128(__int128 a, __int128 b) {
        while (b != 0) { __int128 t = a % b; a = b; b = t; }
        return a == 0 ? 1 : a;
    }
    void normalize() {
        if (den_ < 0) { num_ = -num_; den_ = -den_; }
        int64_t g = std::gcd(num_ < 0 ? -num_ : num_, den_);
        if (g > 1) { num_ /= g; den_ /= g; }
    }

    int64_t num_, den_;
};

// n*(n-1)/2 for any integer n, overflow-checked
inline int64_t binom2(int64_t n) {
    __int128 v = (__int128)n * (n - 1) / 2;
    require(v <= INT64_MAX && v >= INT64_MIN, ErrorCode::frequency_overflow, "binom2 overflow");
    return (int64_t)v;
}

// checked int64 ops used by the exact frequency/matrix arithmetic
inline int64_t checked_mul(int64_t a, int64_t b) {
    __int128 v = (__int128)a * b;
    require(v <= INT64_MAX && v >= INT64_MIN, ErrorCode::frequency_overflow, "int64 mul overflow");
    return (int64_t)v;
}
inline int64_t checked_add(int64_t a, int64_t b) {
    __int128 v = (__int128)a + b;
    require(v <= INT64_MAX && v >= INT64_MIN, ErrorCode::frequency_overflow, "int64 add overflow");
    return (int64_t)v;
}

}  // namespace ergolab
