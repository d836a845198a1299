#pragma once

#include <array>
#include <cstdio>
#include <cstring>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "ergolab/core.hpp"
#include "ergolab/sequences.hpp"

namespace ergolab {

inline constexpr int64_t kDefaultSieveCap = 100000000;  // 1e8 entries

// ---------------------------------------------------------------------------
// Smallest-prime-factor sieve.  Built once, immutable afterwards; u32
// entries so the table can be cached to disk in a fixed layout.
// ---------------------------------------------------------------------------

class FactorSieve {
public:
    explicit FactorSieve(int64_t n_max) : n_max_(n_max) {
        require(n_max >= 2, ErrorCode::validation, "sieve limit must be >= 2");
        require(n_max <= kDefaultSieveCap, ErrorCode::validation,
                "sieve limit exceeds the supported cap");
        spf_.assign((size_t)n_max + 1, 0);
        spf_[1] = 1;
        for (int64_t i = 2; i <= n_max; ++i) {
            if (spf_[(size_t)i] == 0) {
                for (int64_t j = i; j <= n_max; j += i)
                    if (spf_[(size_t)j] == 0) spf_[(size_t)j] = (uint32_t)i;
            }
        }
    }

    int64_t n_max() const { return n_max_; }

    uint32_t spf(int64_t n) const {
        require(n >= 2 && n <= n_max_, ErrorCode::sieve_range, "spf query out of sieve range");
        return spf_[(size_t)n];
    }
    bool is_prime(int64_t n) const { return n >= 2 && (int64_t)spf(n) == n; }

    // distinct prime factors
    int omega(int64_t n) const {
        if (n == 1) return 0;
        require(n >= 2 && n <= n_max_, ErrorCode::sieve_range, "omega out of sieve range");
        int c = 0;
        while (n > 1) {
            int64_t p = spf_[(size_t)n];
            ++c;
            while (n % p == 0) n /= p;
        }
        return c;
    }

    // prime factors with multiplicity
    int big_omega(int64_t n) const {
        if (n == 1) return 0;
        require(n >= 2 && n <= n_max_, ErrorCode::sieve_range, "big_omega out of sieve range");
        int c = 0;
        while (n > 1) {
            n /= spf_[(size_t)n];
            ++c;
        }
        return c;
    }

    // calls fn(p, k) for every prime power p^k || n, in increasing p
    template <typename F>
    void factorize(int64_t n, F&& fn) const {
        if (n == 1) return;
        require(n >= 2 && n <= n_max_, ErrorCode::sieve_range, "factorize out of sieve range");
        while (n > 1) {
            int64_t p = spf_[(size_t)n];
            int k = 0;
            while (n % p == 0) { n /= p; ++k; }
            fn(p, k);
        }
    }

    std::vector<int64_t> primes_up_to(int64_t limit) const {
        require(limit <= n_max_, ErrorCode::sieve_range, "prime listing out of sieve range");
        std::vector<int64_t> out;
        for (int64_t p = 2; p <= limit; ++p)
            if ((int64_t)spf_[(size_t)p] == p) out.push_back(p);
        return out;
    }

    // --- binary cache (magic "ELSV", u32 version, u64 n_max, u32 entries) ---

    static constexpr uint32_t kCacheVersion = 1;

    void save_cache(const std::string& path) const {
        std::FILE* f = std::fopen(path.c_str(), "wb");
        require(f != nullptr, ErrorCode::io_error, "cannot open sieve cache for writing");
        auto put_u32 = [&](uint32_t v) {
            unsigned char b[4] = {(unsigned char)(v & 0xff), (unsigned char)((v >> 8) & 0xff),
                                  (unsigned char)((v >> 16) & 0xff), (unsigned char)((v >> 24) & 0xff)};
            std::fwrite(b, 1, 4, f);
        };
        std::fwrite("ELSV", 1, 4, f);
        put_u32(kCacheVersion);
        uint64_t n = (uint64_t)n_max_;
        unsigned char nb[8];
        for (int i = 0; i < 8; ++i) nb[i] = (unsigned char)((n >> (8 * i)) & 0xff);
        std::fwrite(nb, 1, 8, f);
        for (size_t i = 0; i <= (size_t)n_max_; ++i) put_u32(spf_[i]);
        std::fclose(f);
    }

    static std::shared_ptr<FactorSieve> load_cache(const std::string& path) {
        std::FILE* f = std::fopen(path.c_str(), "rb");
        if (!f) return nullptr;
        auto get_u32 = [&](uint32_t& v) {
            unsigned char b[4];
            if (std::fread(b, 1, 4, f) != 4) return false;
            v = (uint32_t)b[0] | ((uint32_t)b[1] << 8) | ((uint32_t)b[2] << 16) | ((uint32_t)b[3] << 24);
            return true;
        };
        char magic[4];
        if (std::fread(magic, 1, 4, f) != 4 || std::memcmp(magic, "ELSV", 4) != 0) {
            std::fclose(f);
            return nullptr;
        }
        uint32_t version = 0;
        if (!get_u32(version) || version != kCacheVersion) { std::fclose(f); return nullptr; }
        unsigned char nb[8];
        if (std::fread(nb, 1, 8, f) != 8) { std::fclose(f); return nullptr; }
        uint64_t n = 0;
        for (int i = 0; i < 8; ++i) n |= (uint64_t)nb[i] << (8 * i);
        if (n < 2 || n > (uint64_t)kDefaultSieveCap) { std::fclose(f); return nullptr; }
        auto sieve = std::shared_ptr<FactorSieve>(new FactorSieve(PrivateTag{}, (int64_t)n));
        sieve->spf_.resize((size_t)n + 1);
        for (size_t i = 0; i <= (size_t)n; ++i) {
            uint32_t v;
            if (!get_u32(v)) { std::fclose(f); return nullptr; }
            sieve->spf_[i] = v;
        }
        std::fclose(f);
        return sieve;
    }

private:
    struct PrivateTag {};
    FactorSieve(PrivateTag, int64_t n_max) : n_max_(n_max) {}

    int64_t n_max_;
    std::vector<uint32_t> spf_;
};

inline int omega(int64_t n, const FactorSieve& sieve) { return sieve.omega(n); }
inline int big_omega(int64_t n, const FactorSieve& sieve) { return sieve.big_omega(n); }

// ---------------------------------------------------------------------------
// Multiplicative functions defined on prime powers
// ---------------------------------------------------------------------------

// phi given by its values on prime powers, |phi(p^k)| <= 1; phi(1) = 1 is
// forced by multiplicativity.
struct MultiplicativeFunctionSpec {
    std::function<cplx(int64_t p, int k)> on_prime_power;
    bool completely_multiplicative = false;
    std::string label;

    cplx eval(int64_t n, const FactorSieve& sieve) const {
        if (n == 1) return 1.0;
        cplx v = 1.0;
        sieve.factorize(n, [&](int64_t p, int k) { v *= on_prime_power(p, k); });
        return v;
    }
};

inline cplx mult_eval(const MultiplicativeFunctionSpec& spec, int64_t n, const FactorSieve& sieve) {
    return spec.eval(n, sieve);
}

// phi identically 1
inline MultiplicativeFunctionSpec mult_one() {
    return {[](int64_t, int) { return cplx(1.0, 0.0); }, true, "one"};
}

// Liouville: (-1)^{Omega(n)}
inline MultiplicativeFunctionSpec mult_liouville() {
    return {[](int64_t, int k) { return cplx((k % 2) ? -1.0 : 1.0, 0.0); }, true, "liouville"};
}

// f_b: the root of unity zeta = e(1/b) at every prime power, so
// f_b(n) = zeta^{omega(n)}; with `with_multiplicity`, zeta^k at p^k so that
// f_b(n) = zeta^{Omega(n)} (completely multiplicative).
inline MultiplicativeFunctionSpec mult_fb(int b, bool with_multiplicity = false) {
    require(b >= 1, ErrorCode::validation, "f_b needs b >= 1");
    cplx zeta = e(1.0 / (double)b);
    if (with_multiplicity)
        return {[zeta](int64_t, int k) { return std::pow(zeta, k); }, true,
                "f" + std::to_string(b) + "_mult"};
    return {[zeta](int64_t, int) { return zeta; }, false, "f" + std::to_string(b)};
}

// n^{it} as a completely multiplicative function p^k -> p^{ikt}
inline MultiplicativeFunctionSpec mult_nit(double t) {
    return {[t](int64_t p, int k) { return e_l((long double)k * (long double)t *
                                               std::log((long double)p) / (2.0L * M_PIl)); },
            true, "n^it"};
}

// pointwise product of two multiplicative functions (their prime-power rules
// multiply), e.g. phi . chi for the twisted distance computations
inline MultiplicativeFunctionSpec mult_product(const MultiplicativeFunctionSpec& a,
                                               const MultiplicativeFunctionSpec& b) {
    return {[fa = a.on_prime_power, fb = b.on_prime_power](int64_t p, int k) {
                return fa(p, k) * fb(p, k);
            },
            a.completely_multiplicative && b.completely_multiplicative,
            a.label + "*" + b.label};
}

// Dirichlet character given by its value table of length q
struct DirichletCharacterSpec {
    int64_t modulus = 1;
    std::vector<cplx> table;  // chi(0..q-1)
    bool principal = false;

    cplx eval(int64_t n) const {
        int64_t r = n % modulus;
        if (r < 0) r += modulus;
        return table[(size_t)r];
    }

    void validate(const FactorSieve& sieve) const {
        require(modulus >= 1 && (int64_t)table.size() == modulus, ErrorCode::validation,
                "character table size mismatch");
        require(std::abs(table[(size_t)(1 % modulus)] - cplx(1.0, 0.0)) < 1e-12,
                ErrorCode::validation, "character must take value 1 at 1");
        for (int64_t n = 0; n < modulus; ++n) {
            bool coprime = std::gcd(n, modulus) == 1;
            double mag = std::abs(eval(n));
            require(coprime ? std::abs(mag - 1.0) < 1e-12 : mag < 1e-12, ErrorCode::validation,
                    "character must vanish exactly off the units");
        }
        // complete multiplicativity on a sample range
        int64_t lim = std::min<int64_t>(3 * modulus + 2, sieve.n_max());
        for (int64_t m = 1; m <= lim; ++m)
            for (int64_t n = 1; n * m <= lim; ++n)
                require(std::abs(eval(m * n) - eval(m) * eval(n)) < 1e-10, ErrorCode::validation,
                        "character is not completely multiplicative");
    }

    MultiplicativeFunctionSpec as_multiplicative() const {
        auto self = *this;
        return {[self](int64_t p, int k) { return std::pow(self.eval(p), k); }, true,
                "chi_mod" + std::to_string(modulus)};
    }
};

// principal character mod q
inline DirichletCharacterSpec principal_character(int64_t q) {
    DirichletCharacterSpec chi;
    chi.modulus = q;
    chi.principal = true;
    chi.table.resize((size_t)q);
    for (int64_t n = 0; n < q; ++n)
        chi.table[(size_t)n] = (std::gcd(n, q) == 1) ? cplx(1.0, 0.0) : cplx(0.0, 0.0);
    return chi;
}

// Legendre symbol character mod an odd prime p
inline DirichletCharacterSpec legendre_character(int64_t p) {
    require(p >= 3 && (p % 2) == 1, ErrorCode::validation, "legendre character needs an odd prime");
    DirichletCharacterSpec chi;
    chi.modulus = p;
    chi.table.assign((size_t)p, cplx(-1.0, 0.0));
    chi.table[0] = 0.0;
    for (int64_t n = 1; n < p; ++n) chi.table[(size_t)((n * n) % p)] = 1.0;
    return chi;
}

// Two-adic obstruction scan for the goodness characterization: reports
// max_{k <= k_max} |chi(2)^k phi(2^k) + 2^{ikt}|.  The obstruction case
// demands equality to -2^{ikt} for ALL k, which no finite scan certifies,
// so this is trend-only evidence by construction.
struct TwoAdicScan {
    double max_defect = 0.0;
    int k_checked = 0;
};

inline TwoAdicScan halasz_two_adic_scan(const MultiplicativeFunctionSpec& phi,
                                        const DirichletCharacterSpec& chi, double t, int k_max) {
    require(k_max >= 1, ErrorCode::validation, "two-adic scan needs k_max >= 1");
    TwoAdicScan scan;
    scan.k_checked = k_max;
    cplx chi2 = chi.eval(2);
    for (int k = 1; k <= k_max; ++k) {
        cplx lhs = std::pow(chi2, k) * phi.on_prime_power(2, k);
        cplx rhs = -e_l((long double)k * (long double)t * std::log(2.0L) / (2.0L * M_PIl));
        scan.max_defect = std::max(scan.max_defect, std::abs(lhs - rhs));
    }
    return scan;
}

// ---------------------------------------------------------------------------
// S_{a,b}: integers whose number of distinct prime factors is a mod b
// ---------------------------------------------------------------------------

inline int s_ab_indicator(int64_t n, int a, int b, const FactorSieve& sieve) {
    require(b >= 1, ErrorCode::validation, "S_{a,b} needs b >= 1");
    require(n >= 1, ErrorCode::validation, "S_{a,b} membership needs n >= 1");
    int w = sieve.omega(n);
    int r = ((w - a) % b + b) % b;
    return r == 0 ? 1 : 0;
}

// density of {n <= N : n - c in S_{a,b}} (n - c must land in N)
inline double s_ab_density(int a, int b, int64_t c, int64_t n_limit, const FactorSieve& sieve) {
    require(n_limit >= 1, ErrorCode::validation, "density horizon must be >= 1");
    int64_t count = 0;
    for (int64_t n = 1; n <= n_limit; ++n) {
        int64_t m = n - c;
        if (m < 1) continue;
        count += s_ab_indicator(m, a, b, sieve);
    }
    return (double)count / (double)n_limit;
}

// (1/b) sum_{j=0}^{b-1} zeta^{-aj} f_b(n)^j with zeta = e(1/b); equals the
// S_{a,b} indicator, an identity the tests pin at float precision.
inline cplx key_identity_eval(int64_t n, int a, int b, const FactorSieve& sieve,
                              bool with_multiplicity = false) {
    require(b >= 1, ErrorCode::validation, "key identity needs b >= 1");
    MultiplicativeFunctionSpec fb = mult_fb(b, with_multiplicity);
    cplx fbn = fb.eval(n, sieve);
    cplx zeta = e(1.0 / (double)b);
    KahanC acc;
    cplx fpow = 1.0;
    for (int j = 0; j < b; ++j) {
        acc.add(std::pow(zeta, -a * j) * fpow);
        fpow *= fbn;
    }
    return acc.value() / (double)b;
}

// ---------------------------------------------------------------------------
// Pretentious distance partial sums
// ---------------------------------------------------------------------------

struct DistancePartial {
    double squared = 0.0;  // sum_{p <= P} (1 - Re phi1(p) conj phi2(p)) / p
    double value = 0.0;    // sqrt of the above
    int64_t prime_cutoff = 0;
    int64_t primes_used = 0;
};

inline DistancePartial d_distance_partial(const MultiplicativeFunctionSpec& phi1,
                                          const MultiplicativeFunctionSpec& phi2, int64_t cutoff,
                                          const FactorSieve& sieve) {
    require(cutoff <= sieve.n_max(), ErrorCode::sieve_range, "distance cutoff beyond sieve");
    Kahan acc;
    int64_t used = 0;
    for (int64_t p = 2; p <= cutoff; ++p) {
        if (!sieve.is_prime(p)) continue;
        cplx v = phi1.on_prime_power(p, 1) * std::conj(phi2.on_prime_power(p, 1));
        acc.add((1.0 - v.real()) / (double)p);
        ++used;
    }
    DistancePartial r;
    r.squared = std::max(0.0, acc.sum);
    r.value = std::sqrt(r.squared);
    r.prime_cutoff = cutoff;
    r.primes_used = used;
    return r;
}

// ---------------------------------------------------------------------------
// Averages along arithmetic progressions and the aperiodicity scan
// ---------------------------------------------------------------------------

// (1/N) sum_{n<=N} phi(a n + b)
inline cplx ap_average(const MultiplicativeFunctionSpec& phi, int64_t a, int64_t b, int64_t n_limit,
                       const FactorSieve& sieve) {
    require(a >= 1 && b >= 0, ErrorCode::validation, "progression needs a >= 1, b >= 0");
    require(a * n_limit + b <= sieve.n_max(), ErrorCode::sieve_range,
            "progression exceeds sieve range");
    cplx total = block_sum(n_limit, [&](int64_t i) {
        int64_t n = i + 1;
        return phi.eval(a * n + b, sieve);
    });
    return total / (double)n_limit;
}

struct ApRow {
    int64_t a, b;
    cplx average;
};

struct AperiodicityScan {
    std::vector<ApRow> rows;
    double max_modulus = 0.0;
    int64_t argmax_a = 0, argmax_b = 0;
};

inline AperiodicityScan aperiodicity_scan(const MultiplicativeFunctionSpec& phi, int64_t a_max,
                                          int64_t n_limit, const FactorSieve& sieve) {
    require(a_max >= 1, ErrorCode::validation, "scan needs a_max >= 1");
    AperiodicityScan scan;
    for (int64_t a = 1; a <= a_max; ++a) {
        for (int64_t b = 0; b < a; ++b) {
            ApRow row{a, b, ap_average(phi, a, b, n_limit, sieve)};
            double m = std::abs(row.average);
            if (m > scan.max_modulus) {
                scan.max_modulus = m;
                scan.argmax_a = a;
                scan.argmax_b = b;
            }
            scan.rows.push_back(row);
        }
    }
    return scan;
}

// ---------------------------------------------------------------------------
// Katai-type prime-dilation correlations for two-variable sequences
// ---------------------------------------------------------------------------

// (1/(N1 N2)) sum a(p1 n1, p2 n2) conj a(p1' n1, p2' n2); the four primes
// must be distinct.
inline cplx katai_correlation(const ComplexSeqNd& a, int64_t p1, int64_t p2, int64_t p1p,
                              int64_t p2p, int64_t n1_limit, int64_t n2_limit,
                              int64_t max_points = kDefaultMaxWindowPoints) {
    require(a.arity == 2, ErrorCode::validation, "katai correlation needs a 2-variable sequence");
    std::array<int64_t, 4> ps{p1, p2, p1p, p2p};
    for (size_t i = 0; i < 4; ++i)
        for (size_t j = i + 1; j < 4; ++j)
            require(ps[i] != ps[j], ErrorCode::prime_clash, "katai primes must be distinct");
    __int128 pts = (__int128)n1_limit * n2_limit;
    require(pts <= max_points, ErrorCode::budget_exceeded, "katai correlation budget exceeded");
    cplx total = block_sum((int64_t)pts, [&](int64_t i) {
        int64_t n1 = i / n2_limit + 1;
        int64_t n2 = i % n2_limit + 1;
        int64_t u[2] = {p1 * n1, p2 * n2};
        int64_t v[2] = {p1p * n1, p2p * n2};
        return a.checked_eval(std::span<const int64_t>(u, 2)) *
               std::conj(a.checked_eval(std::span<const int64_t>(v, 2)));
    });
    return total / (double)(int64_t)pts;
}

struct KataiGridRow {
    int64_t p1, p2, p1p, p2p;
    cplx value;
};

struct KataiGridReport {
    std::vector<KataiGridRow> rows;
    double max_modulus = 0.0;
};

// evaluates the correlation over all ordered assignments of four distinct
// primes from `primes`; the hypothesis check for the orthogonality criterion
inline KataiGridReport katai_grid(const ComplexSeqNd& a, const std::vector<int64_t>& primes,
                                  int64_t n1_limit, int64_t n2_limit,
                                  int64_t max_tuples = 1000) {
    require(primes.size() >= 4, ErrorCode::validation, "katai grid needs at least 4 primes");
    KataiGridReport rep;
    int64_t tuples = 0;
    size_t m = primes.size();
    for (size_t i = 0; i < m; ++i)
        for (size_t j = 0; j < m; ++j)
            for (size_t k = 0; k < m; ++k)
                for (size_t l = 0; l < m; ++l) {
                    if (i == j || i == k || i == l || j == k || j == l || k == l) continue;
                    require(++tuples <= max_tuples, ErrorCode::budget_exceeded,
                            "katai grid tuple budget exceeded");
                    KataiGridRow row{primes[i], primes[j], primes[k], primes[l],
                                     katai_correlation(a, primes[i], primes[j], primes[k],
                                                       primes[l], n1_limit, n2_limit)};
                    rep.max_modulus = std::max(rep.max_modulus, std::abs(row.value));
                    rep.rows.push_back(row);
                }
    return rep;
}

}  // namespace ergolab
