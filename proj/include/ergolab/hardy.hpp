#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ergolab/core.hpp"

namespace ergolab {

// ---------------------------------------------------------------------------
// Hardy-field functions of the logarithmic-exponential class
//   f(t) = sum_i c_i * t^{a_i} * (log t)^{e_i},
// closed under term-by-term symbolic differentiation.  Exponents a_i may be
// any reals internally (derivatives produce negative powers); weight
// construction uses a >= 0 terms.
// ---------------------------------------------------------------------------

struct HardyTerm {
    double coeff = 0.0;
    double power = 0.0;  // exponent of t
    int log_power = 0;   // exponent of log t
};

class HardyFunction {
public:
    HardyFunction() = default;
    HardyFunction(std::vector<HardyTerm> terms, double t0 = 1.5) : terms_(std::move(terms)), t0_(t0) {
        require(t0_ > 1.0, ErrorCode::validation, "domain cutoff must exceed 1");
        for (auto& t : terms_)
            require(t.log_power >= 0, ErrorCode::validation, "log exponent must be >= 0");
        canonicalize();
    }

    // c * t^a
    static HardyFunction power(double c, double a, double t0 = 1.5) {
        return HardyFunction({{c, a, 0}}, t0);
    }
    // c * t^a (log t)^e
    static HardyFunction power_log(double c, double a, int e, double t0 = 1.5) {
        return HardyFunction({{c, a, e}}, t0);
    }

    const std::vector<HardyTerm>& terms() const { return terms_; }
    double domain_cutoff() const { return t0_; }
    bool is_zero() const { return terms_.empty(); }

    // largest t-exponent present (0 for the zero function)
    double growth_exponent() const {
        double g = 0.0;
        for (auto& t : terms_) g = std::max(g, t.power);
        return g;
    }

    // Symbolic flag: the non-polynomial part must outgrow log t.  True when
    // the dominant non-polynomial term has a positive t-power (fractional
    // power, or integer power with a log factor) or is a pure log power of
    // exponent > 1.
    bool stays_away_from_polynomials() const {
        bool found = false;
        double best_a = 0.0;
        int best_e = 0;
        for (auto& t : terms_) {
            bool polynomial = t.log_power == 0 && t.power >= 0.0 &&
                              std::floor(t.power) == t.power;
            if (polynomial) continue;
            if (!found || t.power > best_a + 1e-15 ||
                (std::abs(t.power - best_a) <= 1e-15 && t.log_power > best_e)) {
                best_a = t.power;
                best_e = t.log_power;
                found = true;
            }
        }
        if (!found) return false;
        if (best_a > 0.0) return true;
        return best_a == 0.0 && best_e > 1;
    }

    // asymptotically polynomial in the trivial sense available symbolically:
    // every term is a monomial
    bool is_polynomial() const {
        for (auto& t : terms_) {
            if (t.log_power != 0) return false;
            if (t.power < 0.0 || std::floor(t.power) != t.power) return false;
        }
        return true;
    }

    double eval(double t) const {
        require(t >= t0_, ErrorCode::domain_error, "evaluation below the domain cutoff");
        return (double)eval_l((long double)t);
    }

    long double eval_l(long double t) const {
        require((double)t >= t0_, ErrorCode::domain_error, "evaluation below the domain cutoff");
        long double lg = std::log(t);
        long double acc = 0.0L;
        for (auto& term : terms_) {
            long double v = (long double)term.coeff * std::pow(t, (long double)term.power);
            for (int i = 0; i < term.log_power; ++i) v *= lg;
            acc += v;
        }
        return acc;
    }

    // term-by-term derivative:
    //   d/dt [c t^a log^e t] = c a t^{a-1} log^e t + c e t^{a-1} log^{e-1} t
    HardyFunction derivative() const {
        std::vector<HardyTerm> out;
        for (auto& t : terms_) {
            if (t.coeff * t.power != 0.0) out.push_back({t.coeff * t.power, t.power - 1.0, t.log_power});
            if (t.log_power > 0 && t.coeff != 0.0)
                out.push_back({t.coeff * (double)t.log_power, t.power - 1.0, t.log_power - 1});
        }
        return HardyFunction(std::move(out), t0_);
    }

    HardyFunction derivative(int order) const {
        HardyFunction f = *this;
        for (int i = 0; i < order; ++i) f = f.derivative();
        return f;
    }

private:
    void canonicalize() {
        std::sort(terms_.begin(), terms_.end(), [](const HardyTerm& a, const HardyTerm& b) {
            if (a.power != b.power) return a.power > b.power;
            return a.log_power > b.log_power;
        });
        std::vector<HardyTerm> merged;
        for (auto& t : terms_) {
            if (t.coeff == 0.0) continue;
            if (!merged.empty() && merged.back().power == t.power &&
                merged.back().log_power == t.log_power) {
                merged.back().coeff += t.coeff;
                if (merged.back().coeff == 0.0) merged.pop_back();
            } else {
                merged.push_back(t);
            }
        }
        terms_ = std::move(merged);
    }

    std::vector<HardyTerm> terms_;
    double t0_ = 1.5;
};

inline double hardy_eval(const HardyFunction& f, double t) { return f.eval(t); }
inline HardyFunction hardy_deriv(const HardyFunction& f, int order) { return f.derivative(order); }

// ---------------------------------------------------------------------------
// Taylor localization: f(N+n) = n^k alpha_N + q_N(n) + o(1) on n <= L_N.
// alpha_N = f^{(k)}(N)/k!, q_N the order-(k-1) Taylor polynomial at N, and
// L_N = floor(N^theta) with theta inside the feasible band
//   (k - a)/k < theta < (k + 1 - a)/(k + 1)
// (lower end from L^k alpha_N -> infinity, upper end from the (k+1)-st
// derivative residual vanishing); the default is the band midpoint.
// ---------------------------------------------------------------------------

struct Localization {
    int64_t center = 0;              // N
    int order = 0;                   // k
    double alpha = 0.0;              // alpha_N
    std::vector<double> taylor;      // q_N coefficients, degree < k
    int64_t window_length = 0;       // L_N
    double theta = 0.0;
    double ratio_window_center = 0.0;  // L_N / N
    double growth_lk_alpha = 0.0;      // L_N^k |alpha_N|
    double max_residual = 0.0;         // max_{n<=L_N} |f(N+n) - n^k alpha - q_N(n)|
};

inline double localization_default_theta(double growth_a, int k) {
    double lo = ((double)k - growth_a) / (double)k;
    double hi = ((double)k + 1.0 - growth_a) / ((double)k + 1.0);
    return 0.5 * (lo + hi);
}

inline Localization taylor_localization(const HardyFunction& f, int64_t center, int k,
                                        double theta = -1.0) {
    require(k >= 1 && k <= 12, ErrorCode::validation, "localization order out of range");
    require((double)center >= f.domain_cutoff(), ErrorCode::domain_error,
            "localization center below domain cutoff");
    double a = f.growth_exponent();
    require((double)k >= std::ceil(a) - 1e-12, ErrorCode::order_too_small,
            "localization order below the growth exponent");
    if (theta < 0.0) theta = localization_default_theta(a, k);
    require(theta > 0.0 && theta < 1.0, ErrorCode::validation, "theta must lie in (0,1)");

    Localization loc;
    loc.center = center;
    loc.order = k;
    loc.theta = theta;

    // Taylor data at N via symbolic derivatives
    HardyFunction d = f;
    double factorial = 1.0;
    for (int j = 0; j < k; ++j) {
        if (j > 0) factorial *= (double)j;
        loc.taylor.push_back(d.eval((double)center) / factorial);
        d = d.derivative();
    }
    factorial *= (double)std::max(1, k);
    loc.alpha = d.eval((double)center) / factorial;  // f^(k)(N) / k!

    loc.window_length = (int64_t)std::floor(std::pow((double)center, theta));
    if (loc.window_length < 1) loc.window_length = 1;
    loc.ratio_window_center = (double)loc.window_length / (double)center;
    loc.growth_lk_alpha = std::pow((double)loc.window_length, (double)k) * std::abs(loc.alpha);

    long double mx = 0.0L;
    for (int64_t n = 1; n <= loc.window_length; ++n) {
        long double approx = (long double)loc.alpha;
        for (int j = 0; j < k; ++j) approx *= (long double)n;  // alpha * n^k
        long double np = 1.0L;
        for (int j = 0; j < k; ++j) {
            approx += (long double)loc.taylor[(size_t)j] * np;
            np *= (long double)n;
        }
        long double r = f.eval_l((long double)(center + n)) - approx;
        if (r < 0) r = -r;
        if (r > mx) mx = r;
    }
    loc.max_residual = (double)mx;
    return loc;
}

// ---------------------------------------------------------------------------
// The weight e(f(n)); phase reduced mod 1 in long double before the trig
// call.  Horizons are capped so at least ~6 significant fractional digits
// survive: |f(n)| must stay below kPhasePrecisionCap.
// ---------------------------------------------------------------------------

inline constexpr double kPhasePrecisionCap = 1e12;

struct HardyWeightDiagnostics {
    double max_phase_magnitude;
    double fractional_digits_left;  // log10(2^63 / max_phase)
};

inline cplx hardy_weight(const HardyFunction& f, int64_t n) {
    long double v = f.eval_l((long double)n);
    double mag = std::abs((double)v);
    require(mag <= kPhasePrecisionCap, ErrorCode::domain_error,
            "phase magnitude exceeds the precision cap");
    return e_l(v);
}

inline HardyWeightDiagnostics hardy_weight_diagnostics(const HardyFunction& f, int64_t horizon) {
    HardyWeightDiagnostics d{};
    double m = std::abs((double)f.eval_l((long double)horizon));
    m = std::max(m, std::abs((double)f.eval_l((long double)std::max<int64_t>(
                     (int64_t)std::ceil(f.domain_cutoff()), 2))));
    d.max_phase_magnitude = m;
    d.fractional_digits_left = std::log10(9.2e18 / std::max(1.0, m));
    return d;
}

// ---------------------------------------------------------------------------
// Level sets {n <= N : ||f(n)|| in [a,b]} with ||.|| the distance to the
// nearest integer, 0 <= a < b <= 1/2.
// ---------------------------------------------------------------------------

struct LevelSet {
    std::vector<int64_t> members;  // sorted
    double density = 0.0;          // |S cap [N]| / N
};

inline LevelSet level_set(const HardyFunction& f, double a, double b, int64_t n_limit) {
    require(0.0 <= a && a < b && b <= 0.5, ErrorCode::validation,
            "level set interval must satisfy 0 <= a < b <= 1/2");
    require(n_limit >= 1, ErrorCode::validation, "horizon must be >= 1");
    LevelSet s;
    int64_t start = (int64_t)std::ceil(f.domain_cutoff());
    for (int64_t n = start; n <= n_limit; ++n) {
        long double v = f.eval_l((long double)n);
        long double fr = frac_l(v);
        double dist = (double)std::min(fr, 1.0L - fr);
        if (dist >= a && dist <= b) s.members.push_back(n);
    }
    s.density = (double)s.members.size() / (double)n_limit;
    return s;
}

}  // namespace ergolab
