#pragma once

#include <algorithm>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ergolab/core.hpp"
#include "ergolab/sequences.hpp"
#include "ergolab/trigpoly.hpp"

namespace ergolab {

// ---------------------------------------------------------------------------
// Exact integer matrix helpers (small dense, overflow-checked)
// ---------------------------------------------------------------------------

using IntMat = std::vector<std::vector<int64_t>>;

inline IntMat int_identity(int m) {
    IntMat a((size_t)m, std::vector<int64_t>((size_t)m, 0));
    for (int i = 0; i < m; ++i) a[(size_t)i][(size_t)i] = 1;
    return a;
}

inline IntMat int_mul(const IntMat& a, const IntMat& b) {
    int m = (int)a.size();
    IntMat c((size_t)m, std::vector<int64_t>((size_t)m, 0));
    for (int i = 0; i < m; ++i)
        for (int k = 0; k < m; ++k) {
            int64_t aik = a[(size_t)i][(size_t)k];
            if (aik == 0) continue;
            for (int j = 0; j < m; ++j)
                c[(size_t)i][(size_t)j] = checked_add(
                    c[(size_t)i][(size_t)j], checked_mul(aik, b[(size_t)k][(size_t)j]));
        }
    return c;
}

inline bool int_equal(const IntMat& a, const IntMat& b) { return a == b; }

inline bool int_is_zero(const IntMat& a) {
    for (auto& row : a)
        for (auto v : row)
            if (v != 0) return false;
    return true;
}

// determinant by fraction-free Gaussian elimination (Bareiss), exact
inline int64_t int_det(const IntMat& a0) {
    int m = (int)a0.size();
    std::vector<std::vector<__int128>> a((size_t)m, std::vector<__int128>((size_t)m));
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) a[(size_t)i][(size_t)j] = a0[(size_t)i][(size_t)j];
    __int128 prev = 1;
    int sign = 1;
    for (int k = 0; k < m - 1; ++k) {
        if (a[(size_t)k][(size_t)k] == 0) {
            int p = -1;
            for (int i = k + 1; i < m; ++i)
                if (a[(size_t)i][(size_t)k] != 0) { p = i; break; }
            if (p < 0) return 0;
            std::swap(a[(size_t)k], a[(size_t)p]);
            sign = -sign;
        }
        for (int i = k + 1; i < m; ++i)
            for (int j = k + 1; j < m; ++j)
                a[(size_t)i][(size_t)j] =
                    (a[(size_t)i][(size_t)j] * a[(size_t)k][(size_t)k] -
                     a[(size_t)i][(size_t)k] * a[(size_t)k][(size_t)j]) / prev;
        prev = a[(size_t)k][(size_t)k];
    }
    __int128 det = a[(size_t)(m - 1)][(size_t)(m - 1)];
    return (int64_t)(sign * det);
}

// generalized binomial C(n, j) for integer n (possibly negative), exact
inline int64_t binom_int(int64_t n, int j) {
    __int128 num = 1;
    for (int i = 0; i < j; ++i) {
        num *= (n - i);
        require(num <= (__int128)1 << 100 && num >= -((__int128)1 << 100),
                ErrorCode::frequency_overflow, "binomial overflow");
    }
    for (int i = 2; i <= j; ++i) num /= i;
    require(num <= INT64_MAX && num >= INT64_MIN, ErrorCode::frequency_overflow,
            "binomial overflow");
    return (int64_t)num;
}

// A^n for unipotent A = I + L (L nilpotent): A^n = sum_j C(n,j) L^j, exact
// for every integer n including negatives.
inline IntMat unipotent_pow(const IntMat& a, int64_t n) {
    int m = (int)a.size();
    IntMat l = a;
    for (int i = 0; i < m; ++i) l[(size_t)i][(size_t)i] -= 1;
    IntMat res = int_identity(m);
    IntMat lj = int_identity(m);
    for (int j = 1; j < m + 1; ++j) {
        lj = int_mul(lj, l);
        if (int_is_zero(lj)) break;
        int64_t c = binom_int(n, j);
        for (int i = 0; i < m; ++i)
            for (int k = 0; k < m; ++k)
                res[(size_t)i][(size_t)k] = checked_add(
                    res[(size_t)i][(size_t)k], checked_mul(c, lj[(size_t)i][(size_t)k]));
    }
    return res;
}

// G(n) = sum_{j=0}^{n-1} A^j = sum_i C(n, i+1) L^i; satisfies the cocycle
// T^n x = A^n x + G(n) b for all integers n.
inline IntMat unipotent_geom(const IntMat& a, int64_t n) {
    int m = (int)a.size();
    IntMat l = a;
    for (int i = 0; i < m; ++i) l[(size_t)i][(size_t)i] -= 1;
    IntMat res((size_t)m, std::vector<int64_t>((size_t)m, 0));
    IntMat li = int_identity(m);
    for (int i = 0; i <= m; ++i) {
        if (i > 0) {
            li = int_mul(li, l);
            if (int_is_zero(li)) break;
        }
        int64_t c = binom_int(n, i + 1);
        for (int r = 0; r < m; ++r)
            for (int k = 0; k < m; ++k)
                res[(size_t)r][(size_t)k] = checked_add(
                    res[(size_t)r][(size_t)k], checked_mul(c, li[(size_t)r][(size_t)k]));
    }
    return res;
}

// ---------------------------------------------------------------------------
// Commuting unipotent-affine systems on T^m
// ---------------------------------------------------------------------------

// One map x -> A x + b mod 1 with A unipotent integer and b in [0,1)^m.
struct AffineTorusMap {
    IntMat a;
    std::vector<double> b;
};

// (T^m, Haar, T_1..T_l): validated commuting measure preserving system with
// a quadrature grid used only for rendering and diagnostics.
class CommutingTorusSystem {
public:
    CommutingTorusSystem(int dim, std::vector<AffineTorusMap> maps, int64_t grid_q)
        : dim_(dim), maps_(std::move(maps)), grid_q_(grid_q) {
        require(dim >= 1 && dim <= kMaxArity, ErrorCode::validation, "torus dimension out of range");
        require(!maps_.empty(), ErrorCode::validation, "system needs at least one map");
        require(grid_q_ >= 1, ErrorCode::validation, "quadrature resolution must be >= 1");
        validate();
    }

    // l commuting rotations x_i -> x_i + alpha_i on T^l (one coordinate each)
    static CommutingTorusSystem rotations(const std::vector<double>& alphas, int64_t grid_q = 64) {
        int m = (int)alphas.size();
        std::vector<AffineTorusMap> maps;
        for (int i = 0; i < m; ++i) {
            AffineTorusMap t;
            t.a = int_identity(m);
            t.b.assign((size_t)m, 0.0);
            t.b[(size_t)i] = frac(alphas[(size_t)i]);
            maps.push_back(std::move(t));
        }
        return CommutingTorusSystem(m, std::move(maps), grid_q);
    }

    // single rotation by alpha on T^1
    static CommutingTorusSystem rotation1(double alpha, int64_t grid_q = 64) {
        AffineTorusMap t;
        t.a = int_identity(1);
        t.b = {frac(alpha)};
        return CommutingTorusSystem(1, {std::move(t)}, grid_q);
    }

    // the skew T(x,y) = (x + alpha, y + x + beta) on T^2
    static CommutingTorusSystem skew(double alpha, double beta = 0.0, int64_t grid_q = 64) {
        AffineTorusMap t;
        t.a = {{1, 0}, {1, 1}};
        t.b = {frac(alpha), frac(beta)};
        return CommutingTorusSystem(2, {std::move(t)}, grid_q);
    }

    int dim() const { return dim_; }
    int num_maps() const { return (int)maps_.size(); }
    int64_t grid_q() const { return grid_q_; }
    const std::vector<AffineTorusMap>& maps() const { return maps_; }

    // T_{nvec} = T_1^{n_1} ... T_l^{n_l} as one exact affine map (M, v):
    // x -> M x + v, M exact integer, v reduced mod 1 componentwise.
    void power_map(std::span<const int64_t> nvec, IntMat& m_out, std::vector<double>& v_out) const {
        require((int)nvec.size() == (int)maps_.size(), ErrorCode::validation,
                "iterate arity mismatch");
        m_out = int_identity(dim_);
        std::vector<long double> v((size_t)dim_, 0.0L);
        for (size_t i = 0; i < maps_.size(); ++i) {
            int64_t n = nvec[i];
            if (n == 0) continue;
            IntMat an = unipotent_pow(maps_[i].a, n);
            IntMat gn = unipotent_geom(maps_[i].a, n);
            // (M, v) <- (A^n M, A^n v + G(n) b)
            m_out = int_mul(an, m_out);
            std::vector<long double> nv((size_t)dim_, 0.0L);
            for (int r = 0; r < dim_; ++r) {
                long double acc = 0.0L;
                for (int c = 0; c < dim_; ++c) acc += (long double)an[(size_t)r][(size_t)c] * v[(size_t)c];
                for (int c = 0; c < dim_; ++c)
                    acc += (long double)gn[(size_t)r][(size_t)c] * (long double)maps_[i].b[(size_t)c];
                nv[(size_t)r] = frac_l(acc);
            }
            v = std::move(nv);
        }
        v_out.resize((size_t)dim_);
        for (int r = 0; r < dim_; ++r) v_out[(size_t)r] = (double)v[(size_t)r];
    }

private:
    void validate() const {
        for (auto& t : maps_) {
            require((int)t.a.size() == dim_, ErrorCode::validation, "matrix size mismatch");
            for (auto& row : t.a)
                require((int)row.size() == dim_, ErrorCode::validation, "matrix size mismatch");
            require((int)t.b.size() == dim_, ErrorCode::validation, "offset size mismatch");
            for (double b : t.b)
                require(b >= 0.0 && b < 1.0, ErrorCode::validation, "offsets must lie in [0,1)");
            // unipotent: (A - I)^m = 0 exactly
            IntMat l = t.a;
            for (int i = 0; i < dim_; ++i) l[(size_t)i][(size_t)i] -= 1;
            IntMat p = int_identity(dim_);
            for (int i = 0; i < dim_; ++i) p = int_mul(p, l);
            require(int_is_zero(p), ErrorCode::validation, "matrix is not unipotent");
            // Haar preservation: |det A| = 1 (automatic for unipotent, asserted)
            require(std::abs(int_det(t.a)) == 1, ErrorCode::validation,
                    "map does not preserve Haar measure");
        }
        for (size_t i = 0; i < maps_.size(); ++i) {
            for (size_t j = i + 1; j < maps_.size(); ++j) {
                require(int_equal(int_mul(maps_[i].a, maps_[j].a), int_mul(maps_[j].a, maps_[i].a)),
                        ErrorCode::validation, "matrices do not commute");
                // A_i b_j + b_i = A_j b_i + b_j (mod 1): integer matrices are
                // exact, the offset defect is checked against the nearest
                // integer vector
                for (int r = 0; r < dim_; ++r) {
                    long double lhs = 0.0L, rhs = 0.0L;
                    for (int c = 0; c < dim_; ++c) {
                        lhs += (long double)maps_[i].a[(size_t)r][(size_t)c] * (long double)maps_[j].b[(size_t)c];
                        rhs += (long double)maps_[j].a[(size_t)r][(size_t)c] * (long double)maps_[i].b[(size_t)c];
                    }
                    lhs += (long double)maps_[i].b[(size_t)r];
                    rhs += (long double)maps_[j].b[(size_t)r];
                    require(dist_to_int((double)(lhs - rhs)) <= 1e-9, ErrorCode::validation,
                            "affine parts do not commute mod 1");
                }
            }
        }
    }

    int dim_;
    std::vector<AffineTorusMap> maps_;
    int64_t grid_q_;
};

// f composed with T_{nvec}, exactly in frequency space
inline TrigPoly compose_iterate(const CommutingTorusSystem& sys, const TrigPoly& f,
                                std::span<const int64_t> nvec) {
    require(f.vars() == sys.dim(), ErrorCode::validation, "observable dimension mismatch");
    IntMat m;
    std::vector<double> v;
    sys.power_map(nvec, m, v);
    return f.compose_affine(m, v);
}

// ---------------------------------------------------------------------------
// Polynomial mappings N^d -> Z^l with integer coefficients
// ---------------------------------------------------------------------------

class PolynomialMapping {
public:
    struct Term {
        int64_t coeff;
        std::vector<int> exps;  // one exponent per input variable
    };

    PolynomialMapping(int arity, int codim) : arity_(arity), components_((size_t)codim) {
        require(arity >= 1 && arity <= kMaxArity, ErrorCode::validation, "mapping arity out of range");
        require(codim >= 1, ErrorCode::validation, "mapping codomain out of range");
    }

    int arity() const { return arity_; }
    int codim() const { return (int)components_.size(); }

    void add_term(int component, int64_t coeff, std::vector<int> exps) {
        require(component >= 0 && component < codim(), ErrorCode::validation, "bad component");
        require((int)exps.size() == arity_, ErrorCode::validation, "bad exponent vector");
        for (int e : exps) require(e >= 0 && e <= 62, ErrorCode::validation, "bad exponent");
        components_[(size_t)component].push_back({coeff, std::move(exps)});
    }

    int degree() const {
        int deg = 0;
        for (auto& comp : components_)
            for (auto& t : comp) {
                int td = 0;
                for (int e : t.exps) td += e;
                deg = std::max(deg, td);
            }
        return deg;
    }

    void eval(std::span<const int64_t> n, std::span<int64_t> out) const {
        require((int)n.size() == arity_, ErrorCode::validation, "mapping eval arity mismatch");
        for (size_t c = 0; c < components_.size(); ++c) {
            int64_t acc = 0;
            for (auto& t : components_[c]) {
                int64_t v = t.coeff;
                for (int i = 0; i < arity_; ++i)
                    for (int rep = 0; rep < t.exps[(size_t)i]; ++rep)
                        v = checked_mul(v, n[(size_t)i]);
                acc = checked_add(acc, v);
            }
            out[c] = acc;
        }
    }

    // the i-th coordinate projection n -> n_i into component `component`
    static PolynomialMapping coordinate(int arity, int codim, int component, int var,
                                        int power = 1) {
        PolynomialMapping p(arity, codim);
        std::vector<int> exps((size_t)arity, 0);
        exps[(size_t)var] = power;
        p.add_term(component, 1, std::move(exps));
        return p;
    }

private:
    int arity_;
    std::vector<std::vector<Term>> components_;
};

// ---------------------------------------------------------------------------
// Grid rendering (the quadrature surface; all core numbers stay exact in
// frequency space)
// ---------------------------------------------------------------------------

struct GridFunction {
    int dim = 1;
    int64_t q = 1;                // points per dimension, midpoint lattice
    std::vector<cplx> values;     // size q^dim, last coordinate fastest

    double quadrature_l2() const {
        Kahan s;
        for (auto v : values) s.add(std::norm(v));
        return std::sqrt(s.sum / (double)values.size());
    }
    cplx quadrature_mean() const {
        KahanC s;
        for (auto v : values) s.add(v);
        return s.value() / (double)values.size();
    }
};

inline GridFunction render_grid(const TrigPoly& f, int64_t q) {
    GridFunction g;
    g.dim = f.vars();
    g.q = q;
    __int128 total = 1;
    for (int i = 0; i < g.dim; ++i) {
        total *= q;
        require(total <= (1LL << 31), ErrorCode::budget_exceeded, "grid too large");
    }
    g.values.resize((size_t)total);
    std::vector<double> x((size_t)g.dim);
    for (int64_t idx = 0; idx < (int64_t)total; ++idx) {
        int64_t rem = idx;
        for (int i = g.dim - 1; i >= 0; --i) {
            x[(size_t)i] = ((double)(rem % q) + 0.5) / (double)q;
            rem /= q;
        }
        g.values[(size_t)idx] = f.eval(x);
    }
    return g;
}

// ---------------------------------------------------------------------------
// The weighted multiple ergodic average engine
// ---------------------------------------------------------------------------

struct AverageSpec {
    const CommutingTorusSystem* system = nullptr;
    std::vector<TrigPoly> functions;          // f_1..f_s
    std::vector<PolynomialMapping> iterates;  // p_1..p_s : N^d -> Z^l
    int window_arity = 1;

    void validate() const {
        require(system != nullptr, ErrorCode::validation, "average spec without system");
        require(!functions.empty(), ErrorCode::validation, "average spec without functions");
        require(functions.size() == iterates.size(), ErrorCode::validation,
                "functions/iterates count mismatch");
        for (auto& f : functions)
            require(f.vars() == system->dim(), ErrorCode::validation,
                    "observable dimension mismatch");
        for (auto& p : iterates) {
            require(p.arity() == window_arity, ErrorCode::validation, "iterate arity mismatch");
            require(p.codim() == system->num_maps(), ErrorCode::validation,
                    "iterate codomain mismatch");
        }
    }
};

inline constexpr int64_t kDefaultAverageOpBudget = 4000000000;  // term updates

// (1/|w|) sum_{n in w} w(n) prod_i f_i(T_{p_i(n)} x), accumulated exactly in
// frequency space.  The weight is bound-checked on the fly.
inline TrigPoly weighted_multiple_average_poly(const AverageSpec& spec, const ComplexSeqNd& weight,
                                               const FolnerWindow& window,
                                               int64_t op_budget = kDefaultAverageOpBudget) {
    spec.validate();
    require(weight.arity == window.arity(), ErrorCode::validation, "weight arity mismatch");
    require(window.arity() == spec.window_arity, ErrorCode::validation, "window arity mismatch");
    int64_t card = window.cardinality();
    __int128 size_guess = 1;
    for (auto& f : spec.functions) size_guess *= (__int128)std::max<size_t>(f.term_count(), 1);
    require((__int128)card * size_guess <= op_budget, ErrorCode::budget_exceeded,
            "weighted average budget exceeded");

    const int d = window.arity();
    const int s = (int)spec.functions.size();
    TrigPoly acc(spec.system->dim());
    int64_t n[kMaxArity];
    std::vector<int64_t> pv((size_t)spec.system->num_maps());
    double inv = 1.0 / (double)card;
    for (int64_t i = 0; i < card; ++i) {
        window.point(i, std::span<int64_t>(n, (size_t)d));
        cplx wn = weight.checked_eval(std::span<const int64_t>(n, (size_t)d));
        TrigPoly term = TrigPoly::constant(spec.system->dim(), 1.0);
        bool first = true;
        for (int j = 0; j < s; ++j) {
            spec.iterates[(size_t)j].eval(std::span<const int64_t>(n, (size_t)d),
                                          std::span<int64_t>(pv));
            TrigPoly composed = compose_iterate(*spec.system, spec.functions[(size_t)j], pv);
            term = first ? std::move(composed) : term * composed;
            first = false;
        }
        acc = acc + term * (wn * inv);
    }
    return acc;
}

struct WeightedAverageResult {
    TrigPoly average;     // exact frequency-space average
    GridFunction grid;    // rendered on the Q^m midpoint lattice
    double l2_exact;      // Parseval norm of `average`
    double l2_quadrature; // grid quadrature norm (diagnostic surface)
};

inline WeightedAverageResult weighted_multiple_average(const AverageSpec& spec,
                                                       const ComplexSeqNd& weight,
                                                       const FolnerWindow& window,
                                                       int64_t op_budget = kDefaultAverageOpBudget) {
    WeightedAverageResult r{weighted_multiple_average_poly(spec, weight, window, op_budget),
                            GridFunction{}, 0.0, 0.0};
    r.grid = render_grid(r.average, spec.system->grid_q());
    r.l2_exact = r.average.l2_norm();
    r.l2_quadrature = r.grid.quadrature_l2();
    return r;
}

// ---------------------------------------------------------------------------
// Correlation sequences a(n) = integral of f_0 . prod_i T_{p_i(n)} f_i
// ---------------------------------------------------------------------------

struct CorrelationSpec {
    std::shared_ptr<CommutingTorusSystem> system;
    TrigPoly f0{1};
    std::vector<TrigPoly> functions;
    std::vector<PolynomialMapping> iterates;
    int window_arity = 1;
};

// The integral of a trig polynomial is its zero coefficient, so the sequence
// is exact; evaluation is lazy.
inline ComplexSeqNd correlation_sequence(CorrelationSpec spec) {
    require(spec.system != nullptr, ErrorCode::validation, "correlation spec without system");
    require(spec.functions.size() == spec.iterates.size(), ErrorCode::validation,
            "functions/iterates count mismatch");
    require(spec.f0.vars() == spec.system->dim(), ErrorCode::validation,
            "observable dimension mismatch");
    double bound = spec.f0.sup_bound();
    for (auto& f : spec.functions) {
        require(f.vars() == spec.system->dim(), ErrorCode::validation,
                "observable dimension mismatch");
        bound *= f.sup_bound();
    }
    for (auto& p : spec.iterates) {
        require(p.arity() == spec.window_arity, ErrorCode::validation, "iterate arity mismatch");
        require(p.codim() == spec.system->num_maps(), ErrorCode::validation,
                "iterate codomain mismatch");
    }
    auto shared = std::make_shared<CorrelationSpec>(std::move(spec));
    ComplexSeqNd seq;
    seq.arity = shared->window_arity;
    seq.bound = bound;
    seq.label = "correlation";
    seq.eval = [shared](std::span<const int64_t> n) {
        std::vector<int64_t> pv((size_t)shared->system->num_maps());
        TrigPoly prod = shared->f0;
        for (size_t j = 0; j < shared->functions.size(); ++j) {
            shared->iterates[j].eval(n, std::span<int64_t>(pv));
            prod = prod * compose_iterate(*shared->system, shared->functions[j], pv);
        }
        return prod.integral();
    };
    return seq;
}

// ---------------------------------------------------------------------------
// Host-Kra seminorm estimate for a single map, via the defining recursion
// with the conditional expectation realized as a Birkhoff average at a
// finite horizon.
// ---------------------------------------------------------------------------

inline constexpr int64_t kDefaultHkLeafBudget = 40000000;

namespace detail {

// (1/N) sum_{n=1}^{N} g o T^n, exact in frequency space.  For pure
// rotations (A = I) the geometric sums collapse to closed form.
inline TrigPoly birkhoff_average(const CommutingTorusSystem& sys, const TrigPoly& g, int64_t n_av) {
    const AffineTorusMap& t = sys.maps()[0];
    bool pure_rotation = int_equal(t.a, int_identity(sys.dim()));
    if (pure_rotation) {
        TrigPoly out(sys.dim());
        for (auto& [k, c] : g.coeffs()) {
            long double phase = 0.0L;
            for (int i = 0; i < sys.dim(); ++i)
                phase += (long double)k[(size_t)i] * (long double)t.b[(size_t)i];
            // (1/N) sum_{n=1}^N e(n phase)
            cplx factor;
            if (dist_to_int((double)frac_l(phase)) < 1e-15) {
                factor = 1.0;
            } else {
                cplx w = e_l(phase);
                cplx wn = e_l(phase * (long double)n_av);
                factor = w * (wn - 1.0) / (w - 1.0) / (double)n_av;
            }
            out.add_term(k, c * factor);
        }
        return out;
    }
    TrigPoly acc(sys.dim());
    double inv = 1.0 / (double)n_av;
    for (int64_t n = 1; n <= n_av; ++n) {
        int64_t nv[1] = {n};
        acc = acc + compose_iterate(sys, g, std::span<const int64_t>(nv, 1)) * cplx(inv, 0.0);
    }
    return acc;
}

inline double hk_pow(const CommutingTorusSystem& sys, const TrigPoly& g, int k, int64_t n_av) {
    if (k == 1) {
        double l2 = birkhoff_average(sys, g, n_av).l2_norm();
        return l2 * l2;  // |||g|||_1^2
    }
    Kahan acc;
    for (int64_t n = 1; n <= n_av; ++n) {
        int64_t nv[1] = {n};
        TrigPoly gn = g * compose_iterate(sys, g, std::span<const int64_t>(nv, 1)).conjugate();
        acc.add(hk_pow(sys, gn, k - 1, n_av));
    }
    return acc.sum / (double)n_av;  // |||g|||_k^{2^k}
}

}  // namespace detail

struct HkSeminormResult {
    double value = 0.0;
    double raw = 0.0;      // |||f|||_k^{2^k} before the root
    double clamp = 0.0;    // negative mass removed (zero by construction here)
    int64_t horizon = 0;
};

// |||f|||_k at averaging horizon n_av.  k = 1 is the L^2 norm of the
// Birkhoff average; higher k follow the multiplicative recursion
// |||f|||_{k+1}^{2^{k+1}} = Av_n |||f . conj(f o T^n)|||_k^{2^k}.
inline HkSeminormResult hk_seminorm(const CommutingTorusSystem& sys, const TrigPoly& f, int k,
                                    int64_t n_av, int64_t leaf_budget = kDefaultHkLeafBudget) {
    require(sys.num_maps() == 1, ErrorCode::validation, "hk_seminorm expects a single map");
    require(k >= 1 && k <= 3, ErrorCode::validation, "hk_seminorm supports k <= 3");
    require(n_av >= 1, ErrorCode::validation, "horizon must be >= 1");
    __int128 leaves = 1;
    for (int i = 0; i < k - 1; ++i) leaves *= n_av;
    require(leaves <= leaf_budget, ErrorCode::budget_exceeded,
            "hk_seminorm horizon budget exceeded");
    HkSeminormResult r;
    r.horizon = n_av;
    r.raw = detail::hk_pow(sys, f, k, n_av);
    r.clamp = std::max(0.0, -r.raw);
    r.value = std::pow(std::max(0.0, r.raw), 1.0 / (double)(1LL << k));
    return r;
}

// ---------------------------------------------------------------------------
// Cauchy convergence probe: Delta_N = || A_N - A_{2N} ||_{L^2(mu)}
// ---------------------------------------------------------------------------

struct CauchyProbeResult {
    double delta_n = 0.0;    // || A_N - A_2N ||
    double delta_2n = 0.0;   // || A_2N - A_4N ||
    bool cauchy_trend = false;
    double tolerance = 0.0;
};

inline CauchyProbeResult cauchy_convergence_probe(const AverageSpec& spec,
                                                  const ComplexSeqNd& weight, int64_t n,
                                                  double tolerance = 1e-12,
                                                  int64_t op_budget = kDefaultAverageOpBudget) {
    auto avg = [&](int64_t horizon) {
        FolnerWindow w = FolnerWindow::boxd(spec.window_arity, horizon);
        return weighted_multiple_average_poly(spec, weight, w, op_budget);
    };
    TrigPoly a1 = avg(n), a2 = avg(2 * n), a4 = avg(4 * n);
    CauchyProbeResult r;
    r.delta_n = (a1 - a2).l2_norm();
    r.delta_2n = (a2 - a4).l2_norm();
    r.tolerance = tolerance;
    r.cauchy_trend = r.delta_2n <= r.delta_n + tolerance;
    return r;
}

}  // namespace ergolab
