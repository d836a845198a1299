#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ergolab/core.hpp"
#include "ergolab/heisenberg.hpp"
#include "ergolab/trigpoly.hpp"

namespace ergolab {

// ---------------------------------------------------------------------------
// Concrete nilmanifolds: torus T^m, the skew family on T^2, and the
// Heisenberg quotient.  Haar measure is Lebesgue measure on the fundamental
// domain in all three cases, and orbits use closed forms rather than
// iterated floating maps.
// ---------------------------------------------------------------------------

// d commuting rotations on T^m, orbit started at `base`
struct TorusTranslations {
    int dim = 1;
    std::vector<std::vector<double>> alphas;  // one translation vector per variable
    std::vector<double> base;                 // default: 0 (= e_X)
};

// (x, y) -> (x + alpha, y + c x + beta) with integer skew coefficient c;
// c = 1, alpha = beta = 0 is the classical fiber skew T(x,y) = (x, y+x)
struct SkewMap {
    double alpha = 0.0;
    double beta = 0.0;
    int64_t c = 1;
};

struct SkewTranslations {
    std::vector<SkewMap> maps;  // one commuting map per variable
    double base_x = 0.0, base_y = 0.0;
};

struct HeisenbergTranslations {
    std::vector<HeisenbergElement> taus;  // pairwise commuting
};

using NilKind = std::variant<TorusTranslations, SkewTranslations, HeisenbergTranslations>;

// ---------------------------------------------------------------------------
// Observables on the fundamental domain
// ---------------------------------------------------------------------------

// Lattice periodization of the product bump
//   phi(t_1..t_dim) = amplitude * prod B(t_i / rho),
//   B(u) = exp(1 - 1/(1-u^2)) on |u| < 1,
// i.e. Psi(g.e_X) = sum_{gamma, |gamma| <= R} phi(g.gamma).  phi has compact
// support, so with trunc_radius >= rho + 1 the enumeration drops nothing.
struct PeriodizedBump {
    double amplitude = 1.0;
    double rho = 0.4;
    double trunc_radius = 2.0;
};

inline double bump_profile(double u) {
    double s = u * u;
    if (s >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - s));
}

// integral of bump_profile over [-1, 1]; fixed fine midpoint rule, cached
inline double bump_profile_mass() {
    static const double mass = [] {
        const int n = 400000;
        Kahan s;
        for (int i = 0; i < n; ++i) {
            double t = -1.0 + 2.0 * ((double)i + 0.5) / (double)n;
            s.add(bump_profile(t));
        }
        return s.sum * 2.0 / (double)n;
    }();
    return mass;
}

class NilObservable {
public:
    enum class Kind { trig, bump };

    static NilObservable trig(TrigPoly p) {
        NilObservable o;
        o.kind_ = Kind::trig;
        o.poly_ = std::move(p);
        return o;
    }
    static NilObservable bump(PeriodizedBump b) {
        require(b.rho > 0.0 && b.rho <= 4.0, ErrorCode::validation, "bump support out of range");
        require(b.trunc_radius >= b.rho + 1.0, ErrorCode::validation,
                "truncation radius must cover the bump support");
        NilObservable o;
        o.kind_ = Kind::bump;
        o.bump_ = b;
        return o;
    }

    Kind kind() const { return kind_; }
    const TrigPoly& poly() const { return poly_; }
    const PeriodizedBump& bump_spec() const { return bump_; }

    double sup_bound(int dim) const {
        if (kind_ == Kind::trig) return poly_.sup_bound();
        double per_axis = std::floor(2.0 * bump_.rho) + 1.0;
        return bump_.amplitude * std::pow(per_axis, dim);
    }

    // total mass of the unperiodized bump over the group, amplitude*(rho*I)^dim
    double bump_mass(int dim) const {
        require(kind_ == Kind::bump, ErrorCode::validation, "not a bump observable");
        return bump_.amplitude * std::pow(bump_.rho * bump_profile_mass(), dim);
    }

    // On the Heisenberg quotient a reduced-coordinate character with a
    // nonzero z-frequency is not a function on X; it stays available as a
    // diagnostic but is flagged.
    bool continuous_on_quotient(bool heisenberg) const {
        if (kind_ == Kind::bump) return true;
        if (!heisenberg) return true;
        for (auto& [k, c] : poly_.coeffs())
            if (k.size() >= 3 && k[2] != 0) return false;
        return true;
    }

    // evaluation at a reduced point; `heisenberg` selects the twisted
    // z-behaviour of the lattice action for the bump periodization
    cplx eval(std::span<const double> p, bool heisenberg) const {
        if (kind_ == Kind::trig) return poly_.eval(p);
        const double rho = bump_.rho;
        const double amp = bump_.amplitude;
        int dim = (int)p.size();
        auto axis_lo = [&](double t) { return (int64_t)std::ceil(-rho - t); };
        auto axis_hi = [&](double t) { return (int64_t)std::floor(rho - t); };
        if (!heisenberg || dim < 3) {
            // abelian periodization: sum over gamma in Z^dim of phi(p + gamma)
            double total = 0.0;
            std::vector<int64_t> lo((size_t)dim), hi((size_t)dim), g((size_t)dim);
            for (int i = 0; i < dim; ++i) {
                lo[(size_t)i] = axis_lo(p[(size_t)i]);
                hi[(size_t)i] = axis_hi(p[(size_t)i]);
            }
            g = lo;
            while (true) {
                double v = amp;
                for (int i = 0; i < dim; ++i)
                    v *= bump_profile((p[(size_t)i] + (double)g[(size_t)i]) / rho);
                total += v;
                int i = dim - 1;
                while (i >= 0 && ++g[(size_t)i] > hi[(size_t)i]) {
                    g[(size_t)i] = lo[(size_t)i];
                    --i;
                }
                if (i < 0) break;
            }
            return total;
        }
        // Heisenberg: p.gamma = (u+a, v+b, w+c+u*b) for gamma = (a,b,c)
        const double u = p[0], v = p[1], w = p[2];
        double total = 0.0;
        for (int64_t a = axis_lo(u); a <= axis_hi(u); ++a) {
            double bu = bump_profile((u + (double)a) / rho);
            if (bu == 0.0) continue;
            for (int64_t b = axis_lo(v); b <= axis_hi(v); ++b) {
                double bv = bump_profile((v + (double)b) / rho);
                if (bv == 0.0) continue;
                double wz = w + u * (double)b;
                for (int64_t c = axis_lo(wz); c <= axis_hi(wz); ++c)
                    total += amp * bu * bv * bump_profile((wz + (double)c) / rho);
            }
        }
        return total;
    }

private:
    Kind kind_ = Kind::trig;
    TrigPoly poly_{1};
    PeriodizedBump bump_{};
};

// ---------------------------------------------------------------------------
// NilsystemSpec
// ---------------------------------------------------------------------------

class NilsystemSpec {
public:
    NilsystemSpec(NilKind kind, NilObservable observable, int64_t quadrature_q = 64)
        : kind_(std::move(kind)), observable_(std::move(observable)), q_(quadrature_q) {
        require(q_ >= 2, ErrorCode::validation, "quadrature resolution must be >= 2");
        validate();
    }

    static NilsystemSpec torus1(double alpha, NilObservable obs, int64_t q = 64) {
        TorusTranslations t;
        t.dim = 1;
        t.alphas = {{alpha}};
        t.base = {0.0};
        return NilsystemSpec(std::move(t), std::move(obs), q);
    }
    // the classical skew started at (x0, y0), one variable
    static NilsystemSpec skew1(double alpha, double x0, double y0, NilObservable obs,
                               int64_t q = 64) {
        SkewTranslations s;
        s.maps = {SkewMap{alpha, 0.0, 1}};
        s.base_x = x0;
        s.base_y = y0;
        return NilsystemSpec(std::move(s), std::move(obs), q);
    }
    static NilsystemSpec heisenberg1(HeisenbergElement tau, NilObservable obs, int64_t q = 32) {
        HeisenbergTranslations h;
        h.taus = {tau};
        return NilsystemSpec(std::move(h), std::move(obs), q);
    }

    const NilKind& kind() const { return kind_; }
    const NilObservable& observable() const { return observable_; }
    int64_t quadrature_q() const { return q_; }

    bool is_heisenberg() const { return std::holds_alternative<HeisenbergTranslations>(kind_); }

    int variables() const {
        if (auto* t = std::get_if<TorusTranslations>(&kind_)) return (int)t->alphas.size();
        if (auto* s = std::get_if<SkewTranslations>(&kind_)) return (int)s->maps.size();
        return (int)std::get<HeisenbergTranslations>(kind_).taus.size();
    }
    // dimension of the fundamental domain
    int domain_dim() const {
        if (auto* t = std::get_if<TorusTranslations>(&kind_)) return t->dim;
        if (std::holds_alternative<SkewTranslations>(kind_)) return 2;
        return 3;
    }
    // dimension of the horizontal torus (coordinates moving linearly)
    int horizontal_dim() const {
        if (auto* t = std::get_if<TorusTranslations>(&kind_)) return t->dim;
        if (std::holds_alternative<SkewTranslations>(kind_)) return 1;
        return 2;
    }

    bool observable_continuous() const {
        return observable_.continuous_on_quotient(is_heisenberg());
    }

    // reduced orbit point tau_1^{n_1} ... tau_d^{n_d} . base, in [0,1)^dim
    void orbit_point(std::span<const int64_t> n, std::span<double> out) const {
        if (auto* t = std::get_if<TorusTranslations>(&kind_)) {
            require(n.size() == t->alphas.size(), ErrorCode::validation, "orbit arity mismatch");
            for (int c = 0; c < t->dim; ++c) {
                long double acc = t->base[(size_t)c];
                for (size_t i = 0; i < n.size(); ++i)
                    acc += (long double)n[i] * (long double)t->alphas[i][(size_t)c];
                out[(size_t)c] = (double)frac_l(acc);
            }
            return;
        }
        if (auto* s = std::get_if<SkewTranslations>(&kind_)) {
            require(n.size() == s->maps.size(), ErrorCode::validation, "orbit arity mismatch");
            // apply each commuting map's closed form in order:
            //   x' = x + n a,  y' = y + n (c x + b) + c C(n,2) a
            long double x = s->base_x, y = s->base_y;
            for (size_t i = 0; i < n.size(); ++i) {
                const SkewMap& mp = s->maps[i];
                long double nn = (long double)n[i];
                long double c2 = (long double)binom2(n[i]);
                y += nn * ((long double)mp.c * x + (long double)mp.beta) +
                     (long double)mp.c * c2 * (long double)mp.alpha;
                x += nn * (long double)mp.alpha;
            }
            out[0] = (double)frac_l(x);
            out[1] = (double)frac_l(y);
            return;
        }
        const auto& h = std::get<HeisenbergTranslations>(kind_);
        require(n.size() == h.taus.size(), ErrorCode::validation, "orbit arity mismatch");
        // closed-form powers composed by the group law, in long double
        long double x = 0.0L, y = 0.0L, z = 0.0L;
        for (size_t i = 0; i < n.size(); ++i) {
            long double nn = (long double)n[i];
            long double c2 = (long double)binom2(n[i]);
            long double px = nn * (long double)h.taus[i].x;
            long double py = nn * (long double)h.taus[i].y;
            long double pz = nn * (long double)h.taus[i].z +
                             c2 * (long double)h.taus[i].x * (long double)h.taus[i].y;
            // (x,y,z).(px,py,pz)
            z = z + pz + x * py;
            x = x + px;
            y = y + py;
        }
        // reduce: q = -floor(y), p = -floor(x), then r lands z in [0,1)
        long double q = -std::floor(y);
        long double v = y + q;
        if (v >= 1.0L) { v -= 1.0L; q -= 1.0L; }
        long double u = x - std::floor(x);
        if (u >= 1.0L) u -= 1.0L;
        long double zq = z + x * q;
        long double w = zq - std::floor(zq);
        if (w >= 1.0L) w -= 1.0L;
        out[0] = (double)u;
        out[1] = (double)v;
        out[2] = (double)w;
    }

    // the nilsequence value Psi(tau^n . e_X) at the reduced orbit point
    cplx nilsequence_eval(std::span<const int64_t> n) const {
        double p[4];
        orbit_point(n, std::span<double>(p, (size_t)domain_dim()));
        return observable_.eval(std::span<const double>(p, (size_t)domain_dim()),
                                is_heisenberg());
    }

    // projection of the orbit onto the horizontal torus coordinates
    void horizontal_point(std::span<const int64_t> n, std::span<double> out) const {
        double p[4];
        orbit_point(n, std::span<double>(p, (size_t)domain_dim()));
        for (int i = 0; i < horizontal_dim(); ++i) out[(size_t)i] = p[i];
    }

private:
    void validate() const {
        if (auto* t = std::get_if<TorusTranslations>(&kind_)) {
            require(t->dim >= 1 && t->dim <= 4, ErrorCode::validation, "torus dimension out of range");
            require(!t->alphas.empty(), ErrorCode::validation, "torus needs >= 1 translation");
            for (auto& a : t->alphas)
                require((int)a.size() == t->dim, ErrorCode::validation, "translation size mismatch");
            require((int)t->base.size() == t->dim, ErrorCode::validation, "base size mismatch");
            if (observable_.kind() == NilObservable::Kind::trig)
                require(observable_.poly().vars() == t->dim, ErrorCode::validation,
                        "observable dimension mismatch");
            return;
        }
        if (auto* s = std::get_if<SkewTranslations>(&kind_)) {
            require(!s->maps.empty(), ErrorCode::validation, "skew needs >= 1 map");
            // commutation: c_i alpha_j = c_j alpha_i (mod 1)
            for (size_t i = 0; i < s->maps.size(); ++i)
                for (size_t j = i + 1; j < s->maps.size(); ++j) {
                    double defect = dist_to_int((double)s->maps[i].c * s->maps[j].alpha -
                                                (double)s->maps[j].c * s->maps[i].alpha);
                    require(defect <= 1e-12, ErrorCode::validation, "skew maps do not commute");
                }
            if (observable_.kind() == NilObservable::Kind::trig)
                require(observable_.poly().vars() == 2, ErrorCode::validation,
                        "observable dimension mismatch");
            return;
        }
        const auto& h = std::get<HeisenbergTranslations>(kind_);
        require(!h.taus.empty(), ErrorCode::validation, "heisenberg needs >= 1 translation");
        for (size_t i = 0; i < h.taus.size(); ++i)
            for (size_t j = i + 1; j < h.taus.size(); ++j)
                require(heisenberg_commutator_defect(h.taus[i], h.taus[j]) <= 1e-12,
                        ErrorCode::validation, "heisenberg translations do not commute");
        if (observable_.kind() == NilObservable::Kind::trig)
            require(observable_.poly().vars() == 3, ErrorCode::validation,
                    "observable dimension mismatch");
    }

    NilKind kind_;
    NilObservable observable_;
    int64_t q_;
};

// convenience free function matching the operation name
inline cplx nilsequence_eval(const NilsystemSpec& spec, std::span<const int64_t> n) {
    return spec.nilsequence_eval(n);
}

}  // namespace ergolab
