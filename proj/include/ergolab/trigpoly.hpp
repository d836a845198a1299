#pragma once

#include <map>
#include <span>
#include <vector>

#include "ergolab/core.hpp"

namespace ergolab {

// Finite trigonometric polynomial on T^m with exact integer frequencies:
//   f(x) = sum_k c_k e(k . x),  k in Z^m.
// All compositions with affine unipotent maps act exactly on the frequency
// side, so integrals (zero coefficient) and L^2 norms (Parseval) carry no
// quadrature error.
class TrigPoly {
public:
    using FreqMap = std::map<std::vector<int64_t>, cplx>;

    explicit TrigPoly(int vars) : vars_(vars) {
        require(vars >= 1, ErrorCode::validation, "trig polynomial needs >= 1 variable");
    }

    static TrigPoly constant(int vars, cplx c) {
        TrigPoly p(vars);
        if (c != cplx(0.0, 0.0)) p.coeffs_[std::vector<int64_t>((size_t)vars, 0)] = c;
        return p;
    }
    // the character e(k . x)
    static TrigPoly character(std::vector<int64_t> k, cplx c = 1.0) {
        TrigPoly p((int)k.size());
        p.coeffs_[std::move(k)] = c;
        return p;
    }

    int vars() const { return vars_; }
    const FreqMap& coeffs() const { return coeffs_; }
    bool empty() const { return coeffs_.empty(); }
    size_t term_count() const { return coeffs_.size(); }

    void add_term(std::vector<int64_t> k, cplx c) {
        require((int)k.size() == vars_, ErrorCode::validation, "frequency arity mismatch");
        auto it = coeffs_.find(k);
        if (it == coeffs_.end()) {
            if (c != cplx(0.0, 0.0)) coeffs_.emplace(std::move(k), c);
        } else {
            it->second += c;
            if (it->second == cplx(0.0, 0.0)) coeffs_.erase(it);
        }
    }

    // sup-norm bound sum_k |c_k|
    double sup_bound() const {
        Kahan s;
        for (auto& [k, c] : coeffs_) s.add(std::abs(c));
        return s.sum;
    }

    int64_t max_abs_freq() const {
        int64_t m = 0;
        for (auto& [k, c] : coeffs_)
            for (auto f : k) m = std::max(m, f < 0 ? -f : f);
        return m;
    }

    // coefficient of the zero frequency = integral over T^m
    cplx integral() const {
        auto it = coeffs_.find(std::vector<int64_t>((size_t)vars_, 0));
        return it == coeffs_.end() ? cplx(0.0, 0.0) : it->second;
    }

    // Parseval: L^2(T^m) norm
    double l2_norm() const {
        Kahan s;
        for (auto& [k, c] : coeffs_) s.add(std::norm(c));
        return std::sqrt(s.sum);
    }

    cplx eval(std::span<const double> x) const {
        KahanC acc;
        for (auto& [k, c] : coeffs_) {
            double phase = 0.0;
            for (size_t i = 0; i < k.size(); ++i) phase += (double)k[i] * x[i];
            acc.add(c * e(phase));
        }
        return acc.value();
    }

    TrigPoly conjugate() const {
        TrigPoly p(vars_);
        for (auto& [k, c] : coeffs_) {
            std::vector<int64_t> mk(k.size());
            for (size_t i = 0; i < k.size(); ++i) mk[i] = -k[i];
            p.coeffs_[std::move(mk)] = std::conj(c);
        }
        return p;
    }

    friend TrigPoly operator+(const TrigPoly& a, const TrigPoly& b) {
        require(a.vars_ == b.vars_, ErrorCode::validation, "trig polynomial arity mismatch");
        TrigPoly p = a;
        for (auto& [k, c] : b.coeffs_) p.add_term(k, c);
        return p;
    }
    friend TrigPoly operator-(const TrigPoly& a, const TrigPoly& b) {
        require(a.vars_ == b.vars_, ErrorCode::validation, "trig polynomial arity mismatch");
        TrigPoly p = a;
        for (auto& [k, c] : b.coeffs_) p.add_term(k, -c);
        return p;
    }
    friend TrigPoly operator*(const TrigPoly& a, cplx s) {
        TrigPoly p(a.vars_);
        if (s == cplx(0.0, 0.0)) return p;
        for (auto& [k, c] : a.coeffs_) p.coeffs_[k] = c * s;
        return p;
    }
    friend TrigPoly operator*(const TrigPoly& a, const TrigPoly& b) {
        require(a.vars_ == b.vars_, ErrorCode::validation, "trig polynomial arity mismatch");
        TrigPoly p(a.vars_);
        std::vector<int64_t> k((size_t)a.vars_);
        for (auto& [ka, ca] : a.coeffs_) {
            for (auto& [kb, cb] : b.coeffs_) {
                for (size_t i = 0; i < k.size(); ++i) k[i] = checked_add(ka[i], kb[i]);
                p.add_term(k, ca * cb);
            }
        }
        return p;
    }

    // frequencies k -> M^T k (exact), coefficients gain e(k . shift);
    // this is composition with the affine map x -> M x + shift
    TrigPoly compose_affine(const std::vector<std::vector<int64_t>>& m_rows,
                            std::span<const double> shift) const {
        require((int)m_rows.size() == vars_, ErrorCode::validation, "matrix size mismatch");
        TrigPoly p(vars_);
        std::vector<int64_t> mk((size_t)vars_);
        for (auto& [k, c] : coeffs_) {
            // mk = M^T k:  mk[j] = sum_i k[i] * M[i][j]
            for (int j = 0; j < vars_; ++j) {
                int64_t acc = 0;
                for (int i = 0; i < vars_; ++i)
                    acc = checked_add(acc, checked_mul(k[(size_t)i], m_rows[(size_t)i][(size_t)j]));
                mk[(size_t)j] = acc;
            }
            double phase = 0.0;
            for (int i = 0; i < vars_; ++i) phase += (double)k[(size_t)i] * shift[(size_t)i];
            p.add_term(mk, c * e(phase));
        }
        return p;
    }

private:
    int vars_;
    FreqMap coeffs_;
};

}  // namespace ergolab
