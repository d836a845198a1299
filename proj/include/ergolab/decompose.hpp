#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "ergolab/core.hpp"
#include "ergolab/gowers.hpp"
#include "ergolab/sequences.hpp"

namespace ergolab {

// ---------------------------------------------------------------------------
// Dictionary of candidate structured atoms.  Every atom is a ComplexSeqNd
// with sup-bound 1; order of insertion is the deterministic tie-break order
// of the fitter.
// ---------------------------------------------------------------------------

struct DictAtom {
    ComplexSeqNd seq;
    std::string label;
};

// ascending list of reduced fractions p/q in [0,1), q <= order
inline std::vector<double> farey_fractions(int order) {
    require(order >= 1, ErrorCode::validation, "farey order must be >= 1");
    std::vector<std::pair<int, int>> fr;
    for (int q = 1; q <= order; ++q)
        for (int p = 0; p < q; ++p)
            if (std::gcd(p, q) == 1) fr.push_back({p, q});
    std::sort(fr.begin(), fr.end(), [](auto a, auto b) {
        return (int64_t)a.first * b.second < (int64_t)b.first * a.second;
    });
    std::vector<double> out;
    out.reserve(fr.size());
    for (auto [p, q] : fr) out.push_back((double)p / (double)q);
    return out;
}

class NilDictionary {
public:
    explicit NilDictionary(int arity) : arity_(arity) {
        require(arity >= 1 && arity <= kMaxArity, ErrorCode::validation,
                "dictionary arity out of range");
    }

    int arity() const { return arity_; }
    const std::vector<DictAtom>& atoms() const { return atoms_; }
    size_t size() const { return atoms_.size(); }

    // linear phase e(n . theta)
    void add_linear(std::vector<double> theta, std::string label = "") {
        require((int)theta.size() == arity_, ErrorCode::validation, "theta arity mismatch");
        if (label.empty()) {
            label = "lin:";
            for (size_t i = 0; i < theta.size(); ++i)
                label += (i ? "," : "") + format_theta(theta[i]);
        }
        ComplexSeqNd s;
        s.arity = arity_;
        s.bound = 1.0;
        s.label = label;
        s.eval = [theta = std::move(theta)](std::span<const int64_t> n) {
            long double phase = 0.0L;
            for (size_t i = 0; i < theta.size(); ++i)
                phase += (long double)n[i] * (long double)theta[i];
            return e_l(phase);
        };
        atoms_.push_back({std::move(s), std::move(label)});
    }

    // quadratic phase e(theta n_i n_j)
    void add_quadratic(int i, int j, double theta, std::string label = "") {
        require(i >= 0 && j >= 0 && i < arity_ && j < arity_, ErrorCode::validation,
                "quadratic indices out of range");
        if (label.empty())
            label = "quad:" + std::to_string(i) + "," + std::to_string(j) + ":" + format_theta(theta);
        ComplexSeqNd s;
        s.arity = arity_;
        s.bound = 1.0;
        s.label = label;
        s.eval = [i, j, theta](std::span<const int64_t> n) {
            return e_l((long double)n[(size_t)i] * (long double)n[(size_t)j] * (long double)theta);
        };
        atoms_.push_back({std::move(s), std::move(label)});
    }

    // arbitrary sampled atom (e.g. a nilsequence evaluator), normalized by
    // its declared bound so the stored atom has sup-bound 1
    void add_atom(const ComplexSeqNd& seq, std::string label) {
        require(seq.arity == arity_, ErrorCode::validation, "atom arity mismatch");
        require(seq.bound > 0.0, ErrorCode::validation, "atom needs a positive bound");
        ComplexSeqNd s;
        s.arity = arity_;
        s.bound = 1.0;
        s.label = label;
        double inv = 1.0 / seq.bound;
        s.eval = [seq, inv](std::span<const int64_t> n) { return seq.eval(n) * inv; };
        atoms_.push_back({std::move(s), std::move(label)});
    }

    // one-variable dictionary of Farey linear phases plus user frequencies
    static NilDictionary farey1(int order, const std::vector<double>& extra = {}) {
        NilDictionary d(1);
        for (double t : farey_fractions(order)) d.add_linear({t});
        for (double t : extra) d.add_linear({frac(t)});
        return d;
    }

private:
    static std::string format_theta(double t) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.12g", t);
        return buf;
    }

    int arity_;
    std::vector<DictAtom> atoms_;
};

// Besicovitch Gram matrix of the whole atom set on a working window, the
// near-orthogonality diagnostic of a dictionary.  Quadratic in the atom
// count, so capped.
struct DictionaryGram {
    size_t atoms = 0;
    double max_offdiag = 0.0;
    double min_diag = 0.0;
    std::vector<std::vector<cplx>> matrix;  // entries <a_i, a_j>_w
};

inline DictionaryGram dictionary_gram(const NilDictionary& dict, const FolnerWindow& window,
                                      size_t max_atoms = 64) {
    require(dict.size() <= max_atoms, ErrorCode::budget_exceeded,
            "dictionary too large for a full Gram report");
    int64_t card = window.cardinality();
    const int d = dict.arity();
    std::vector<std::vector<cplx>> vals(dict.size());
    int64_t n[kMaxArity];
    for (size_t j = 0; j < dict.size(); ++j) {
        vals[j].resize((size_t)card);
        for (int64_t i = 0; i < card; ++i) {
            window.point(i, std::span<int64_t>(n, (size_t)d));
            vals[j][(size_t)i] = dict.atoms()[j].seq.eval(std::span<const int64_t>(n, (size_t)d));
        }
    }
    DictionaryGram g;
    g.atoms = dict.size();
    g.min_diag = 1e300;
    g.matrix.assign(dict.size(), std::vector<cplx>(dict.size()));
    for (size_t i = 0; i < dict.size(); ++i)
        for (size_t j = 0; j < dict.size(); ++j) {
            KahanC s;
            for (int64_t p = 0; p < card; ++p)
                s.add(vals[i][(size_t)p] * std::conj(vals[j][(size_t)p]));
            cplx v = s.value() / (double)card;
            g.matrix[i][j] = v;
            if (i == j)
                g.min_diag = std::min(g.min_diag, v.real());
            else
                g.max_offdiag = std::max(g.max_offdiag, std::abs(v));
        }
    return g;
}

// ---------------------------------------------------------------------------
// Small Hermitian positive-definite linear algebra for the least-squares
// re-solve and the Gram condition estimate.
// ---------------------------------------------------------------------------

namespace detail {

using Mat = std::vector<std::vector<cplx>>;

// Cholesky G = L L^H; returns false if a pivot degenerates
inline bool cholesky(const Mat& g, Mat& l) {
    size_t k = g.size();
    l.assign(k, std::vector<cplx>(k, cplx(0.0, 0.0)));
    for (size_t i = 0; i < k; ++i) {
        for (size_t j = 0; j <= i; ++j) {
            cplx sum = g[i][j];
            for (size_t p = 0; p < j; ++p) sum -= l[i][p] * std::conj(l[j][p]);
            if (i == j) {
                double re = sum.real();
                if (re <= 0.0 || !std::isfinite(re)) return false;
                l[i][i] = std::sqrt(re);
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    return true;
}

inline std::vector<cplx> chol_solve(const Mat& l, const std::vector<cplx>& b) {
    size_t k = b.size();
    std::vector<cplx> y(k), x(k);
    for (size_t i = 0; i < k; ++i) {
        cplx s = b[i];
        for (size_t j = 0; j < i; ++j) s -= l[i][j] * y[j];
        y[i] = s / l[i][i];
    }
    for (size_t ii = k; ii-- > 0;) {
        cplx s = y[ii];
        for (size_t j = ii + 1; j < k; ++j) s -= std::conj(l[j][ii]) * x[j];
        x[ii] = s / l[ii][ii];
    }
    return x;
}

// condition estimate of a Hermitian PD matrix: power iteration for the top
// eigenvalue, inverse iteration through the Cholesky factor for the bottom.
// Returns infinity when the factorization degenerates.
inline double gram_condition(const Mat& g) {
    size_t k = g.size();
    if (k <= 1) return 1.0;
    Mat l;
    if (!cholesky(g, l)) return std::numeric_limits<double>::infinity();
    auto matvec = [&](const std::vector<cplx>& v) {
        std::vector<cplx> out(k, cplx(0.0, 0.0));
        for (size_t i = 0; i < k; ++i)
            for (size_t j = 0; j < k; ++j) out[i] += g[i][j] * v[j];
        return out;
    };
    auto norm = [](const std::vector<cplx>& v) {
        double s = 0.0;
        for (auto z : v) s += std::norm(z);
        return std::sqrt(s);
    };
    std::vector<cplx> v(k);
    for (size_t i = 0; i < k; ++i) v[i] = cplx(1.0 + (double)i * 0.25, 0.125 * (double)(i % 3));
    double lam_max = 1.0;
    for (int it = 0; it < 60; ++it) {
        auto w = matvec(v);
        lam_max = norm(w);
        if (lam_max == 0.0) return std::numeric_limits<double>::infinity();
        for (auto& z : w) z /= lam_max;
        v = std::move(w);
    }
    for (size_t i = 0; i < k; ++i) v[i] = cplx(1.0 - 0.125 * (double)(i % 5), 0.25);
    double inv_norm = 1.0;
    for (int it = 0; it < 60; ++it) {
        auto w = chol_solve(l, v);
        inv_norm = norm(w);
        if (inv_norm == 0.0) return std::numeric_limits<double>::infinity();
        for (auto& z : w) z /= inv_norm;
        v = std::move(w);
    }
    double lam_min = 1.0 / inv_norm;
    return lam_max / lam_min;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Greedy orthogonal-matching-pursuit decomposition
// ---------------------------------------------------------------------------

struct SelectedAtom {
    size_t index;       // position in the dictionary
    std::string label;
    cplx coeff;
};

struct DecompositionMetrics {
    double residual_besicovitch = 0.0;
    double structured_sup_bound = 0.0;  // sum |coeff| over selected atoms
    bool sup_bound_exceeds_input = false;
    double gram_condition = 1.0;
    double max_offdiag_gram = 0.0;  // coherence of the selected atoms
};

enum class FitStatus { ok, gram_ill_conditioned };

struct DecompositionReport {
    FitStatus status = FitStatus::ok;
    std::vector<SelectedAtom> atoms;
    DecompositionMetrics metrics;
    // evaluators reconstructing the two parts; a_st + a_err == a pointwise
    ComplexSeqNd structured;
    ComplexSeqNd residual;
};

inline constexpr int64_t kDefaultFitOpBudget = 200000000;

// Greedy fit: repeatedly select the dictionary atom with the largest
// windowed inner product against the residual, re-solve the least squares
// over all selected atoms, stop at max_terms or when the best correlation
// falls below tol.  Ties break toward the earlier atom.  A Gram condition
// beyond 1e8 stops the fit and returns the partial result with status
// gram_ill_conditioned.
inline DecompositionReport fit_structured(const ComplexSeqNd& a, const FolnerWindow& window,
                                          const NilDictionary& dict, int max_terms, double tol,
                                          int64_t op_budget = kDefaultFitOpBudget) {
    require(a.arity == dict.arity(), ErrorCode::validation, "sequence/dictionary arity mismatch");
    require(window.arity() == a.arity, ErrorCode::validation, "window arity mismatch");
    require(max_terms >= 1, ErrorCode::validation, "max_terms must be >= 1");
    require(tol >= 0.0, ErrorCode::validation, "tol must be >= 0");
    require(!dict.atoms().empty(), ErrorCode::validation, "empty dictionary");
    int64_t card = window.cardinality();
    require((__int128)card * (__int128)dict.size() <= op_budget, ErrorCode::budget_exceeded,
            "fit budget exceeded");

    const int d = a.arity;
    const size_t natoms = dict.size();
    // materialize the target and every atom on the window
    std::vector<cplx> target((size_t)card);
    {
        int64_t n[kMaxArity];
        for (int64_t i = 0; i < card; ++i) {
            window.point(i, std::span<int64_t>(n, (size_t)d));
            target[(size_t)i] = a.checked_eval(std::span<const int64_t>(n, (size_t)d));
        }
    }
    std::vector<std::vector<cplx>> atom_vals(natoms);
    for (size_t j = 0; j < natoms; ++j) {
        atom_vals[j].resize((size_t)card);
        int64_t n[kMaxArity];
        for (int64_t i = 0; i < card; ++i) {
            window.point(i, std::span<int64_t>(n, (size_t)d));
            atom_vals[j][(size_t)i] = dict.atoms()[j].seq.checked_eval(
                std::span<const int64_t>(n, (size_t)d));
        }
    }
    auto inner = [&](const std::vector<cplx>& u, const std::vector<cplx>& v) {
        KahanC s;
        for (int64_t i = 0; i < card; ++i) s.add(u[(size_t)i] * std::conj(v[(size_t)i]));
        return s.value() / (double)card;
    };

    std::vector<size_t> sel;
    std::vector<cplx> coeffs;
    std::vector<cplx> resid = target;
    std::vector<char> used(natoms, 0);
    FitStatus status = FitStatus::ok;
    double gram_cond = 1.0;

    detail::Mat gram;
    std::vector<cplx> beta;
    while ((int)sel.size() < max_terms) {
        // selection: max |<resid, atom>|, earlier atom wins ties
        size_t best = natoms;
        double best_mag = -1.0;
        cplx best_corr;
        for (size_t j = 0; j < natoms; ++j) {
            if (used[j]) continue;
            cplx c = inner(resid, atom_vals[j]);
            double m = std::abs(c);
            if (m > best_mag + 1e-15) {
                best_mag = m;
                best = j;
                best_corr = c;
            }
        }
        if (best == natoms || best_mag < tol) break;

        // tentatively extend the normal-equation matrix M[i][j] = <a_j, a_i>
        // (the Hermitian Gram of the selected columns, conjugated the way the
        // least-squares system M c = beta with beta_i = <target, a_i> needs)
        size_t k = sel.size();
        gram.resize(k + 1);
        for (auto& row : gram) row.resize(k + 1);
        for (size_t i = 0; i < k; ++i) {
            cplx g = inner(atom_vals[best], atom_vals[sel[i]]);
            gram[i][k] = g;
            gram[k][i] = std::conj(g);
        }
        gram[k][k] = inner(atom_vals[best], atom_vals[best]);
        double cond = detail::gram_condition(gram);
        if (!(cond <= 1e8)) {
            gram.resize(k);
            for (auto& row : gram) row.resize(k);
            status = FitStatus::gram_ill_conditioned;
            gram_cond = cond;
            break;
        }
        gram_cond = cond;
        sel.push_back(best);
        used[best] = 1;
        beta.resize(sel.size());
        for (size_t i = 0; i < sel.size(); ++i) beta[i] = inner(target, atom_vals[sel[i]]);

        detail::Mat l;
        bool ok = detail::cholesky(gram, l);
        if (!ok) {
            // roll the selection back; the condition guard nearly always
            // fires first
            sel.pop_back();
            used[best] = 0;
            gram.resize(k);
            for (auto& row : gram) row.resize(k);
            status = FitStatus::gram_ill_conditioned;
            break;
        }
        coeffs = detail::chol_solve(l, beta);

        // refresh the residual from the re-solved coefficients
        resid = target;
        for (size_t i = 0; i < sel.size(); ++i)
            for (int64_t p = 0; p < card; ++p)
                resid[(size_t)p] -= coeffs[i] * atom_vals[sel[i]][(size_t)p];
    }

    DecompositionReport rep;
    rep.status = status;
    for (size_t i = 0; i < sel.size(); ++i)
        rep.atoms.push_back({sel[i], dict.atoms()[sel[i]].label, coeffs[i]});

    Kahan rb;
    for (int64_t i = 0; i < card; ++i) rb.add(std::norm(resid[(size_t)i]));
    rep.metrics.residual_besicovitch = std::sqrt(rb.sum / (double)card);
    Kahan sb;
    for (auto& s : rep.atoms) sb.add(std::abs(s.coeff));
    rep.metrics.structured_sup_bound = sb.sum;
    rep.metrics.sup_bound_exceeds_input = rep.metrics.structured_sup_bound > a.bound + 1e-12;
    rep.metrics.gram_condition = gram_cond;
    double max_off = 0.0;
    for (size_t i = 0; i < sel.size(); ++i)
        for (size_t j = i + 1; j < sel.size(); ++j)
            max_off = std::max(max_off, std::abs(inner(atom_vals[sel[i]], atom_vals[sel[j]])));
    rep.metrics.max_offdiag_gram = max_off;

    // lazy reconstruction evaluators
    struct StPart {
        std::vector<ComplexSeqNd> atoms;
        std::vector<cplx> coeffs;
    };
    auto st = std::make_shared<StPart>();
    for (size_t i = 0; i < sel.size(); ++i) {
        st->atoms.push_back(dict.atoms()[sel[i]].seq);
        st->coeffs.push_back(coeffs[i]);
    }
    rep.structured.arity = d;
    rep.structured.bound = std::max(rep.metrics.structured_sup_bound, 1e-300);
    rep.structured.label = "structured";
    rep.structured.eval = [st](std::span<const int64_t> n) {
        KahanC s;
        for (size_t i = 0; i < st->atoms.size(); ++i) s.add(st->coeffs[i] * st->atoms[i].eval(n));
        return s.value();
    };
    rep.residual.arity = d;
    rep.residual.bound = a.bound + rep.metrics.structured_sup_bound;
    rep.residual.label = "residual";
    ComplexSeqNd a_copy = a;
    ComplexSeqNd st_copy = rep.structured;
    rep.residual.eval = [a_copy, st_copy](std::span<const int64_t> n) {
        return a_copy.eval(n) - st_copy.eval(n);
    };
    return rep;
}

// ---------------------------------------------------------------------------
// Residual uniformity proxy: restrict the residual to a Z_N^d sub-box of the
// window (restriction, not periodization) and take the grid Gowers norm.
// ---------------------------------------------------------------------------

struct ResidualUniformity {
    double value = 0.0;
    double boundary_estimate = 0.0;  // O(d k / N_wrap), surfaced with the value
    bool wrap_is_proxy = true;
};

inline ResidualUniformity residual_uniformity(const DecompositionReport& rep,
                                              const FolnerWindow& window, int k, int64_t n_wrap,
                                              int64_t op_budget = kDefaultGowersOpBudget) {
    require(n_wrap >= 1, ErrorCode::validation, "wrap modulus must be >= 1");
    for (auto s : window.sides())
        require(s >= n_wrap, ErrorCode::validation,
                "window must cover at least N_wrap points per dimension");
    const int d = window.arity();
    FiniteGridFn g((int)n_wrap, d);
    int64_t idx[kMaxArity], n[kMaxArity];
    for (int64_t i = 0; i < g.size(); ++i) {
        g.decompose(i, idx);
        for (int c = 0; c < d; ++c) n[c] = window.offset()[(size_t)c] + 1 + idx[c];
        g.at_linear(i) = rep.residual.eval(std::span<const int64_t>(n, (size_t)d));
    }
    ResidualUniformity r;
    r.value = gowers_norm(g, k, op_budget);
    r.boundary_estimate = (double)d * (double)k / (double)n_wrap;
    return r;
}

// ---------------------------------------------------------------------------
// JSON serialization of reports
// ---------------------------------------------------------------------------

inline nlohmann::json report_to_json(const DecompositionReport& rep) {
    nlohmann::json j;
    j["status"] = rep.status == FitStatus::ok ? "ok" : "gram_ill_conditioned";
    j["atoms"] = nlohmann::json::array();
    for (auto& s : rep.atoms) {
        j["atoms"].push_back({{"index", s.index},
                              {"label", s.label},
                              {"coeff_re", s.coeff.real()},
                              {"coeff_im", s.coeff.imag()}});
    }
    j["metrics"] = {{"residual_besicovitch", rep.metrics.residual_besicovitch},
                    {"structured_sup_bound", rep.metrics.structured_sup_bound},
                    {"sup_bound_exceeds_input", rep.metrics.sup_bound_exceeds_input},
                    {"gram_condition", rep.metrics.gram_condition},
                    {"max_offdiag_gram", rep.metrics.max_offdiag_gram}};
    return j;
}

}  // namespace ergolab
