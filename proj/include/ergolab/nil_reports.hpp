#pragma once

#include <vector>

#include "ergolab/nilsystems.hpp"
#include "ergolab/sequences.hpp"

namespace ergolab {

// ---------------------------------------------------------------------------
// Haar integration: tensor midpoint rule over the fundamental domain at the
// spec resolution Q and at 2Q; the difference is the error estimate.
// ---------------------------------------------------------------------------

struct HaarIntegral {
    cplx value;            // finer (2Q) estimate
    double error_estimate; // |I_Q - I_2Q|
    int64_t q;
};

namespace detail {

inline cplx haar_midpoint(const NilsystemSpec& spec, int64_t q) {
    const int dim = spec.domain_dim();
    __int128 total = 1;
    for (int i = 0; i < dim; ++i) {
        total *= q;
        require(total <= (1LL << 31), ErrorCode::budget_exceeded, "haar grid too large");
    }
    const bool heis = spec.is_heisenberg();
    KahanC acc;
    double p[4];
    for (int64_t idx = 0; idx < (int64_t)total; ++idx) {
        int64_t rem = idx;
        for (int i = dim - 1; i >= 0; --i) {
            p[i] = ((double)(rem % q) + 0.5) / (double)q;
            rem /= q;
        }
        acc.add(spec.observable().eval(std::span<const double>(p, (size_t)dim), heis));
    }
    return acc.value() / (double)(int64_t)total;
}

}  // namespace detail

inline HaarIntegral haar_integral(const NilsystemSpec& spec) {
    int64_t q = spec.quadrature_q();
    cplx coarse = detail::haar_midpoint(spec, q);
    cplx fine = detail::haar_midpoint(spec, 2 * q);
    return {fine, std::abs(fine - coarse), q};
}

// ---------------------------------------------------------------------------
// Equidistribution report: Weyl sums of horizontal characters along the
// orbit, plus the observable's orbit-average deviation from its Haar
// integral, both at the horizon N and at N/2 for the trend.
// ---------------------------------------------------------------------------

struct WeylRow {
    std::vector<int64_t> freq;
    double modulus;
};

struct EquidistributionSnapshot {
    int64_t horizon = 0;
    double max_weyl = 0.0;
    std::vector<int64_t> argmax_freq;
    double observable_deviation = 0.0;  // | avg Psi(orbit) - int Psi dm |
};

struct EquidistributionReport {
    EquidistributionSnapshot full;   // at N
    EquidistributionSnapshot half;   // at N/2
    std::vector<WeylRow> rows;       // all characters at the full horizon
    HaarIntegral haar;
    bool observable_continuous = true;
};

inline constexpr int64_t kDefaultEquidistBudget = 2000000000;

namespace detail {

inline EquidistributionSnapshot equidist_snapshot(const NilsystemSpec& spec, int64_t horizon,
                                                  int freq_cutoff, cplx haar_value,
                                                  std::vector<WeylRow>* rows_out) {
    const int d = spec.variables();
    const int hdim = spec.horizontal_dim();
    FolnerWindow w = FolnerWindow::boxd(d, horizon);
    int64_t card = w.cardinality();

    EquidistributionSnapshot snap;
    snap.horizon = horizon;

    // enumerate frequency vectors with 0 < |k|_1 <= cutoff
    std::vector<int64_t> k((size_t)hdim, -(int64_t)freq_cutoff);
    while (true) {
        int64_t l1 = 0;
        for (auto c : k) l1 += (c < 0 ? -c : c);
        if (l1 >= 1 && l1 <= freq_cutoff) {
            cplx sum = block_sum(card, [&](int64_t i) {
                int64_t n[kMaxArity];
                double h[4];
                w.point(i, std::span<int64_t>(n, (size_t)d));
                spec.horizontal_point(std::span<const int64_t>(n, (size_t)d),
                                      std::span<double>(h, (size_t)hdim));
                double phase = 0.0;
                for (int c = 0; c < hdim; ++c) phase += (double)k[(size_t)c] * h[c];
                return e(phase);
            });
            double mod = std::abs(sum) / (double)card;
            if (rows_out) rows_out->push_back({k, mod});
            if (mod > snap.max_weyl) {
                snap.max_weyl = mod;
                snap.argmax_freq = k;
            }
        }
        int i = hdim - 1;
        while (i >= 0 && ++k[(size_t)i] > freq_cutoff) {
            k[(size_t)i] = -(int64_t)freq_cutoff;
            --i;
        }
        if (i < 0) break;
    }

    cplx avg = block_sum(card, [&](int64_t i) {
        int64_t n[kMaxArity];
        w.point(i, std::span<int64_t>(n, (size_t)d));
        return spec.nilsequence_eval(std::span<const int64_t>(n, (size_t)d));
    }) / (double)card;
    snap.observable_deviation = std::abs(avg - haar_value);
    return snap;
}

}  // namespace detail

inline EquidistributionReport equidistribution_report(const NilsystemSpec& spec, int64_t horizon,
                                                      int freq_cutoff,
                                                      int64_t budget = kDefaultEquidistBudget) {
    require(horizon >= 2, ErrorCode::validation, "horizon must be >= 2");
    require(freq_cutoff >= 1, ErrorCode::validation, "frequency cutoff must be >= 1");
    const int d = spec.variables();
    const int hdim = spec.horizontal_dim();
    __int128 chars = 1;
    for (int i = 0; i < hdim; ++i) chars *= (2 * freq_cutoff + 1);
    __int128 pts = 1;
    for (int i = 0; i < d; ++i) pts *= horizon;
    require(pts * chars <= budget, ErrorCode::budget_exceeded,
            "equidistribution budget exceeded");

    EquidistributionReport rep;
    rep.haar = haar_integral(spec);
    rep.observable_continuous = spec.observable_continuous();
    rep.full = detail::equidist_snapshot(spec, horizon, freq_cutoff, rep.haar.value, &rep.rows);
    rep.half = detail::equidist_snapshot(spec, horizon / 2, freq_cutoff, rep.haar.value, nullptr);
    return rep;
}

// the nilsequence as a ComplexSeqNd weight for the averaging machinery
inline ComplexSeqNd nilsequence_weight(const NilsystemSpec& spec) {
    auto shared = std::make_shared<NilsystemSpec>(spec);
    ComplexSeqNd s;
    s.arity = spec.variables();
    s.bound = spec.observable().sup_bound(spec.domain_dim());
    s.label = "nilsequence";
    s.eval = [shared](std::span<const int64_t> n) { return shared->nilsequence_eval(n); };
    return s;
}

}  // namespace ergolab
