#pragma once

#include "unipairs/core.hpp"
#include "unipairs/parallel.hpp"

#include <algorithm>
#include <numeric>
#include <utility>
#include <vector>

namespace unipairs {

enum class HierarchyMode { strong, weak, none };

inline const char* to_string(HierarchyMode m) {
    switch (m) {
        case HierarchyMode::strong: return "strong";
        case HierarchyMode::weak: return "weak";
        default: return "none";
    }
}

/// An unordered feature pair, stored with j < k.
struct Pair {
    Eigen::Index j = 0;
    Eigen::Index k = 0;
    friend bool operator==(const Pair& a, const Pair& b) { return a.j == b.j && a.k == b.k; }
    friend bool operator<(const Pair& a, const Pair& b) {
        return a.j != b.j ? a.j < b.j : a.k < b.k;
    }
};

/// Interaction coefficient and p-value from one local 4-parameter fit.
struct PairStat {
    Eigen::Index j = 0;
    Eigen::Index k = 0;
    double beta_jk = 0.0;
    double p_value = 1.0;
    bool degenerate = false;
};

struct ScanResult {
    std::vector<PairStat> stats;      // canonical (j,k) lexicographic order
    std::vector<Pair> gamma_hat;      // selected pairs, lexicographic
    std::vector<char> selected;       // parallel to stats
    std::size_t r_hat = 0;            // 1-based cut rank
    std::vector<double> log_gaps;     // length M-1
};

/// Candidate pairs under a hierarchy regime. An empty active set forces
/// mode none (there would be nothing to scan otherwise).
inline std::vector<Pair> eligible_pairs(Eigen::Index p, HierarchyMode mode,
                                        const std::vector<Eigen::Index>& active_main) {
    std::vector<char> active(static_cast<std::size_t>(p), 0);
    for (auto j : active_main) active[static_cast<std::size_t>(j)] = 1;
    if (active_main.empty()) mode = HierarchyMode::none;

    std::vector<Pair> pairs;
    for (Eigen::Index j = 0; j + 1 < p; ++j) {
        for (Eigen::Index k = j + 1; k < p; ++k) {
            const bool aj = active[static_cast<std::size_t>(j)] != 0;
            const bool ak = active[static_cast<std::size_t>(k)] != 0;
            bool ok = true;
            if (mode == HierarchyMode::strong) ok = aj && ak;
            else if (mode == HierarchyMode::weak) ok = aj || ak;
            if (ok) pairs.push_back({j, k});
        }
    }
    return pairs;
}

/// Local OLS of y on (1, Xs_j, Xs_k, Xs_j .* Xs_k) for every pair; the
/// interaction coefficient is tested with a two-sided t-test on n-4 df.
/// Exact fits (RSS = 0 to rounding) get p = 0 when the interaction is
/// present and are flagged degenerate when it is not.
inline std::vector<PairStat> scan(const Matrix& Xs, const Vector& y,
                                  const std::vector<Pair>& pairs,
                                  std::size_t workers = 0) {
    const Eigen::Index n = Xs.rows();
    if (n < 5) throw std::invalid_argument("scan: need n >= 5 (df = n - 4 >= 1)");

    const double yss = y.squaredNorm();
    const double rss_tol = 1e-24 * std::max(1.0, yss);
    const double beta_tol = 1e-10 * std::max(1.0, y.cwiseAbs().maxCoeff());
    const int df = static_cast<int>(n - 4);

    std::vector<PairStat> stats(pairs.size());
    parallel_for(pairs.size(), workers, [&](std::size_t i) {
        const Pair pr = pairs[i];
        Matrix A(n, 4);
        A.col(0).setOnes();
        A.col(1) = Xs.col(pr.j);
        A.col(2) = Xs.col(pr.k);
        A.col(3) = Xs.col(pr.j).cwiseProduct(Xs.col(pr.k));
        OlsResult ols = ols_small(A, y);

        PairStat st;
        st.j = pr.j;
        st.k = pr.k;
        if (ols.rank_deficient) {
            st.degenerate = true;
            st.p_value = 1.0;
        } else {
            st.beta_jk = ols.coef[3];
            if (ols.rss <= rss_tol) {
                if (std::abs(st.beta_jk) > beta_tol) {
                    st.p_value = 0.0;
                } else {
                    st.degenerate = true;
                    st.p_value = 1.0;
                }
            } else {
                const double se2 = ols.rss / df * ols.xtx_inv_diag[3];
                const double t = st.beta_jk / std::sqrt(se2);
                st.p_value = t_two_sided_p(t, df);
            }
        }
        stats[i] = st;
    });
    return stats;
}

struct LogGapSelection {
    std::size_t r_hat = 0;            // 1-based
    std::vector<std::size_t> gamma;   // indices into the input list
    std::vector<double> log_gaps;
};

/// Largest log-gap threshold over sorted p-values, floored at 1e-20.
/// Ties in the argmax break toward the smallest r (smallest selected set);
/// everything with p <= p_(r_hat) is kept. A single candidate is kept
/// outright.
inline LogGapSelection log_gap_select(const std::vector<double>& p_values) {
    const std::size_t m = p_values.size();
    if (m == 0) throw std::invalid_argument("log_gap_select: empty p-value list");

    LogGapSelection sel;
    if (m == 1) {
        sel.r_hat = 1;
        sel.gamma = {0};
        return sel;
    }

    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });

    constexpr double floor_p = 1e-20;
    std::vector<double> ell(m);
    for (std::size_t r = 0; r < m; ++r)
        ell[r] = std::log(std::max(p_values[order[r]], floor_p));

    sel.log_gaps.resize(m - 1);
    std::size_t best = 0;
    for (std::size_t r = 0; r + 1 < m; ++r) {
        sel.log_gaps[r] = ell[r + 1] - ell[r];
        if (sel.log_gaps[r] > sel.log_gaps[best]) best = r;
    }
    sel.r_hat = best + 1;

    const double cutoff = p_values[order[sel.r_hat - 1]];
    for (std::size_t i = 0; i < m; ++i)
        if (p_values[i] <= cutoff) sel.gamma.push_back(i);
    return sel;
}

/// Full scan + selection over an eligible pair set.
inline ScanResult scan_and_select(const Matrix& Xs, const Vector& y,
                                  const std::vector<Pair>& pairs,
                                  std::size_t workers = 0) {
    ScanResult res;
    if (pairs.empty()) return res;
    res.stats = scan(Xs, y, pairs, workers);
    std::vector<double> ps(res.stats.size());
    for (std::size_t i = 0; i < ps.size(); ++i) ps[i] = res.stats[i].p_value;
    LogGapSelection sel = log_gap_select(ps);
    res.r_hat = sel.r_hat;
    res.log_gaps = std::move(sel.log_gaps);
    res.selected.assign(res.stats.size(), 0);
    for (auto i : sel.gamma) {
        res.selected[i] = 1;
        res.gamma_hat.push_back({res.stats[i].j, res.stats[i].k});
    }
    std::sort(res.gamma_hat.begin(), res.gamma_hat.end());
    return res;
}

}  // namespace unipairs
