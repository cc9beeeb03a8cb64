#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace unipairs {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct AllColumnsConstant : std::runtime_error {
    AllColumnsConstant() : std::runtime_error("all columns are constant; nothing to fit") {}
};

struct DegenerateFeature : std::runtime_error {
    explicit DegenerateFeature(const std::string& what) : std::runtime_error(what) {}
};

struct DimensionMismatch : std::runtime_error {
    explicit DimensionMismatch(const std::string& what) : std::runtime_error(what) {}
};

/// A design matrix with response and optional feature names.
struct Dataset {
    Matrix X;
    Vector y;
    std::vector<std::string> feature_names;

    Eigen::Index n() const { return X.rows(); }
    Eigen::Index p() const { return X.cols(); }

    static std::vector<std::string> default_names(Eigen::Index p) {
        std::vector<std::string> names;
        names.reserve(static_cast<std::size_t>(p));
        for (Eigen::Index j = 0; j < p; ++j) names.push_back("x" + std::to_string(j));
        return names;
    }
};

/// Column-standardized design with enough bookkeeping to round-trip back
/// to the original scale. Constant columns are removed, not errored on;
/// `dropped` records their original indices and `kept` maps retained
/// column positions back to original indices.
struct StandardizedDesign {
    Matrix Xs;                        // n x p_kept
    Vector mu;                        // length p_kept, means of kept columns
    Vector sigma;                     // length p_kept, sample SDs (n-1 denominator)
    std::vector<Eigen::Index> kept;    // kept position -> original index
    std::vector<Eigen::Index> dropped; // original indices of constant columns
};

/// Center and scale each column to mean 0, sample SD 1. Columns with zero
/// variance are dropped and recorded.
inline StandardizedDesign standardize(const Matrix& X) {
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    if (n < 2) throw std::invalid_argument("standardize: need n >= 2");

    StandardizedDesign out;
    std::vector<Eigen::Index> kept;
    std::vector<double> mus, sds;
    for (Eigen::Index j = 0; j < p; ++j) {
        const double m = X.col(j).mean();
        const double ss = (X.col(j).array() - m).square().sum();
        const double sd = std::sqrt(ss / static_cast<double>(n - 1));
        if (sd > 0.0) {
            kept.push_back(j);
            mus.push_back(m);
            sds.push_back(sd);
        } else {
            out.dropped.push_back(j);
        }
    }
    if (kept.empty()) throw AllColumnsConstant();

    out.Xs.resize(n, static_cast<Eigen::Index>(kept.size()));
    out.mu.resize(static_cast<Eigen::Index>(kept.size()));
    out.sigma.resize(static_cast<Eigen::Index>(kept.size()));
    for (std::size_t c = 0; c < kept.size(); ++c) {
        const auto ci = static_cast<Eigen::Index>(c);
        out.Xs.col(ci) = (X.col(kept[c]).array() - mus[c]) / sds[c];
        out.mu[ci] = mus[c];
        out.sigma[ci] = sds[c];
    }
    out.kept = std::move(kept);
    return out;
}

/// Inverse of standardize on the kept columns.
inline Matrix destandardize(const StandardizedDesign& d) {
    Matrix X = d.Xs;
    for (Eigen::Index c = 0; c < X.cols(); ++c)
        X.col(c) = X.col(c).array() * d.sigma[c] + d.mu[c];
    return X;
}

struct OlsResult {
    Vector coef;          // length k
    double rss = 0.0;
    Vector xtx_inv_diag;  // diagonal of (A^T A)^{-1}
    bool rank_deficient = false;
};

namespace detail {

// Gauss-Jordan inverse of a small SPD-ish matrix with full pivoting on the
// diagonal. Relative pivot tolerance 1e-12 against the largest initial
// diagonal entry flags rank deficiency.
inline bool invert_small_sym(Matrix& M, double rel_tol = 1e-12) {
    const Eigen::Index k = M.rows();
    double max_diag = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) max_diag = std::max(max_diag, std::abs(M(i, i)));
    if (max_diag == 0.0) return false;

    Matrix A = M;
    Matrix inv = Matrix::Identity(k, k);
    std::vector<bool> used(static_cast<std::size_t>(k), false);
    for (Eigen::Index step = 0; step < k; ++step) {
        // pick the largest remaining diagonal pivot
        Eigen::Index piv = -1;
        double best = -1.0;
        for (Eigen::Index i = 0; i < k; ++i) {
            if (!used[static_cast<std::size_t>(i)] && std::abs(A(i, i)) > best) {
                best = std::abs(A(i, i));
                piv = i;
            }
        }
        if (piv < 0 || best <= rel_tol * max_diag) return false;
        used[static_cast<std::size_t>(piv)] = true;
        const double d = A(piv, piv);
        A.row(piv) /= d;
        inv.row(piv) /= d;
        for (Eigen::Index r = 0; r < k; ++r) {
            if (r == piv) continue;
            const double f = A(r, piv);
            if (f != 0.0) {
                A.row(r) -= f * A.row(piv);
                inv.row(r) -= f * inv.row(piv);
            }
        }
    }
    M = inv;
    return true;
}

}  // namespace detail

/// Exact normal-equations least squares for k <= a handful of columns.
/// Rank deficiency is reported through the flag, never thrown.
inline OlsResult ols_small(const Matrix& A, const Vector& y) {
    const Eigen::Index n = A.rows();
    const Eigen::Index k = A.cols();
    OlsResult res;
    res.coef = Vector::Zero(k);
    res.xtx_inv_diag = Vector::Zero(k);

    Matrix xtx = A.transpose() * A;
    Vector xty = A.transpose() * y;
    Matrix inv = xtx;
    if (!detail::invert_small_sym(inv)) {
        res.rank_deficient = true;
        res.rss = std::numeric_limits<double>::quiet_NaN();
        return res;
    }
    res.coef = inv * xty;
    res.xtx_inv_diag = inv.diagonal();
    res.rss = std::max(0.0, y.squaredNorm() - res.coef.dot(xty));
    (void)n;
    return res;
}

// ---------------------------------------------------------------------------
// Special functions: regularized incomplete beta and the tails built on it.
// ---------------------------------------------------------------------------

namespace detail {

inline double betacf(double a, double b, double x) {
    // Lentz's continued fraction for the incomplete beta function.
    constexpr int max_iter = 300;
    constexpr double eps = 3e-16;
    constexpr double fpmin = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::abs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::abs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) break;
    }
    return h;
}

}  // namespace detail

/// Regularized incomplete beta I_x(a, b).
inline double incbeta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    if (x < (a + 1.0) / (a + b + 2.0))
        return std::exp(ln_front) * detail::betacf(a, b, x) / a;
    return 1.0 - std::exp(ln_front) * detail::betacf(b, a, 1.0 - x) / b;
}

/// Two-sided Student-t p-value P(|T_df| >= |t|).
inline double t_two_sided_p(double t, int df) {
    if (df < 1) throw std::invalid_argument("t_two_sided_p: df must be >= 1");
    if (!std::isfinite(t)) throw std::invalid_argument("t_two_sided_p: t must be finite");
    const double x = static_cast<double>(df) / (static_cast<double>(df) + t * t);
    double p = incbeta(0.5 * df, 0.5, x);
    if (p < 0.0) p = 0.0;
    if (p > 1.0) p = 1.0;
    return p;
}

/// Upper tail of chi-square with 1 df, P(chi2_1 >= x).
inline double chisq1_tail(double x) {
    if (x <= 0.0) return 1.0;
    return std::erfc(std::sqrt(0.5 * x));
}

}  // namespace unipairs
